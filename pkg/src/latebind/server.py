"""HTTP surface: image delivery with cache-defeating headers, plus the
management API used by the CLI and the web console.

Image URLs are versionless on purpose: the HTML sitting in a delivered
email can never change, so /i/{id}/{segment}.{ext} always serves the latest
committed revision, and every image response forbids caching at every layer.
"""

from __future__ import annotations

import io
import json
import mimetypes
import re
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from PIL import Image

from .clock import Clock, SystemClock
from .content import ContentManager
from .errors import (
    AuthDenied,
    Conflict,
    ContentExpired,
    InvalidSpec,
    LateBindError,
    NotFound,
    TokenRevoked,
)
from .lifecycle import LifecyclePolicy
from .refresh import DEFAULT_INTERVAL_FLOOR, DEFAULT_KT_INTERVAL, RefreshEngine, Scheduler
from .render import DEFAULT_MAX_BLUR_PX, RenderSpec, register_font
from .scrub import detect, redact_preview
from .snippets import SnippetOptions, generate_snippet, image_urls
from .storage import DEFAULT_REVISION_CAP, KINDS, ContentStore
from .tokens import TokenVault

CACHE_DEFEAT = "no-cache, no-store, max-age=0"

_IMAGE_PATH = re.compile(r"^/i/([a-z2-7]+)/(\d+)\.(png|gif)$")
_CONTENT_PATH = re.compile(r"^/api/contents/([a-z2-7]+)$")


def _placeholder_png() -> bytes:
    img = Image.new("RGBA", (1, 1), (0, 0, 0, 0))
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


PLACEHOLDER_PNG = _placeholder_png()


@dataclass
class ServiceConfig:
    data_dir: str
    base_url: str = "https://localhost:8787"
    bind_host: str = "127.0.0.1"
    bind_port: int = 8787
    font_path: Optional[str] = None
    max_blur_px: float = DEFAULT_MAX_BLUR_PX
    kt_interval: float = DEFAULT_KT_INTERVAL
    revision_cap: int = DEFAULT_REVISION_CAP
    interval_floor: float = DEFAULT_INTERVAL_FLOOR
    scheduler_poll: float = 0.05
    ui_dir: Optional[str] = None
    extra: dict = field(default_factory=dict)


class LatebindService:
    """Owns the store, manager, engine, scheduler, and the HTTP server."""

    def __init__(self, config: ServiceConfig, clock: Clock | None = None,
                 http_fetch=None, providers=None):
        self.config = config
        self.clock = clock or SystemClock()
        if config.font_path:
            register_font("default", config.font_path)
        self.store = ContentStore(config.data_dir, clock=self.clock,
                                  revision_cap=config.revision_cap)
        self.vault = TokenVault(self.store, self.store.salt)
        self.manager = ContentManager(self.store, self.vault, self.clock,
                                      max_blur_px=config.max_blur_px)
        self.engine = RefreshEngine(
            self.store,
            self.clock,
            http_fetch=http_fetch,
            providers=providers,
            interval_floor=config.interval_floor,
            max_blur_px=config.max_blur_px,
        )
        self.scheduler = Scheduler(
            self.engine,
            self.store,
            self.clock,
            manager=self.manager,
            kt_interval=config.kt_interval,
            poll=config.scheduler_poll,
        )
        self._httpd: Optional[ThreadingHTTPServer] = None
        self._thread: Optional[threading.Thread] = None

    # -- lifecycle -------------------------------------------------------

    def start(self, run_scheduler: bool = True) -> tuple[str, int]:
        handler = _make_handler(self)
        self._httpd = ThreadingHTTPServer(
            (self.config.bind_host, self.config.bind_port), handler
        )
        self._httpd.daemon_threads = True
        host, port = self._httpd.server_address[:2]
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, name="latebind-http", daemon=True
        )
        self._thread.start()
        if run_scheduler:
            self.scheduler.start()
        return host, port

    def stop(self) -> None:
        self.scheduler.stop()
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
            self._httpd = None
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    # -- request-level operations ----------------------------------------

    def _snippet_options(self, body: dict) -> SnippetOptions:
        return SnippetOptions(
            base_url=self.config.base_url,
            include_alt=bool(body.get("include_alt", False)),
            alt_text=body.get("alt_text"),
        )

    def _content_response(self, content_id: str, token: Optional[str], body: dict,
                          revision: Optional[int] = None) -> dict:
        content = self.store.load(content_id)
        options = self._snippet_options(body)
        response = {
            "content_id": content_id,
            "image_urls": image_urls(content, self.config.base_url),
            "html_snippet": generate_snippet(content, options),
        }
        if token is not None:
            response["edit_token"] = token
        if revision is not None:
            response["revision"] = revision
        return response

    def create_content(self, body: dict) -> dict:
        if not isinstance(body, dict):
            raise InvalidSpec("body must be a JSON object")
        kind = body.get("kind", "static")
        if kind not in KINDS:
            raise InvalidSpec(f"kind must be one of {', '.join(KINDS)}")
        text = body.get("text")
        binding = body.get("binding")
        if text is not None and binding is not None:
            raise InvalidSpec("provide either text or binding, not both")
        if text is not None and not isinstance(text, str):
            raise InvalidSpec("text must be a string")
        spec = RenderSpec.from_dict(body.get("spec") or {})
        policy = LifecyclePolicy.from_dict(body.get("policy"))
        kt_enabled = bool(body.get("kt_enabled", False))
        normalized_binding = self.engine.validate_binding(binding) if binding is not None else None

        made = self.manager.create(kind, text, spec, policy, kt_enabled, normalized_binding)
        return self._content_response(made.content_id, made.edit_token, body)

    def patch_content(self, content_id: str, token: Optional[str], body: dict) -> dict:
        new_text = body.get("text")
        if not isinstance(new_text, str):
            raise InvalidSpec("body needs a 'text' string")
        revision = self.manager.update_text(content_id, token, new_text)
        return self._content_response(content_id, None, body, revision=revision)

    def register_binding(self, body: dict, token: Optional[str]) -> dict:
        content_id = body.get("content_id")
        if not content_id:
            raise InvalidSpec("body needs 'content_id'")
        binding = body.get("binding")
        if not isinstance(binding, dict):
            raise InvalidSpec("body needs a 'binding' object")
        if not self.vault.is_owner(token, content_id):
            raise AuthDenied("missing or unknown token")
        normalized = self.engine.validate_binding(binding)
        self.engine.register_binding(content_id, normalized)
        return {"content_id": content_id, "binding": normalized}

    def scrub_text(self, body: dict) -> dict:
        text = body.get("text")
        if not isinstance(text, str):
            raise InvalidSpec("body needs a 'text' string")
        categories = set(body["categories"]) if body.get("categories") else None
        spans = detect(text, categories)
        return {
            "spans": [
                {
                    "start": s.start,
                    "end": s.end,
                    "category": s.category,
                    "matched_text": s.matched_text,
                }
                for s in spans
            ],
            "preview": redact_preview(text, spans),
        }


def _make_handler(service: LatebindService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"
        server_version = "latebind/0.1"

        # -- plumbing ---------------------------------------------------

        def log_message(self, format, *args):  # tests want quiet servers
            pass

        def _token(self) -> Optional[str]:
            auth = self.headers.get("Authorization", "")
            if auth.startswith("Bearer "):
                return auth[len("Bearer ") :].strip()
            cookie = self.headers.get("Cookie", "")
            for part in cookie.split(";"):
                name, _, value = part.strip().partition("=")
                if name == "lb_token" and value:
                    return value
            return None

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                parsed = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                raise InvalidSpec("body must be valid JSON")
            if not isinstance(parsed, dict):
                raise InvalidSpec("body must be a JSON object")
            return parsed

        def _send(self, status: int, payload: bytes, content_type: str,
                  cache_defeat: bool = False) -> None:
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(payload)))
            if cache_defeat:
                self.send_header("Cache-Control", CACHE_DEFEAT)
                self.send_header("Pragma", "no-cache")
                self.send_header("Expires", "0")
            self.end_headers()
            self.wfile.write(payload)

        def _send_json(self, status: int, document: dict) -> None:
            self._send(status, json.dumps(document).encode("utf-8"), "application/json")

        def _send_error_json(self, status: int, message: str, reason: Optional[str] = None) -> None:
            doc = {"error": message}
            if reason:
                doc["reason"] = reason
            self._send_json(status, doc)

        def _api_guard(self, fn) -> None:
            try:
                fn()
            except TokenRevoked as exc:
                self._send_error_json(403, "edit rights revoked", str(exc) or "recipient-opened")
            except AuthDenied as exc:
                self._send_error_json(401, str(exc) or "unauthorized")
            except NotFound as exc:
                self._send_error_json(404, str(exc) or "not found")
            except Conflict as exc:
                self._send_error_json(409, str(exc) or "conflict")
            except ContentExpired as exc:
                self._send_error_json(410, str(exc) or "content expired")
            except (InvalidSpec, ValueError) as exc:
                self._send_error_json(400, str(exc) or "bad request")
            except LateBindError as exc:
                self._send_error_json(400, str(exc))
            except Exception:  # noqa: BLE001 - last-ditch; never leak tracebacks
                self._send_error_json(500, "internal error")

        # -- routes ------------------------------------------------------

        def do_GET(self):
            image = _IMAGE_PATH.match(self.path)
            if image:
                return self._serve_image(*image.groups())
            if self.path == "/healthz":
                return self._send_json(200, {"status": "ok", "version": "0.1.0"})
            match = _CONTENT_PATH.match(self.path)
            if match:
                return self._api_guard(
                    lambda: self._send_json(
                        200, service.manager.status_doc(match.group(1), self._token())
                    )
                )
            if self.path == "/" or self.path.startswith("/ui"):
                return self._serve_ui()
            self._send_error_json(404, "no such route")

        def do_POST(self):
            if self.path == "/api/contents":
                return self._api_guard(
                    lambda: self._send_json(201, service.create_content(self._body()))
                )
            if self.path == "/api/bindings":
                return self._api_guard(
                    lambda: self._send_json(
                        200, service.register_binding(self._body(), self._token())
                    )
                )
            if self.path == "/api/scrub":
                return self._api_guard(
                    lambda: self._send_json(200, service.scrub_text(self._body()))
                )
            self._send_error_json(404, "no such route")

        def do_PATCH(self):
            match = _CONTENT_PATH.match(self.path)
            if match:
                return self._api_guard(
                    lambda: self._send_json(
                        200,
                        service.patch_content(match.group(1), self._token(), self._body()),
                    )
                )
            self._send_error_json(404, "no such route")

        def do_DELETE(self):
            match = _CONTENT_PATH.match(self.path)
            if match:

                def run():
                    service.manager.delete_content(match.group(1), self._token())
                    self._send_json(200, {"content_id": match.group(1), "status": "deleted"})

                return self._api_guard(run)
            self._send_error_json(404, "no such route")

        # -- helpers ------------------------------------------------------

        def _serve_image(self, content_id: str, segment: str, ext: str) -> None:
            try:
                asset = service.manager.serve_image(
                    content_id, int(segment), ext, self._token()
                )
            except LateBindError:
                # missing content renders as an invisible pixel, not a broken icon
                return self._send(404, PLACEHOLDER_PNG, "image/png", cache_defeat=True)
            except Exception:  # noqa: BLE001
                return self._send(404, PLACEHOLDER_PNG, "image/png", cache_defeat=True)
            self._send(200, asset.payload, asset.format.content_type, cache_defeat=True)

        def _serve_ui(self) -> None:
            ui_dir = service.config.ui_dir
            if not ui_dir:
                return self._send_error_json(404, "no UI bundle configured (--ui-dir)")
            rel = self.path[len("/ui") :].lstrip("/") or "index.html"
            if self.path == "/":
                rel = "index.html"
            base = Path(ui_dir).resolve()
            target = (base / rel).resolve()
            if not str(target).startswith(str(base)) or not target.is_file():
                return self._send_error_json(404, "no such file")
            ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
            self._send(200, target.read_bytes(), ctype)

    return Handler
