"""Data bindings and the periodic refresh scheduler.

Dashboards bind a content id to a JSON endpoint (path + template);
web references bind to a snapshot provider. The scheduler re-pulls each
binding once per interval (with a little jitter), re-renders, and commits a
new revision only when the output actually changed. A failing source never
breaks serving: the last good revision stays up.
"""

from __future__ import annotations

import io
import json
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from PIL import Image

from .clock import Clock
from .content import ContentManager
from .errors import Conflict, ContentExpired, InvalidSpec, NotFound
from .jsonpath import extract, format_value
from .render import ImageAsset, ImageFormat, RenderSpec, blur_fraction, render_blur_segments, render_static
from .render.static import encode_png
from .storage import BoundContent, ContentStore

USER_AGENT = "latebind/0.1 (+data-binding refresh)"
FETCH_TIMEOUT = 10.0
DEFAULT_INTERVAL_FLOOR = 60.0
DEFAULT_KT_INTERVAL = 3 * 3600.0
BINDING_KINDS = ("dashboard", "web-reference")


def default_http_fetch(url: str) -> bytes:
    import requests

    response = requests.get(url, timeout=FETCH_TIMEOUT, headers={"User-Agent": USER_AGENT})
    response.raise_for_status()
    return response.content


class SnapshotProvider:
    """Turns a source URL into a raster image; implementations must not block forever."""

    name = "abstract"

    def fetch(self, url: str) -> Image.Image:
        raise NotImplementedError


class RemoteImageProvider(SnapshotProvider):
    """Source URL already points at an image; fetch and re-host it."""

    name = "remote-image"

    def __init__(self, http_fetch: Callable[[str], bytes]):
        self._fetch = http_fetch

    def fetch(self, url: str) -> Image.Image:
        return Image.open(io.BytesIO(self._fetch(url))).convert("RGB")


class LocalFileProvider(SnapshotProvider):
    """Reads images from disk; used by tests and intranet deployments."""

    name = "local-file"

    def fetch(self, url: str) -> Image.Image:
        path = url[len("file://") :] if url.startswith("file://") else url
        return Image.open(Path(path)).convert("RGB")


@dataclass
class RefreshOutcome:
    status: str  # "updated" | "unchanged" | "failed" | "skipped"
    reason: Optional[str] = None
    revision: Optional[int] = None


class RefreshEngine:
    def __init__(
        self,
        store: ContentStore,
        clock: Clock,
        http_fetch: Callable[[str], bytes] | None = None,
        providers: dict[str, SnapshotProvider] | None = None,
        interval_floor: float = DEFAULT_INTERVAL_FLOOR,
        max_blur_px: float = 8.0,
    ):
        self.store = store
        self.clock = clock
        self.http_fetch = http_fetch or default_http_fetch
        self.interval_floor = interval_floor
        self.max_blur_px = max_blur_px
        self.providers: dict[str, SnapshotProvider] = providers or {}
        self.providers.setdefault("remote-image", RemoteImageProvider(self.http_fetch))
        self.providers.setdefault("local-file", LocalFileProvider())

    # -- registration ---------------------------------------------------

    def validate_binding(self, binding: dict) -> dict:
        kind = binding.get("type")
        interval = binding.get("interval")
        if not isinstance(interval, (int, float)) or interval < self.interval_floor:
            raise InvalidSpec(f"interval must be at least {self.interval_floor} seconds")
        if kind == "http-json":
            for field in ("url", "path", "template"):
                if not binding.get(field):
                    raise InvalidSpec(f"http-json binding needs {field!r}")
            from .jsonpath import parse_path

            parse_path(binding["path"])
            return {
                "type": "http-json",
                "url": binding["url"],
                "path": binding["path"],
                "template": binding["template"],
                "interval": float(interval),
                "last_refreshed_at": None,
                "last_error": None,
            }
        if kind == "snapshot":
            if not binding.get("url"):
                raise InvalidSpec("snapshot binding needs 'url'")
            provider = binding.get("provider", "remote-image")
            if provider not in self.providers:
                raise InvalidSpec(f"unknown snapshot provider {provider!r}")
            crop = binding.get("crop")
            if crop is not None:
                crop = [int(v) for v in crop]
                if len(crop) != 4 or crop[2] <= 0 or crop[3] <= 0:
                    raise InvalidSpec("crop must be [x, y, width, height]")
            return {
                "type": "snapshot",
                "provider": provider,
                "url": binding["url"],
                "crop": crop,
                "interval": float(interval),
                "last_refreshed_at": None,
                "last_error": None,
            }
        raise InvalidSpec("binding type must be 'http-json' or 'snapshot'")

    def register_binding(self, content_id: str, binding: dict) -> None:
        """Attach (or replace) the content's binding; first refresh is due at once."""
        normalized = self.validate_binding(binding)
        content = self.store.load(content_id)
        if content.kind not in BINDING_KINDS:
            raise Conflict(f"{content.kind} content does not take bindings")

        def apply(meta: dict):
            meta["binding"] = normalized

        self.store.mutate(content_id, apply)

    # -- one refresh ------------------------------------------------------

    def _note_result(self, content_id: str, error: Optional[str]) -> None:
        def apply(meta: dict):
            binding = meta.get("binding")
            if binding is not None:
                binding["last_refreshed_at"] = self.clock.now()
                binding["last_error"] = error

        try:
            self.store.mutate(content_id, apply)
        except NotFound:
            pass

    def _fit_snapshot(self, img: Image.Image, spec: RenderSpec, crop) -> bytes:
        if crop:
            x, y, w, h = crop
            box = (
                max(0, x),
                max(0, y),
                min(img.width, x + w),
                min(img.height, y + h),
            )
            if box[2] <= box[0] or box[3] <= box[1]:
                raise InvalidSpec("crop rectangle lies outside the snapshot")
            img = img.crop(box)
        scale = min(spec.max_width / img.width, spec.max_height / img.height, 1.0)
        if scale < 1.0:
            img = img.resize(
                (max(1, round(img.width * scale)), max(1, round(img.height * scale))),
                Image.Resampling.LANCZOS,
            )
        payload = encode_png(img)
        colors = 256
        while len(payload) > spec.max_file_bytes:
            if colors >= 8:
                payload = encode_png(img.convert("P", palette=Image.Palette.ADAPTIVE, colors=colors))
                colors //= 2
            else:
                img = img.resize((max(1, img.width * 3 // 4), max(1, img.height * 3 // 4)))
                payload = encode_png(img)
                colors = 256
        return payload

    def refresh_once(self, content_id: str, binding: Optional[dict] = None) -> RefreshOutcome:
        try:
            content = self.store.load(content_id)
        except NotFound:
            return RefreshOutcome("skipped", "unknown content")
        if not content.live:
            return RefreshOutcome("skipped", "not live")
        binding = binding if binding is not None else content.binding
        if binding is None:
            return RefreshOutcome("skipped", "no binding")

        try:
            if binding["type"] == "http-json":
                outcome = self._refresh_http_json(content, binding)
            else:
                outcome = self._refresh_snapshot(content, binding)
        except ContentExpired:
            return RefreshOutcome("skipped", "not live")
        except Exception as exc:  # stale-but-available: record, keep serving
            outcome = RefreshOutcome("failed", f"{type(exc).__name__}: {exc}")
        self._note_result(content_id, outcome.reason if outcome.status == "failed" else None)
        return outcome

    def _refresh_http_json(self, content: BoundContent, binding: dict) -> RefreshOutcome:
        raw = self.http_fetch(binding["url"])
        document = json.loads(raw.decode("utf-8"))
        value = format_value(extract(document, binding["path"]))
        text = binding["template"].replace("{value}", value)
        if content.revisions and content.latest.text == text:
            return RefreshOutcome("unchanged")
        assets = render_static(text, content.spec)
        revision = self.store.put_revision(content.content_id, text, assets, origin="refresh")
        return RefreshOutcome("updated", revision=revision)

    def _refresh_snapshot(self, content: BoundContent, binding: dict) -> RefreshOutcome:
        provider = self.providers.get(binding.get("provider", "remote-image"))
        if provider is None:
            return RefreshOutcome("failed", f"unknown provider {binding.get('provider')!r}")
        img = provider.fetch(binding["url"])
        payload = self._fit_snapshot(img, content.spec, binding.get("crop"))
        if content.revisions:
            current = self.store.get_latest_asset(content.content_id, 0)
            if current.payload == payload:
                return RefreshOutcome("unchanged")
        decoded = Image.open(io.BytesIO(payload))
        asset = ImageAsset(
            segment_index=0,
            format=ImageFormat.STATIC,
            width=decoded.width,
            height=decoded.height,
            payload=payload,
        )
        revision = self.store.put_revision(content.content_id, None, [asset], origin="refresh")
        return RefreshOutcome("updated", revision=revision)

    # -- kinetic typography regeneration ---------------------------------

    def refresh_kt(self, content_id: str) -> RefreshOutcome:
        """Re-render the blur animation so it tracks time toward expiry."""
        try:
            content = self.store.load(content_id)
        except NotFound:
            return RefreshOutcome("skipped", "unknown content")
        if not (content.live and content.kt_enabled and content.kind == "self-destruct"):
            return RefreshOutcome("skipped", "not a live blur-animated content")
        text = content.latest.text
        if text is None:
            return RefreshOutcome("skipped", "no source text")
        now = self.clock.now()
        fraction = blur_fraction(
            now=now,
            created_at=content.created_at,
            first_viewed_at=content.view_state.first_viewed_at,
            after_first_view=content.policy.after_first_view,
            absolute_expiry=content.policy.absolute_expiry,
        )

        def note(meta: dict):
            meta["kt_fraction"] = fraction
            meta["kt_refreshed_at"] = now

        try:
            assets = render_blur_segments(text, content.spec, fraction, self.max_blur_px)
            current = self.store.get_latest_asset(content.content_id, 0)
            if current.payload == assets[0].payload:
                self.store.mutate(content_id, note)
                return RefreshOutcome("unchanged")
            revision = self.store.put_revision(content.content_id, text, assets, origin="refresh")
            self.store.mutate(content_id, note)
            return RefreshOutcome("updated", revision=revision)
        except ContentExpired:
            return RefreshOutcome("skipped", "not live")


class Scheduler:
    """Drives periodic refreshes; at most one in-flight job per target."""

    def __init__(
        self,
        engine: RefreshEngine,
        store: ContentStore,
        clock: Clock,
        manager: ContentManager | None = None,
        kt_interval: float = DEFAULT_KT_INTERVAL,
        poll: float = 0.05,
        jitter: float = 0.1,
        max_workers: int = 4,
        seed: int | None = None,
    ):
        self.engine = engine
        self.store = store
        self.clock = clock
        self.manager = manager
        self.kt_interval = kt_interval
        self.poll = poll
        self.jitter = jitter
        self._rng = random.Random(seed)
        self._pool = ThreadPoolExecutor(max_workers=max_workers, thread_name_prefix="refresh")
        self._in_flight: set[tuple[str, str]] = set()
        self._guard = threading.Lock()
        self._factors: dict[tuple[str, str], float] = {}
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def _factor(self, key: tuple[str, str]) -> float:
        return self._factors.setdefault(key, 1.0 + self._rng.uniform(-self.jitter, self.jitter))

    def _dispatch(self, key: tuple[str, str], job: Callable[[], object]) -> None:
        with self._guard:
            if key in self._in_flight:
                return
            self._in_flight.add(key)

        def run():
            try:
                job()
            finally:
                with self._guard:
                    self._in_flight.discard(key)
                    self._factors[key] = 1.0 + self._rng.uniform(-self.jitter, self.jitter)

        self._pool.submit(run)

    def pass_once(self) -> None:
        """One scan: dispatch every due binding and KT regeneration."""
        now = self.clock.now()
        for content_id in self.store.list_ids():
            try:
                content = self.store.load(content_id)
            except NotFound:
                continue
            if not content.live:
                continue
            if content.binding is not None:
                key = (content_id, "binding")
                last = content.binding.get("last_refreshed_at")
                interval = content.binding["interval"] * self._factor(key)
                if last is None or now >= last + interval:
                    self._dispatch(key, lambda cid=content_id: self._run_binding(cid))
            if content.kt_enabled and content.kind == "self-destruct":
                key = (content_id, "kt")
                last = content.kt_refreshed_at
                interval = self.kt_interval * self._factor(key)
                if last is None or now >= last + interval:
                    self._dispatch(key, lambda cid=content_id: self.engine.refresh_kt(cid))

    def _run_binding(self, content_id: str):
        # expiry can strike between scans; apply it rather than refresh a corpse
        if self.manager is not None:
            verdict = self.manager.evaluate(content_id)
            if verdict.expired:
                self.manager.expire_content(content_id, verdict.reason or "expired")
                return RefreshOutcome("skipped", "expired")
        return self.engine.refresh_once(content_id)

    def _loop(self) -> None:
        while not self._stop.is_set():
            self.pass_once()
            self.clock.sleep(self.poll)

    def start(self) -> None:
        if self._thread is not None:
            return
        self._thread = threading.Thread(target=self._loop, name="latebind-scheduler", daemon=True)
        self._thread.start()

    def stop(self, timeout: float = 5.0) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=timeout)
            self._thread = None
        self._pool.shutdown(wait=True, cancel_futures=True)
