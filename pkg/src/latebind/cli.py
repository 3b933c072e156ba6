"""Headless sender tooling: run the server, bind content, edit, inspect, destroy.

Exit codes are stable for scripting: 0 success, 1 denied/unknown, 2 bad
usage or configuration, 3 marker not found in --html mode, 4 content expired.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import signal
import sys
import time
from pathlib import Path

EXIT_OK = 0
EXIT_DENIED = 1
EXIT_USAGE = 2
EXIT_NO_MARKER = 3
EXIT_EXPIRED = 4

DEFAULT_URL = "http://127.0.0.1:8787"

_DURATION_RE = re.compile(r"^(\d+(?:\.\d+)?)\s*(s|m|h|d)?$")
_UNIT_SECONDS = {"s": 1.0, "m": 60.0, "h": 3600.0, "d": 86400.0, None: 1.0}


def parse_duration(text: str) -> float:
    m = _DURATION_RE.match(text.strip())
    if not m:
        raise ValueError(f"cannot parse duration {text!r} (try 45s, 30m, 12h, 3d)")
    return float(m.group(1)) * _UNIT_SECONDS[m.group(2)]


def _fail(message: str, code: int) -> int:
    print(f"latebind: {message}", file=sys.stderr)
    return code


def _diag(message: str) -> None:
    print(message, file=sys.stderr)


# -- serve ---------------------------------------------------------------


def cmd_serve(args) -> int:
    from .server import LatebindService, ServiceConfig

    if "://" not in args.bind and ":" in args.bind:
        host, _, port_text = args.bind.rpartition(":")
    else:
        host, port_text = args.bind, "8787"
    try:
        port = int(port_text)
    except ValueError:
        return _fail(f"bad --bind address {args.bind!r}", EXIT_USAGE)
    if not re.match(r"^https?://", args.base_url):
        return _fail(f"--base-url must be an http(s) URL, got {args.base_url!r}", EXIT_USAGE)

    data_dir = Path(args.data)
    data_dir.mkdir(parents=True, exist_ok=True)

    config = ServiceConfig(
        data_dir=str(data_dir),
        base_url=args.base_url.rstrip("/"),
        bind_host=host,
        bind_port=port,
        font_path=args.font,
        max_blur_px=args.r_max,
        kt_interval=parse_duration(args.kt_interval),
        revision_cap=args.revision_cap,
        interval_floor=args.interval_floor,
        ui_dir=args.ui_dir,
    )
    service = LatebindService(config)
    bound_host, bound_port = service.start(run_scheduler=True)
    if config.base_url.endswith(":0"):
        # ephemeral-port convenience: --base-url http://127.0.0.1:0 tracks the bind
        config.base_url = config.base_url[: -len(":0")] + f":{bound_port}"
    print(f"listening on http://{bound_host}:{bound_port}")
    print(f"base-url {config.base_url}")
    print(f"data {config.data_dir}")
    print(f"kt-interval {config.kt_interval}s  r-max {config.max_blur_px}px  "
          f"revision-cap {config.revision_cap}  interval-floor {config.interval_floor}s")
    if config.ui_dir:
        print(f"ui {config.ui_dir}")
    sys.stdout.flush()

    stop = {"flag": False}

    def on_signal(signum, frame):
        stop["flag"] = True

    signal.signal(signal.SIGINT, on_signal)
    signal.signal(signal.SIGTERM, on_signal)
    try:
        while not stop["flag"]:
            time.sleep(0.2)
    except KeyboardInterrupt:
        pass
    finally:
        service.stop()
    return EXIT_OK


# -- client plumbing -------------------------------------------------------


def _client(args):
    import requests

    base = (args.url or os.environ.get("LATEBIND_URL") or DEFAULT_URL).rstrip("/")
    return requests.Session(), base


def _token_of(args) -> str | None:
    return getattr(args, "token", None) or os.environ.get("LATEBIND_TOKEN")


def _auth(args) -> dict:
    token = _token_of(args)
    return {"Authorization": f"Bearer {token}"} if token else {}


def _report_http_error(response) -> int:
    try:
        message = response.json()
    except ValueError:
        message = {"error": response.text}
    reason = message.get("reason") or message.get("error") or "request failed"
    _diag(f"latebind: {response.status_code}: {reason}")
    if response.status_code == 410:
        return EXIT_EXPIRED
    if response.status_code in (401, 403, 404):
        return EXIT_DENIED
    return EXIT_DENIED


# -- bind -------------------------------------------------------------------


def _policy_from(args) -> dict:
    policy: dict = {}
    if args.expire_at is not None:
        policy["absolute_expiry"] = args.expire_at
    if args.expire_after_first_view is not None:
        policy["after_first_view"] = parse_duration(args.expire_after_first_view)
    if args.max_views is not None:
        policy["max_views"] = args.max_views
    return policy


def _binding_from(args) -> dict | None:
    if args.source_url:
        return {
            "type": "http-json",
            "url": args.source_url,
            "path": args.json_path,
            "template": args.template,
            "interval": parse_duration(args.interval),
        }
    if args.snapshot_url:
        binding = {
            "type": "snapshot",
            "url": args.snapshot_url,
            "provider": args.provider,
            "interval": parse_duration(args.interval),
        }
        if args.crop:
            try:
                binding["crop"] = [int(v) for v in args.crop.split(",")]
            except ValueError:
                raise ValueError(f"--crop must be x,y,w,h, got {args.crop!r}")
        return binding
    return None


def _create_content(http, base, args, text: str | None, binding: dict | None) -> dict:
    body = {
        "kind": args.kind,
        "kt_enabled": args.kt,
        "policy": _policy_from(args),
        "include_alt": args.include_alt,
    }
    if args.alt_text is not None:
        body["alt_text"] = args.alt_text
    if text is not None:
        body["text"] = text
    if binding is not None:
        body["binding"] = binding
    response = http.post(f"{base}/api/contents", json=body)
    if response.status_code != 201:
        raise _HttpFailure(response)
    made = response.json()
    _diag(f"content: {made['content_id']}")
    _diag(f"token: {made['edit_token']}")
    return made


class _HttpFailure(Exception):
    def __init__(self, response):
        self.response = response


def cmd_bind(args) -> int:
    http, base = _client(args)
    try:
        binding = _binding_from(args)
    except ValueError as exc:
        return _fail(str(exc), EXIT_USAGE)

    if args.kind in ("dashboard", "web-reference") and binding is None:
        return _fail(f"kind {args.kind} needs --source-url or --snapshot-url", EXIT_USAGE)
    if args.kind not in ("dashboard", "web-reference") and args.text is None and args.html is None:
        return _fail("need --text or --html", EXIT_USAGE)

    try:
        if args.html is not None:
            return _bind_html(http, base, args, binding)
        if args.auto_scrub and args.text is not None:
            return _bind_scrubbed(http, base, args, args.text)
        made = _create_content(http, base, args, args.text, binding)
        print(made["html_snippet"])
        return EXIT_OK
    except _HttpFailure as failure:
        return _report_http_error(failure.response)


def _bind_scrubbed(http, base, args, text: str) -> int:
    from .scrub import detect

    spans = detect(text)
    if not spans:
        _diag("latebind: no sensitive spans detected; nothing bound")
        print(text)
        return EXIT_OK
    pieces = []
    cursor = 0
    for span in spans:
        made = _create_content(http, base, args, span.matched_text, None)
        pieces.append(text[cursor : span.start])
        pieces.append(made["html_snippet"])
        cursor = span.end
    pieces.append(text[cursor:])
    print("".join(pieces))
    return EXIT_OK


def _bind_html(http, base, args, binding) -> int:
    source_path = Path(args.html)
    if not source_path.is_file():
        return _fail(f"no such file {source_path}", EXIT_USAGE)
    marker = args.select
    html_text = source_path.read_text("utf-8")
    pattern = re.compile(
        rf"<!--{re.escape(marker)}-->(.*?)<!--/{re.escape(marker)}-->", re.DOTALL
    )
    match = pattern.search(html_text)
    if match is None:
        return _fail(f"marker <!--{marker}--> not found in {source_path}", EXIT_NO_MARKER)

    region = match.group(1)
    if args.auto_scrub:
        from .scrub import detect

        spans = detect(region)
        replacement_parts = []
        cursor = 0
        for span in spans:
            made = _create_content(http, base, args, span.matched_text, None)
            replacement_parts.append(region[cursor : span.start])
            replacement_parts.append(made["html_snippet"])
            cursor = span.end
        replacement_parts.append(region[cursor:])
        replacement = "".join(replacement_parts)
    else:
        made = _create_content(http, base, args, region, binding)
        replacement = made["html_snippet"]

    output = html_text[: match.start()] + replacement + html_text[match.end() :]
    out_path = source_path.with_name(source_path.stem + ".latebound" + source_path.suffix)
    out_path.write_text(output, "utf-8")
    print(out_path)
    return EXIT_OK


# -- edit / status / destroy -------------------------------------------------


def cmd_edit(args) -> int:
    http, base = _client(args)
    response = http.patch(
        f"{base}/api/contents/{args.content_id}", json={"text": args.text}, headers=_auth(args)
    )
    if response.status_code != 200:
        return _report_http_error(response)
    body = response.json()
    _diag(f"revision: {body['revision']}")
    print(body["html_snippet"])
    return EXIT_OK


def cmd_status(args) -> int:
    http, base = _client(args)
    response = http.get(f"{base}/api/contents/{args.content_id}", headers=_auth(args))
    if response.status_code != 200:
        return _report_http_error(response)
    print(json.dumps(response.json(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_destroy(args) -> int:
    http, base = _client(args)
    response = http.delete(f"{base}/api/contents/{args.content_id}", headers=_auth(args))
    if response.status_code != 200:
        return _report_http_error(response)
    _diag("destroyed")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latebind",
        description="Create and manage late-bound email content.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service and refresh scheduler")
    serve.add_argument("--bind", default=os.environ.get("LATEBIND_BIND", "127.0.0.1:8787"))
    serve.add_argument("--data", default=os.environ.get("LATEBIND_DATA", "./latebind-data"))
    serve.add_argument("--base-url", default=os.environ.get("LATEBIND_BASE_URL", "http://127.0.0.1:8787"))
    serve.add_argument("--font", default=os.environ.get("LATEBIND_FONT"))
    serve.add_argument("--r-max", type=float, default=8.0, help="max blur radius in px")
    serve.add_argument("--kt-interval", default="3h", help="animation regeneration interval")
    serve.add_argument("--revision-cap", type=int, default=20)
    serve.add_argument("--interval-floor", type=float, default=60.0)
    serve.add_argument("--ui-dir", default=os.environ.get("LATEBIND_UI_DIR"))
    serve.set_defaults(fn=cmd_serve)

    bind = sub.add_parser("bind", help="convert text into late-bound content")
    bind.add_argument("--url", default=None, help="server base URL (or LATEBIND_URL)")
    bind.add_argument("--kind", default="static",
                      choices=["static", "self-destruct", "continuous-edit", "dashboard", "web-reference"])
    source = bind.add_mutually_exclusive_group()
    source.add_argument("--text")
    source.add_argument("--html", help="HTML file with <!--marker-->...<!--/marker--> region")
    bind.add_argument("--select", default="lb", help="marker name inside --html")
    bind.add_argument("--expire-at", type=float, default=None, help="absolute expiry (unix seconds)")
    bind.add_argument("--expire-after-first-view", default=None, metavar="DURATION")
    bind.add_argument("--max-views", type=int, default=None)
    bind.add_argument("--kt", action="store_true", help="animated rendering")
    bind.add_argument("--auto-scrub", action="store_true",
                      help="bind each detected sensitive span separately")
    bind.add_argument("--include-alt", action="store_true")
    bind.add_argument("--alt-text", default=None)
    bind.add_argument("--source-url", default=None, help="JSON endpoint for dashboards")
    bind.add_argument("--json-path", default=None)
    bind.add_argument("--template", default="{value}")
    bind.add_argument("--interval", default="1h")
    bind.add_argument("--snapshot-url", default=None, help="image/page source for web references")
    bind.add_argument("--provider", default="remote-image")
    bind.add_argument("--crop", default=None, metavar="X,Y,W,H")
    bind.set_defaults(fn=cmd_bind)

    edit = sub.add_parser("edit", help="replace the text of live content")
    edit.add_argument("content_id")
    edit.add_argument("--token", default=None)
    edit.add_argument("--text", required=True)
    edit.add_argument("--url", default=None)
    edit.set_defaults(fn=cmd_edit)

    status = sub.add_parser("status", help="view counts, policy, and expiry verdict")
    status.add_argument("content_id")
    status.add_argument("--token", default=None)
    status.add_argument("--url", default=None)
    status.set_defaults(fn=cmd_status)

    destroy = sub.add_parser("destroy", help="replace content with a removal notice")
    destroy.add_argument("content_id")
    destroy.add_argument("--token", default=None)
    destroy.add_argument("--url", default=None)
    destroy.set_defaults(fn=cmd_destroy)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        return _fail(str(exc), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
