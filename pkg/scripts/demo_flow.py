#!/usr/bin/env python3
"""Walk every late-binding feature against a throwaway local server.

Starts the service on an ephemeral port with a compressed clock, then runs:
self-destruct by view limit, continuous editing with revocation on open,
a dashboard fed by an embedded mock JSON endpoint, and a blur animation.
Sample images land in ./demo-out/.

Usage: python scripts/demo_flow.py
"""

import json
import sys
import tempfile
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import requests  # noqa: E402

from latebind.server import LatebindService, ServiceConfig  # noqa: E402

OUT = Path("demo-out")


def start_mock_source(state: dict) -> str:
    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):
            body = json.dumps(state["payload"]).encode()
            self.send_response(200)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *a):
            pass

    httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    threading.Thread(target=httpd.serve_forever, daemon=True).start()
    return f"http://127.0.0.1:{httpd.server_address[1]}/report"


def save(name: str, payload: bytes) -> None:
    OUT.mkdir(exist_ok=True)
    (OUT / name).write_bytes(payload)
    print(f"   wrote demo-out/{name} ({len(payload)} bytes)")


def main() -> int:
    data_dir = tempfile.mkdtemp(prefix="latebind-demo-")
    config = ServiceConfig(data_dir=data_dir, bind_port=0, interval_floor=1.0,
                           scheduler_poll=0.05)
    service = LatebindService(config)
    host, port = service.start()
    base = f"http://{host}:{port}"
    config.base_url = base
    http = requests.Session()
    print(f"service on {base} (data in {data_dir})\n")

    try:
        print("1. self-destructing card number, max_views=1")
        made = http.post(f"{base}/api/contents", json={
            "kind": "self-destruct",
            "text": "card: 4111 1111 1111 1111",
            "policy": {"max_views": 1},
        }).json()
        url = made["image_urls"][0]
        save("secret_view1.png", http.get(url).content)
        save("secret_view2_notification.png", http.get(url).content)

        print("\n2. continuous editing: typo fix, then recipient opens")
        made = http.post(f"{base}/api/contents",
                         json={"kind": "continuous-edit", "text": "Hi Jhon!"}).json()
        cid, token = made["content_id"], made["edit_token"]
        auth = {"Authorization": f"Bearer {token}"}
        http.patch(f"{base}/api/contents/{cid}", json={"text": "Hi John!"}, headers=auth)
        save("typo_fixed.png", http.get(made["image_urls"][0], headers=auth).content)
        http.get(made["image_urls"][0])  # recipient opens
        denied = http.patch(f"{base}/api/contents/{cid}", json={"text": "x"}, headers=auth)
        print(f"   edit after open -> {denied.status_code} {denied.json().get('reason')}")

        print("\n3. dashboard bound to a mock electricity endpoint")
        state = {"payload": {"kwh": 23}}
        source_url = start_mock_source(state)
        made = http.post(f"{base}/api/contents", json={
            "kind": "dashboard",
            "binding": {"type": "http-json", "url": source_url, "path": "kwh",
                        "template": "This week: {value} kWh", "interval": 1.0},
        }).json()
        time.sleep(1.5)
        save("dashboard_23.png", http.get(made["image_urls"][0]).content)
        state["payload"] = {"kwh": 31}
        time.sleep(2.5)
        save("dashboard_31.png", http.get(made["image_urls"][0]).content)

        print("\n4. kinetic typography: blur animation for an expiring secret")
        made = http.post(f"{base}/api/contents", json={
            "kind": "self-destruct",
            "text": "gone in three days",
            "policy": {"after_first_view": 3 * 86400.0},
            "kt_enabled": True,
        }).json()
        save("expiring_blur.gif", http.get(made["image_urls"][0]).content)

        print("\nall four features exercised; open demo-out/ to inspect the images")
        return 0
    finally:
        service.stop()


if __name__ == "__main__":
    raise SystemExit(main())
