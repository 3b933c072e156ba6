import sys
from pathlib import Path

import pytest

SRC = Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from latebind.clock import ManualClock, SystemClock  # noqa: E402
from latebind.render import DEFAULT_SPEC, RenderSpec  # noqa: E402
from latebind.server import LatebindService, ServiceConfig  # noqa: E402


@pytest.fixture(scope="session")
def default_spec() -> RenderSpec:
    return DEFAULT_SPEC


@pytest.fixture()
def data_dir(tmp_path) -> Path:
    d = tmp_path / "data"
    d.mkdir()
    return d


class LiveService:
    """A real HTTP server on an ephemeral port plus a requests session."""

    def __init__(self, service: LatebindService, base_url: str):
        import requests

        self.service = service
        self.base_url = base_url
        self.http = requests.Session()

    def url(self, path: str) -> str:
        return f"{self.base_url}{path}"

    def auth(self, token: str) -> dict:
        return {"Authorization": f"Bearer {token}"}


@pytest.fixture()
def service_factory(tmp_path):
    started: list[tuple[LatebindService, object]] = []

    def make(
        manual_clock: bool = False,
        run_scheduler: bool = False,
        http_fetch=None,
        providers=None,
        **config_kw,
    ) -> LiveService:
        index = len(started)
        data = tmp_path / f"svc{index}"
        data.mkdir()
        clock = ManualClock() if manual_clock else SystemClock()
        config = ServiceConfig(data_dir=str(data), bind_port=0, **config_kw)
        service = LatebindService(config, clock=clock, http_fetch=http_fetch, providers=providers)
        host, port = service.start(run_scheduler=run_scheduler)
        config.base_url = f"http://{host}:{port}"
        live = LiveService(service, config.base_url)
        started.append((service, clock))
        return live

    yield make

    for service, clock in started:
        if isinstance(clock, ManualClock):
            clock.close()
        service.stop()
