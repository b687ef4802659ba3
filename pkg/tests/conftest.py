import httpx
import numpy as np
import pytest


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Any real socket use through httpx fails; MockTransport is unaffected."""

    def refuse(self, request):
        raise AssertionError(f"unexpected network access to {request.url}")

    monkeypatch.setattr(httpx.HTTPTransport, "handle_request", refuse)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _refuse(self, request):
    raise AssertionError(f"unexpected network access to {request.url}")


@pytest.fixture(scope="session")
def offline_run(tmp_path_factory):
    """One full offline pipeline run on the bundled config, shared across tests."""
    from adkg.cli import main

    out = tmp_path_factory.mktemp("offline") / "out"
    with pytest.MonkeyPatch.context() as mp:
        mp.setattr(httpx.HTTPTransport, "handle_request", _refuse)
        code = main(["all", "--offline", "--out", str(out)])
    assert code == 0
    return out
