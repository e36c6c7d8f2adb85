from __future__ import annotations

import functools
import shutil
import threading
import time
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

FIXTURES = Path(__file__).parent / "fixtures"
SUITE_BUDGET_S = 30.0

settings.register_profile(
    "agora",
    max_examples=200,
    deadline=None,
    database=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("agora")

# criterion id -> (description, passed, detail); filled by tests/test_acceptance.py
CRITERIA: dict[str, list] = {}
_session_start = time.perf_counter()


def record(cid: str, description: str, passed: bool, detail: str = "") -> None:
    CRITERIA[cid] = [description, passed, detail]


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


class _QuietHandler(SimpleHTTPRequestHandler):
    def log_message(self, format, *args):  # noqa: A002
        pass


@pytest.fixture(scope="session")
def remote_server():
    """Serve tests/fixtures/remote on an ephemeral localhost port."""
    handler = functools.partial(_QuietHandler, directory=str(FIXTURES / "remote"))
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}/"
    server.shutdown()
    server.server_close()


@pytest.fixture
def showcase_project(tmp_path: Path, remote_server: str) -> Path:
    """A fresh copy of the showcase project with its remote prefix bound to the test server."""
    root = tmp_path / "showcase"
    shutil.copytree(FIXTURES / "showcase", root)
    template = (root / "agora.conf.in").read_text(encoding="utf-8")
    (root / "agora.conf").write_text(template.replace("{remote}", remote_server), encoding="utf-8")
    (root / "agora.conf.in").unlink()
    return root


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA:
        return
    elapsed = time.perf_counter() - _session_start
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(CRITERIA):
        description, passed, detail = CRITERIA[cid]
        if cid == "C5":
            ok_time = elapsed < SUITE_BUDGET_S
            passed = passed and ok_time
            detail = f"{detail}; full suite {elapsed:.1f}s (< {SUITE_BUDGET_S:.0f}s {'ok' if ok_time else 'EXCEEDED'})"
        tr.write_line(f"[{'PASS' if passed else 'FAIL'}] {cid} {description} :: {detail}")
