import importlib.util
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]

_spec = importlib.util.spec_from_file_location("make_audio_fixture", ROOT / "tools" / "make_audio_fixture.py")
make_audio_fixture = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(make_audio_fixture)

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def chord_wav(tmp_path_factory):
    path = tmp_path_factory.mktemp("audio") / "chord.wav"
    return make_audio_fixture.write_chord_wav(path)


@pytest.fixture
def report():
    """Record one acceptance-criterion line: report(cid, passed, detail)."""

    def _record(cid, passed, detail):
        _ACCEPTANCE.append((cid, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {cid}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {cid}: {detail}")
