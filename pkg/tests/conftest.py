from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

_acceptance = []


@pytest.fixture
def data_dir():
    return DATA


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        detail = ""
        for name, text in report.sections:
            if "stdout" in name and text.strip():
                detail = text.strip().splitlines()[-1]
        _acceptance.append((report.nodeid.split("::")[-1], report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _acceptance:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
