import pytest

from ratiogroup.family import normalize_family


@pytest.fixture(scope="session")
def trivial_family():
    return normalize_family(3, 1, 5, 2)


@pytest.fixture(scope="session")
def torsion_family():
    return normalize_family(5, 1, 5, -1)


@pytest.fixture(scope="session")
def telescoping_family():
    return normalize_family(1, 1, 1, 2)


_ACCEPTANCE: dict[str, list[bool]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::test_criterion_", 1)[1].split("[")[0]
    _ACCEPTANCE.setdefault(name, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split("_", 1)[0])):
        num, _, label = name.partition("_")
        status = "PASS" if all(_ACCEPTANCE[name]) else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {status}  ({label.replace('_', ' ')})")
