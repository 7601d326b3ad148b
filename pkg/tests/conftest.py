"""Collects acceptance outcomes and prints one line per criterion."""

import time

import pytest

CRITERIA = {
    1: "simply supported beam frequencies <= 1e-8, runtime <= 2 s",
    2: "fixed-fixed beam frequencies <= 1e-8, runtime <= 2 s",
    3: "fixed-free beam frequencies <= 1e-7, runtime <= 2 s",
    4: "rigid-wall cavity frequencies <= 1e-6, runtime <= 3 s",
    5: "mode shapes <= 1e-5 (1D), <= 1e-4 (2D)",
    6: "property suite, whole test session < 60 s",
    7: "bench frequencies.csv byte-identical across runs",
}

_outcomes: dict[int, list[tuple[str, bool]]] = {}
_start = time.perf_counter()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _outcomes.setdefault(marker.args[0], []).append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    elapsed = time.perf_counter() - _start
    terminalreporter.section("acceptance criteria")
    for number, title in CRITERIA.items():
        results = _outcomes.get(number)
        if results is None:
            terminalreporter.write_line(f"criterion {number}: NOT RUN  {title}")
            continue
        failed = [name for name, ok in results if not ok]
        if number == 6 and elapsed >= 60.0:
            failed.append(f"session took {elapsed:.1f} s")
        status = "PASS" if not failed else "FAIL"
        detail = f" ({', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {number}: {status}  {title}{detail}")
    terminalreporter.write_line(f"session wall clock: {elapsed:.1f} s")
