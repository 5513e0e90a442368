import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _results.setdefault(number, {"title": title, "ok": True, "seconds": 0.0, "details": []})
    entry["seconds"] += report.duration
    if report.failed or (report.when == "call" and report.skipped):
        entry["ok"] = False
    if report.when == "call":
        entry["details"] += [str(v) for k, v in item.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        entry = _results[number]
        status = "PASS" if entry["ok"] else "FAIL"
        details = "; ".join(entry["details"])
        line = f"criterion {number:>2}: {status}  {entry['title']} ({entry['seconds']:.1f} s)"
        terminalreporter.write_line(line + (f"  [{details}]" if details else ""))
