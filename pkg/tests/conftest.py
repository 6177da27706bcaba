"""Per-criterion bookkeeping for the acceptance suite."""

from collections import defaultdict

_RESULTS = defaultdict(lambda: {"title": "", "budget": None, "outcomes": [], "seconds": 0.0})


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        number = mark.args[0]
        _RESULTS[number]["title"] = mark.args[1]
        _RESULTS[number]["budget"] = mark.kwargs.get("budget")
        item.user_properties.append(("criterion", number))


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    entry = _RESULTS[number]
    entry["seconds"] += report.duration
    if report.when == "call" or report.outcome != "passed":
        entry["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    ran = {k: v for k, v in _RESULTS.items() if v["outcomes"]}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ran):
        entry = ran[number]
        ok = all(o == "passed" for o in entry["outcomes"])
        timing = f"{entry['seconds']:.1f}s"
        if entry["budget"] is not None:
            ok &= entry["seconds"] < entry["budget"]
            timing += f" of {entry['budget']}s"
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status} {entry['title']} ({timing})")
