_OUTCOMES: dict[int, bool] = {}
_TITLES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _TITLES[number] = title
            item.user_properties.append(("criterion", number))


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    if report.when == "call":
        _OUTCOMES.setdefault(number, True)
    if report.failed or (report.when == "call" and report.skipped):
        _OUTCOMES[number] = False


def pytest_terminal_summary(terminalreporter):
    # one line per criterion that actually ran
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        status = "PASS" if _OUTCOMES[number] else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number:2d}: {_TITLES[number]}")
