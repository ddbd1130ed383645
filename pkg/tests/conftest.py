import pytest

_ACCEPTANCE: dict[str, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    measured = "; ".join(str(v) for k, v in item.user_properties if k == "measured")
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _ACCEPTANCE[number] = ("PASS" if rep.passed else "FAIL", title, measured)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE, key=int):
        status, title, measured = _ACCEPTANCE[number]
        line = f"{status} criterion {number}: {title}"
        if measured:
            line += f" [{measured}]"
        terminalreporter.write_line(line)
