from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_criteria: dict[int, str] = {}


def pytest_runtest_logreport(report):
    # acceptance tests attach ("criterion", (n, title)); collect a PASS/FAIL line per criterion
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for key, value in report.user_properties:
        if key == "criterion":
            n, title = value
            _criteria[n] = f"criterion {n:2d} {'PASS' if report.passed else 'FAIL'}  {title}"


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_criteria):
            terminalreporter.write_line(_criteria[n])
