import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# acceptance criteria append (label, passed, detail) here; printed at the end of the run
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


@pytest.fixture
def acceptance_log():
    def log(label: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append((label, passed, detail))
        print(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")

    return log


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")
