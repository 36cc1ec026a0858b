import pytest

# filled by test_acceptance; one entry per criterion: (title, passed, gate rows)
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, passed, rows = ACCEPTANCE[k]
        tr.write_line(f"criterion {k:2d} {title:<34s} {'PASS' if passed else 'FAIL'}")
        for row in rows:
            tr.write_line(f"    {row}")


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE
