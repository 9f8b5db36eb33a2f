import pytest

# criterion number -> (name, passed, detail), filled by the acceptance tests
ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance():
    def report(num: int, name: str, passed: bool, detail: str):
        ACCEPTANCE[num] = (name, bool(passed), detail)
        print(f"criterion {num} {name}: {'PASS' if passed else 'FAIL'} ({detail})")
        assert passed, detail

    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        name, passed, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d} {name}: {'PASS' if passed else 'FAIL'} ({detail})")
