import pytest

from nvmwear import make_layout

# Lines recorded by the acceptance suite; printed after the run so each
# criterion shows one PASS/FAIL line even under captured output.
_ACCEPTANCE_LINES = []


def record_acceptance(line: str):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def layout():
    # text 2 / data 8 / bss 4 / stack 4 pages, shadow gap below the stack
    return make_layout()


@pytest.fixture
def big_layout():
    return make_layout(text_pages=4, data_pages=40, bss_pages=8,
                       stack_pages=12)
