import contextlib

import pytest

_RESULTS = {}


class _Record:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.detail = ""


@pytest.fixture
def criterion():
    """Context manager that records one acceptance criterion's verdict."""

    @contextlib.contextmanager
    def run(number, title):
        rec = _Record(number, title)
        try:
            yield rec
        except BaseException as exc:
            reason = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            _RESULTS[number] = ("FAIL", title, rec.detail or reason)
            print(f"criterion {number}: FAIL  {title}  {rec.detail or reason}")
            raise
        _RESULTS[number] = ("PASS", title, rec.detail)
        print(f"criterion {number}: PASS  {title}  {rec.detail}")

    return run


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        verdict, title, detail = _RESULTS[number]
        terminalreporter.write_line(f"[{verdict}] {number:>2}. {title}: {detail}")
