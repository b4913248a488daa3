import hypothesis
import pytest

hypothesis.settings.register_profile("default", deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record a PASS/FAIL line for an acceptance criterion.

    Usage: ``with criterion("C1 golden trace"): ...``.  Lines are printed in
    the terminal summary.
    """

    class _Recorder:
        def __init__(self, name):
            self.name = name

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            status = "PASS" if exc_type is None else "FAIL"
            detail = "" if exc is None else f"  ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
            ACCEPTANCE_LINES.append(f"{status}  {self.name}{detail}")
            return False

    return _Recorder


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
