import os
import sys

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from pma.core import Instance  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=150, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def instances(draw, max_period=24, max_tau=4, max_n=6, tau=None, divisible=False):
    t = draw(st.integers(1, max_tau)) if tau is None else tau
    if divisible:
        m = draw(st.integers(1, max(1, max_period // t)))
        P = m * t
    else:
        P = draw(st.integers(t, max(t, max_period)))
    n = draw(st.integers(0, max_n))
    delays = draw(st.lists(st.integers(0, P - 1), min_size=n, max_size=n))
    return Instance(P, t, tuple(delays))


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
CRITERIA: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str = "") -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}" + (f"  {detail}" if detail else "")
    CRITERIA[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
