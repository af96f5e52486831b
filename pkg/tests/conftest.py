import os
import random

import pytest
from hypothesis import HealthCheck, settings

from tamagawa import localdata

settings.register_profile(
    "default", derandomize=True, deadline=None, max_examples=100, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=1000)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CRITERIA = {
    1: "fixture Tamagawa numbers 121.a2, 121.b1, 20449.c1",
    2: "Kodaira types at the cited primes",
    3: "extremal local factors 15, 21, 17 at 2",
    4: "c(E) factorization shape by isogeny degree",
    5: "Torsion4 at 50 primes with 16p+1 almost prime",
    6: "Torsion5 at 25 primes with p^2-11p-1 almost prime",
    7: "twist types follow the odd-p table (500 cases)",
    8: "every LocalData in the session is admissible",
    9: "isogeny families: j = F_l(t), v_p(j) = -1",
    10: "resultant of the Torsion5 discriminant and c4",
    11: "square-free scan gives c = 1; Torsion4 refused",
    12: "local data invariant under 500 model changes",
}

# every LocalData constructed in this process during the session
SEEN_LOCAL_DATA: list = []
_results: dict[int, list[str]] = {}


def pytest_configure(config):
    localdata.add_observer(SEEN_LOCAL_DATA.append)


def pytest_collection_modifyitems(config, items):
    # the audit of all produced LocalData has to run after everything else
    last = [it for it in items if it.get_closest_marker("criterion") and it.get_closest_marker("criterion").args[0] == 8]
    for it in last:
        items.remove(it)
    items.extend(last)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _results.setdefault(mark.args[0], []).append(rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        outs = _results.get(n)
        if not outs:
            status = "NOT RUN"
        elif all(o == "passed" for o in outs):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"criterion {n:>2}: {status:<7} {CRITERIA[n]}")


@pytest.fixture
def rng():
    return random.Random(20261014)


@pytest.fixture
def seen_local_data():
    return SEEN_LOCAL_DATA
