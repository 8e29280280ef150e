import numpy as np
import pytest

from dptcrane import ActuationVariant, CraneParams, analytic_linearization

UNDER = ActuationVariant.UNDERACTUATED
FULL = ActuationVariant.FULLY_ACTUATED


@pytest.fixture
def params():
    return CraneParams()


@pytest.fixture(params=[UNDER, FULL], ids=["under", "full"])
def variant(request):
    return request.param


@pytest.fixture
def model(params, variant):
    return analytic_linearization(params, variant)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# --- acceptance reporting ---------------------------------------------------
# Tests marked ``@pytest.mark.criterion(n)`` get one PASS/FAIL line each in the
# terminal summary, with any ``detail`` user property appended.

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    detail = "; ".join(v for k, v in item.user_properties if k == "detail")
    _criteria[mark.args[0]] = ("PASS" if rep.passed else "FAIL", item.name, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, name, detail = _criteria[n]
        terminalreporter.write_line(f"{status} criterion {n:>2} {name}: {detail}")
