import pytest

from worldline.elimination import eliminants
from worldline.parser import make_system, parse_poly

NINE_F1 = "-2*x^3 + y^3 + t*x + t*y + y + 2"
NINE_F2 = "-x^3 - 2*x^2*y + t + 3"

SIX_RAW_F1 = ("(3*x^3 + 7*y^3 + 6*t^3 - 2*x^2*y + 5*x*y^2 + 7*t^2*x - 4*t^2*y + 6*t*x^2 - 5*t*y^2 - 9*x*y*t)"
              " + (-x^2 - 3*y^2 - 9*t^2 - x*y - 10*t*x - 11*t*y) + (3*x + 2*y - 13*t) - 8")
SIX_RAW_F2 = "(7*x^2 - 12*y^2 - 4*t^2 + 17*x*y + 5*t*x - 11*t*y) + (19*x + 21*y + 3*t) + 1"
SIX_F1 = ("(3*x^3 - 2*x^2*y + 5*x*y^2 + 7*y^3) + (6*t - 1)*x^2 - (9*t + 1)*x*y - (5*t + 3)*y^2"
          " + (7*t^2 - 10*t + 3)*x - (4*t^2 + 11*t - 2)*y + (6*t^3 - 9*t^2 - 13*t - 8)")
SIX_F2 = "(7*x^2 + 17*x*y - 12*y^2) + (5*t + 19)*x - (11*t - 21)*y - (4*t^2 - 3*t - 1)"

# printed eliminants of the nine-root example
NINE_P = ("-17*x^9 + (4*t - 4)*x^7 + (3*t + 25)*x^6 + (4*t^2 + 16*t + 12)*x^4"
          " + (-3*t^2 - 18*t - 27)*x^3 + t^3 + 9*t^2 + 27*t + 27")
NINE_Q = ("17*y^9 + (33*t + 35)*y^7 + (-6*t + 52)*y^6 + (15*t^2 + 34*t + 19)*y^5"
          " + (-16*t^2 + 8*t + 40)*y^4 + (-t^3 + 11*t^2 + 49*t + 113)*y^3"
          " + (-18*t^3 - 72*t^2 - 50*t - 12)*y^2 + (28*t^3 + 148*t^2 + 208*t + 48)*y"
          " + t^4 - 48*t^2 - 5*t^3 - 96*t - 64")


@pytest.fixture(scope="session")
def nine():
    return make_system(parse_poly(NINE_F1), parse_poly(NINE_F2))


@pytest.fixture(scope="session")
def six():
    return make_system(parse_poly(SIX_F1), parse_poly(SIX_F2))


@pytest.fixture(scope="session")
def linear():
    return make_system(parse_poly("x - t"), parse_poly("y - 2*t"))


@pytest.fixture(scope="session")
def nine_elims(nine):
    return eliminants(nine)


@pytest.fixture(scope="session")
def six_elims(six):
    return eliminants(six)


@pytest.fixture(scope="session")
def nine_traj(nine, nine_elims):
    from worldline.dynamics import make_grid, track
    return track(nine, make_grid(-5, 1, 200), nine_elims)


@pytest.fixture(scope="session")
def six_traj(six, six_elims):
    from worldline.dynamics import make_grid, track
    return track(six, make_grid(3, 6, 200), six_elims)


# one pass/fail line per acceptance criterion, printed after the run ----------

_CRITERIA: dict[int, list[str]] = {}
_DETAILS: dict[int, list[str]] = {}


def pytest_runtest_logreport(report):
    marker = "test_acceptance.py::test_criterion_"
    if marker not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number = int(report.nodeid.split(marker)[1].split("_")[0])
        outcome = "skipped" if report.skipped else report.outcome
        _CRITERIA.setdefault(number, []).append(outcome)
        for line in report.capstdout.splitlines():
            if line.startswith(f"criterion {number}: "):
                _DETAILS.setdefault(number, []).append(line.split(": ", 1)[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        outcomes = _CRITERIA[number]
        verdict = "PASS" if all(o == "passed" for o in outcomes) else \
            "SKIP" if all(o == "skipped" for o in outcomes) else "FAIL"
        detail = "; ".join(_DETAILS.get(number, [])) or f"{len(outcomes)} checks"
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {detail}")
