import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from rearrange.diagram import make_diagram  # noqa: E402
from rearrange.system import builtin, parse_address  # noqa: E402

X_TEXT = """domain
  t.1.1
  t.1.2
  t.2
range
  t.1
  t.2.1
  t.2.2
sigma
  t.1.1 -> t.1
  t.1.2 -> t.2.1
  t.2 -> t.2.2
"""

R_TEXT = """domain
  t.1
  t.2
range
  t.1
  t.2
sigma
  t.1 -> t.2
  t.2 -> t.1
"""


def A(text):
    return parse_address(text)


def x_element(sys):
    return make_diagram(
        sys,
        [A("t.1.1"), A("t.1.2"), A("t.2")],
        [A("t.1"), A("t.2.1"), A("t.2.2")],
        {A("t.1.1"): A("t.1"), A("t.1.2"): A("t.2.1"), A("t.2"): A("t.2.2")},
    )


def r_element(sys):
    return make_diagram(sys, [A("t.1"), A("t.2")], [A("t.1"), A("t.2")], {A("t.1"): A("t.2"), A("t.2"): A("t.1")})


@pytest.fixture
def circle():
    return builtin("circle_T")


@pytest.fixture
def x(circle):
    return x_element(circle)


@pytest.fixture
def r(circle):
    return r_element(circle)


# --- one PASS/FAIL line per acceptance criterion -----------------------------------------

_criteria: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    num, title = mark.args
    ok, _ = _criteria.get(num, (True, title))
    _criteria[num] = (ok and not rep.failed, title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        ok, title = _criteria[num]
        terminalreporter.write_line(f"criterion {num:>2} {title}: {'PASS' if ok else 'FAIL'}")
