from __future__ import annotations

from dataclasses import dataclass

import pytest

from rifs.presets import larsson_system, system_a, system_b
from rifs.spectral import build_operator
from rifs.transforms import difference_system
from rifs.typespace import build_pretype, build_strips, epsilon_main, type_space


@dataclass
class Setup:
    h: object
    strips: object
    pretype: object
    eps_main: object
    ts: object


def make_setup(h, eps=None) -> Setup:
    strips = build_strips(h)
    pretype = build_pretype(strips)
    em = epsilon_main(strips, pretype)
    ts = type_space(strips, pretype, em.eps_main / 2 if eps is None else eps, em)
    return Setup(h, strips, pretype, em, ts)


@pytest.fixture(scope="session")
def setup_a() -> Setup:
    return make_setup(system_a())


@pytest.fixture(scope="session")
def setup_b() -> Setup:
    return make_setup(system_b())


@pytest.fixture(scope="session")
def larsson_diff():
    return difference_system(larsson_system("3/10", "1/25", "rational"))


@pytest.fixture(scope="session")
def setup_diff(larsson_diff) -> Setup:
    return make_setup(larsson_diff)


@pytest.fixture(scope="session")
def operator_a(setup_a):
    return build_operator(setup_a.h, setup_a.ts, 256)


# ---------------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per criterion
# ---------------------------------------------------------------------------

_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    mark = getattr(report, "_criterion", None)
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _CRITERIA[mark[0]] = (mark[1], "PASS" if report.passed else "FAIL", detail)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result()._criterion = mark.args


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        title, verdict, detail = _CRITERIA[k]
        line = f"criterion {k:2d} {verdict}: {title}"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))
