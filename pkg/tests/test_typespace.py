from fractions import Fraction as F

import pytest

from rifs.core import RATIONAL, to_float_spec, uniform_system
from rifs.errors import EpsTooLarge, NotInTypeSpace, OutOfDomain
from rifs.intervals import Interval, IntervalUnion
from rifs.presets import system_a, system_b
from rifs.typespace import (
    analytic_n0_bound,
    build_pretype,
    build_strips,
    check_invariance,
    epsilon_main,
    psi,
    saturation_depth,
    support_reach,
    type_space,
)

from conftest import make_setup


# --- strips ---------------------------------------------------------------------


def test_strips_system_a():
    st = build_strips(system_a())
    assert st.components == ((F(-3, 10), F(3, 10)), (F(7, 10), F(13, 10)), (F(17, 10), F(23, 10)))
    assert st.M == 3 and st.w == F(3, 5)
    assert st.tilde == (F(-1, 2), F(23, 6))


def test_overlapping_offsets_merge():
    h = uniform_system([F(2, 5)] * 2, [0, F(2, 5)], F(3, 10), RATIONAL)
    assert build_strips(h).components == ((F(-3, 10), F(7, 10)),)


def test_strips_system_b():
    st = build_strips(system_b())
    assert st.M == 2 and st.tilde == (F(-5, 6), F(35, 2))


def test_strip_width_bound(setup_diff):
    for s in (build_strips(system_a()), build_strips(system_b()), setup_diff.strips):
        assert s.w >= 2 * s.theta_min
        assert s.M <= len(s.letters)


# --- psi ---------------------------------------------------------------------------


def test_psi_singleton():
    st = build_strips(system_a())
    assert psi(st, IntervalUnion.point(F(0))) == IntervalUnion.from_pairs(st.components)


def test_psi_system_b_first_iterate():
    st = build_strips(system_b())
    out = psi(st, IntervalUnion.open(*st.tilde))
    assert out == IntervalUnion.from_pairs([(F(-5, 6), F(15, 2)), (F(55, 6), F(35, 2))])


def test_psi_empty_and_domain():
    st = build_strips(system_a())
    assert not psi(st, IntervalUnion.empty())
    with pytest.raises(OutOfDomain):
        psi(st, IntervalUnion.open(-10, 0))


# --- pretype -----------------------------------------------------------------------


def test_pretype_system_a():
    pt = build_pretype(build_strips(system_a()))
    assert pt.N0 == 0 and pt.tau == 1
    assert pt.T0 == IntervalUnion.open(F(-1, 2), F(23, 6))
    assert pt.red_intervals == []


def test_pretype_system_b():
    pt = build_pretype(build_strips(system_b()))
    assert pt.N0 == 1 and pt.tau == 2
    assert pt.T0 == IntervalUnion.from_pairs([(F(-5, 6), F(15, 2)), (F(55, 6), F(35, 2))])
    assert pt.red_intervals == [IntervalUnion.closed(F(15, 2), F(55, 6))]


def test_pretype_history_decreasing(setup_diff):
    for st in (build_strips(system_b()), setup_diff.strips):
        pt = build_pretype(st)
        for a, b in zip(pt.history, pt.history[1:]):
            assert b <= a
        assert psi(st, pt.T0) == pt.T0
        assert pt.N0 <= analytic_n0_bound(st)
        # component endpoints persist down the iteration
        for a, b in zip(pt.history, pt.history[1:]):
            ends = {e for p in b for e in (p.lo, p.hi)}
            assert all(p.lo in ends and p.hi in ends for p in a)


def test_red_intervals_disjoint(setup_diff):
    reds = [p for u in setup_diff.pretype.red_intervals for p in u]
    for i, p in enumerate(reds):
        for q in reds[i + 1:]:
            assert not (IntervalUnion([p]) & IntervalUnion([q]))


def test_analytic_bound_by_hand():
    h = uniform_system([F(1, 2)] * 2, [0, F(3, 10)], F(1, 10), RATIONAL)
    st = build_strips(h)
    assert st.tilde[1] - st.tilde[0] == 1
    assert analytic_n0_bound(st) == 2


def test_invariance():
    for h in (system_a(), system_b()):
        st = build_strips(h)
        assert check_invariance(st, build_pretype(st))
    st = build_strips(system_b())
    pt = build_pretype(st)
    assert not check_invariance(st, IntervalUnion([pt.T0[0]]))


# --- eps_MAIN and T(eps) -------------------------------------------------------------


def test_eps_main_system_a(setup_a):
    em = setup_a.eps_main
    ends = sorted(e for _, _, a, b in em.projections for e in (a, b))
    assert ends == [F(-1, 2), F(1, 2), F(3, 2), F(11, 6), F(17, 6), F(23, 6)]
    assert em.d_hat == F(1, 3)
    assert em.eps_main == F(1, 75)
    assert em.eps_tilde == float("inf") and not em.eps_tilde_certified


def test_eps_main_bounds(setup_a, setup_b, setup_diff):
    for s in (setup_a, setup_b, setup_diff):
        assert 0 < s.eps_main.eps_main <= s.strips.a * s.strips.w / 10 < s.strips.w / 10


def test_eps_tilde_enters_min(setup_a):
    em = setup_a.eps_main.with_eps_tilde(setup_a.strips.a, F(1, 1000), True)
    assert em.eps_main == F(2, 5) / 10 * F(1, 1000)


def test_type_space_system_a():
    st = build_strips(system_a())
    pt = build_pretype(st)
    ts = type_space(st, pt, F(1, 100))
    assert ts.T == IntervalUnion.closed(F(-49, 100), F(23, 6) - F(1, 100))
    assert ts.kappa == F(3, 200)
    assert ts.identity_holds
    with pytest.raises(EpsTooLarge):
        type_space(st, pt, F(1, 75))


@pytest.mark.parametrize("which", ["a", "b", "diff"])
def test_component_counts_stable(which, setup_a, setup_b, setup_diff):
    s = {"a": setup_a, "b": setup_b, "diff": setup_diff}[which]
    em = s.eps_main.eps_main
    for j in range(1, 11):
        ts = type_space(s.strips, s.pretype, em * j / 11, s.eps_main)
        assert len(ts.T) == len(s.pretype.T0)
        assert ts.identity_holds


# --- reachability ----------------------------------------------------------------------


def test_support_reach_example():
    st = build_strips(system_a())
    pt = build_pretype(st)
    ts = type_space(st, pt, F(1, 100))
    E = support_reach(st, ts, F(1), 1)
    assert E == IntervalUnion([Interval(F(-49, 100), F(3, 4), True, False), Interval.open(F(7, 4), F(13, 4))])
    assert support_reach(st, ts, F(1), 0) == IntervalUnion.point(F(1))
    with pytest.raises(NotInTypeSpace):
        support_reach(st, ts, F(10), 1)


def test_section_length_at_least_kappa(setup_a, setup_b):
    for s in (setup_a, setup_b):
        for p in s.ts.T:
            for t in range(0, 11):
                x = p.lo + (p.hi - p.lo) * F(t, 10)
                E = support_reach(s.strips, s.ts, x, 1)
                assert max(q.hi - q.lo for q in E) >= s.ts.kappa


def test_reach_measure_grows_after_full_component(setup_a):
    s = setup_a
    E_prev = None
    full = False
    for n in range(0, 12):
        E = support_reach(s.strips, s.ts, F(1), n)
        if full:
            assert E.measure >= E_prev.measure
        full = full or any(p.hi - p.lo == c.hi - c.lo for p in E for c in s.ts.T)
        E_prev = E


def test_saturation_system_a():
    st = build_strips(system_a())
    pt = build_pretype(st)
    ts = type_space(st, pt, F(1, 100))
    sat = saturation_depth(st, ts)
    assert sat.N_star <= 20
    assert len(sat.grid) >= (ts.T.measure / (ts.kappa / 2))
    for x in sat.grid[::50]:
        assert support_reach(st, ts, x, sat.N_star) == ts.T


def test_saturation_system_b(setup_b):
    # each start saturates its own component: T(eps) is reached from either one
    sat = saturation_depth(setup_b.strips, setup_b.ts)
    assert 0 < sat.N_star < 200


def test_rational_float_agreement(setup_a, setup_b, setup_diff):
    for s in (setup_a, setup_b, setup_diff):
        fs = make_setup(to_float_spec(s.h), float(s.ts.eps))
        assert len(fs.pretype.T0) == len(s.pretype.T0)
        for p, q in zip(fs.pretype.T0, s.pretype.T0):
            assert abs(p.lo - float(q.lo)) < 1e-9 and abs(p.hi - float(q.hi)) < 1e-9
        assert abs(fs.eps_main.eps_main - float(s.eps_main.eps_main)) < 1e-9
