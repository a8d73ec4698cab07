"""Randomised invariants."""
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from rifs import rng
from rifs.core import (
    RATIONAL,
    coverage_statistics,
    sample_levels,
    similarity_dimension,
    translation_bounds,
    uniform_system,
)
from rifs.errors import EpsTooLarge
from rifs.intervals import Interval, IntervalUnion
from rifs.transforms import difference_system
from rifs.typespace import build_pretype, build_strips, epsilon_main, psi, type_space

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def homogeneous(draw, L_max=3):
    L = draw(st.integers(2, L_max))
    a = draw(st.floats(0.3, 0.8))
    centers = draw(st.lists(st.floats(0, 1), min_size=L, max_size=L))
    widths = draw(st.lists(st.floats(0.02, 0.3), min_size=L, max_size=L))
    return uniform_system([a] * L, centers, widths)


@st.composite
def rational_homogeneous(draw):
    L = draw(st.integers(2, 3))
    a = F(draw(st.integers(3, 8)), 10)
    centers = [F(draw(st.integers(0, 20)), 20) for _ in range(L)]
    widths = [F(draw(st.integers(1, 6)), 20) for _ in range(L)]
    return uniform_system([a] * L, centers, widths, mode=RATIONAL)


@st.composite
def general(draw):
    L = draw(st.integers(2, 3))
    ratios = [draw(st.floats(0.2, 0.6)) * draw(st.sampled_from([1, -1])) for _ in range(L)]
    centers = draw(st.lists(st.floats(-1, 1), min_size=L, max_size=L))
    widths = draw(st.lists(st.floats(0.01, 0.2), min_size=L, max_size=L))
    return uniform_system(ratios, centers, widths)


# ---------------------------------------------------------------------------
# cylinders
# ---------------------------------------------------------------------------


@SETTINGS
@given(general(), st.integers(0, 2**64 - 1))
def test_cylinders_nest(spec, seed):
    levels = sample_levels(spec, rng.RealizationTree(seed), 4)
    L = spec.L
    for lv, nxt in zip(levels, levels[1:]):
        par_lo = np.repeat(lv.left, L)
        par_hi = np.repeat(lv.right, L)
        tol = 1e-12 * max(1.0, float(np.max(np.abs(lv.right))))
        assert np.all(nxt.left >= par_lo - tol) and np.all(nxt.right <= par_hi + tol)
        # coverage by union measure never grows
        assert nxt.measure() <= lv.measure() + 1e-12


@SETTINGS
@given(general(), st.integers(0, 2**64 - 1))
def test_translations_within_bounds(spec, seed):
    lv = sample_levels(spec, rng.RealizationTree(seed), 3)[-1]
    for k in range(len(lv)):
        lo, hi = translation_bounds(spec, lv.word(k))
        assert lo - 1e-12 <= lv.translation[k] <= hi + 1e-12


@SETTINGS
@given(general(), st.integers(0, 2**64 - 1))
def test_sampling_deterministic(spec, seed):
    a = sample_levels(spec, rng.RealizationTree(seed), 3)[-1]
    b = sample_levels(spec, rng.RealizationTree(seed), 3)[-1]
    assert np.array_equal(a.left, b.left) and np.array_equal(a.right, b.right)


@SETTINGS
@given(homogeneous(), st.integers(0, 2**64 - 1))
def test_coverage_measures_nonincreasing(h, seed):
    stats = coverage_statistics(sample_levels(h, rng.RealizationTree(seed), 5))
    m = stats.measures
    assert all(b <= a + 1e-12 for a, b in zip(m, m[1:]))


# ---------------------------------------------------------------------------
# dimension
# ---------------------------------------------------------------------------


@SETTINGS
@given(st.lists(st.floats(0.05, 0.9), min_size=2, max_size=6))
def test_moran_equation(ratios):
    s = similarity_dimension(ratios)
    assert sum(r**s for r in ratios) == pytest.approx(1, abs=1e-10)
    # raising one ratio raises the dimension
    bumped = [ratios[0] + 1e-6] + ratios[1:]
    if bumped[0] < 1:
        assert similarity_dimension(bumped) > s


@SETTINGS
@given(homogeneous())
def test_difference_doubles_dimension(h):
    d = difference_system(h, points=65)
    assert d.L == h.L**2
    assert similarity_dimension(d) == pytest.approx(2 * similarity_dimension(h), abs=1e-9)


# ---------------------------------------------------------------------------
# Psi and the type space
# ---------------------------------------------------------------------------


def _random_union(draw, lo, hi, k):
    cuts = sorted(draw(st.lists(st.floats(0, 1), min_size=2 * k, max_size=2 * k)))
    span = hi - lo
    parts = [Interval.open(lo + span * cuts[2 * i], lo + span * cuts[2 * i + 1]) for i in range(k)
             if cuts[2 * i + 1] > cuts[2 * i] + 1e-6]
    return IntervalUnion(parts)


@SETTINGS
@given(homogeneous(), st.data())
def test_psi_monotone_and_bitmap(h, data):
    strips = build_strips(h)
    lo, hi = float(strips.tilde[0]), float(strips.tilde[1])
    H1 = _random_union(data.draw, lo, hi, data.draw(st.integers(1, 3)))
    H2 = H1.union(_random_union(data.draw, lo, hi, 2))
    P1, P2 = psi(strips, H1), psi(strips, H2)
    assert P1 <= P2
    # oracle: x is in Psi(H) iff ((x - hi_i)/a, (x - lo_i)/a) meets H, sampled at 1e-5 resolution
    a = float(strips.a)
    xs = np.arange(lo, hi, 1e-5 * (hi - lo) * 137)
    ys = np.arange(lo, hi, 1e-5)
    inH = H1.to_float().indicator(ys)
    yH = ys[inH]
    got = P1.to_float().indicator(xs)
    want = np.zeros(xs.size, bool)
    for o_lo, o_hi in strips.offsets:
        left, right = (xs - float(o_hi)) / a, (xs - float(o_lo)) / a
        idx = np.searchsorted(yH, left, side="right")
        if yH.size:
            want |= (idx < yH.size) & (yH[np.minimum(idx, yH.size - 1)] < right)
    ends = np.array([float(v) for p in P1 for v in (p.lo, p.hi)] + [np.inf])
    far = np.min(np.abs(ends[None, :] - xs[:, None]), axis=1) > 1e-4 * (hi - lo)
    assert np.array_equal(got[far], want[far])


@SETTINGS
@given(homogeneous(), st.data())
def test_psi_contains_minkowski_samples(h, data):
    strips = build_strips(h)
    lo, hi = float(strips.tilde[0]), float(strips.tilde[1])
    H = _random_union(data.draw, lo, hi, 2)
    if not H:
        return
    P = psi(strips, H)
    gen = np.random.default_rng(data.draw(st.integers(0, 1000)))
    for p in H:
        ys = gen.uniform(float(p.lo), float(p.hi), 20)
        for o_lo, o_hi in strips.offsets:
            os_ = gen.uniform(float(o_lo), float(o_hi), 20)
            inner = (ys > float(p.lo)) & (ys < float(p.hi)) & (os_ > float(o_lo)) & (os_ < float(o_hi))
            assert np.all(P.to_float().indicator(float(strips.a) * ys + os_)[inner])


@SETTINGS
@given(rational_homogeneous())
def test_rational_and_float_pretype_agree(h):
    exact = build_pretype(build_strips(h))
    approx = build_pretype(build_strips(uniform_system([float(h.ratio)] * h.L,
                                                       [float(l.center) for l in h.laws],
                                                       [float(l.half_width) for l in h.laws])))
    assert exact.N0 == approx.N0
    assert exact.T0.to_float().equals(approx.T0, 1e-9)


@SETTINGS
@given(rational_homogeneous(), st.floats(0.01, 0.99))
def test_type_space_keeps_components(h, frac):
    strips = build_strips(h)
    pre = build_pretype(strips)
    em = epsilon_main(strips, pre)
    eps = F(frac).limit_denominator(1000) * em.eps_main
    if not 0 < eps < em.eps_main:
        return
    ts = type_space(strips, pre, eps, em)
    assert len(ts.T) == len(pre.T0)
    ends = [(x, y) for _, _, x, y in em.projections]
    touching = any(y1 == x2 for _, y1 in ends for x2, _ in ends)
    assert ts.identity_holds or touching
    assert ts.kappa == eps * (1 / strips.a - 1)
    with pytest.raises(EpsTooLarge):
        type_space(strips, pre, em.eps_main, em)


def test_touching_projections_break_the_piecewise_identity():
    # the two images of T(0) meet at the single point 67/140; the open union
    # is merged into one component, and shrinking each image separately leaves a gap
    h = uniform_system([F(3, 10)] * 2, [0, F(3, 4)], [F(1, 20), F(1, 4)], mode=RATIONAL)
    strips = build_strips(h)
    pre = build_pretype(strips)
    em = epsilon_main(strips, pre)
    assert pre.T0 == IntervalUnion.open(F(-1, 14), F(10, 7))
    ts = type_space(strips, pre, em.eps_main / 2, em)
    assert not ts.identity_holds
