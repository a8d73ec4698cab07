import math

import numpy as np
import pytest

from rifs import rng
from rifs.branching import (
    a_sequence,
    assemble_certificate,
    estimate_growth,
    hoeffding_sanity,
    log_a_sequence,
    simulate_batch,
    simulate_from,
    simulate_Z,
)
from rifs.core import draw_all, root_state, supporting_interval, uniform_system
from rifs.errors import BudgetExceeded, NotSupercritical
from rifs.intervals import IntervalUnion
from rifs.spectral import build_operator, growth_constants, mean_counts

from conftest import make_setup


@pytest.fixture(scope="module")
def constants_a(setup_a, operator_a):
    grid, spec = operator_a
    return growth_constants(setup_a.h, grid, spec, setup_a.ts)


def test_depth_zero_is_indicator(setup_a):
    A = IntervalUnion.open(0, 1)
    assert simulate_Z(setup_a.h, setup_a.ts, 0.5, 0, A).counts == [1]
    assert simulate_Z(setup_a.h, setup_a.ts, 1.5, 0, A).counts == [0]
    # n = 0 does not need x in the type space
    assert simulate_Z(setup_a.h, setup_a.ts, 10.0, 0).counts == [0]


def test_start_outside_type_space_rejected(setup_a):
    with pytest.raises(ValueError):
        simulate_Z(setup_a.h, setup_a.ts, 10.0, 2)


def test_wide_perturbation_keeps_every_child():
    h = uniform_system([0.7, 0.7], [0.0, 0.3], 0.2)
    s = make_setup(h)
    assert len(s.pretype.T0) == 1
    # images of x = 0.5 lie in [0, 1], well inside the single component
    assert s.ts.T[0].lo < 0 and s.ts.T[0].hi > 1
    run = simulate_batch(h, s.ts, 0.5, 1, None, seed=3, trials=10_000)
    assert np.all(run.counts[:, 1] == 2)
    assert np.all(run.absorbed == 0)


def test_mean_matches_kernel_at_depth_eight(setup_a, operator_a, constants_a):
    grid, _ = operator_a
    W = constants_a.W
    k = int(np.argmin(abs(grid.nodes - 1.0)))
    x = float(grid.nodes[k])
    predicted = mean_counts(grid, W, 8)[k]
    run = simulate_batch(setup_a.h, setup_a.ts, x, 8, W, seed=11, trials=2000)
    assert abs(run.mean() - predicted) < 3 * run.stderr()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mean_matches_kernel_small_depth(setup_a, operator_a, constants_a, n):
    grid, _ = operator_a
    k = int(np.argmin(abs(grid.nodes - 1.0)))
    run = simulate_batch(setup_a.h, setup_a.ts, float(grid.nodes[k]), n, constants_a.W, seed=n, trials=2000)
    assert abs(run.mean() - mean_counts(grid, constants_a.W, n)[k]) < 3 * run.stderr()


def test_markov_decomposition(setup_a):
    # Z_{n+1} from the root equals the sum of Z_n over the retained children driven by the child states
    h, ts = setup_a.h, setup_a.ts
    T = ts.T.to_float()
    a = float(h.ratio)
    for seed in range(20):
        x = 1.0
        run = simulate_Z(h, ts, x, 4, seed=seed)
        state = np.stack([root_state(h, seed)])
        D, C = draw_all(h, state)
        child = (x - D[0]) / a
        keep = T.indicator(child)
        if not keep.any():
            assert run.counts[1:] == [0, 0, 0, 0]
            continue
        sub, _ = simulate_from(h, ts.T, child[keep], C[0][keep], 3)
        assert run.counts[1:] == [int(v) for v in sub.sum(axis=0)]


def test_monotone_in_target(setup_a):
    small = IntervalUnion.open(0, 1)
    big = IntervalUnion.open(-0.5, 3)
    for seed in range(10):
        z_small = simulate_Z(setup_a.h, setup_a.ts, 1.0, 5, small, seed).counts[-1]
        z_big = simulate_Z(setup_a.h, setup_a.ts, 1.0, 5, big, seed).counts[-1]
        assert z_small <= z_big


def test_reproducible_and_bounded(setup_a):
    r1 = simulate_Z(setup_a.h, setup_a.ts, 1.0, 6, seed=42)
    r2 = simulate_Z(setup_a.h, setup_a.ts, 1.0, 6, seed=42)
    assert r1 == r2
    assert all(z <= 3**k for k, z in enumerate(r1.counts))
    b1 = simulate_batch(setup_a.h, setup_a.ts, 1.0, 4, seed=5, trials=50)
    b2 = simulate_batch(setup_a.h, setup_a.ts, 1.0, 4, seed=5, trials=50)
    assert np.array_equal(b1.counts, b2.counts)


def test_batch_trials_match_single_runs(setup_a):
    batch = simulate_batch(setup_a.h, setup_a.ts, 1.0, 4, seed=9, trials=5)
    keys = rng.trial_keys(9, np.arange(5))
    for t, key in enumerate(keys):
        assert list(batch.counts[t]) == simulate_Z(setup_a.h, setup_a.ts, 1.0, 4, seed=int(key)).counts


def test_budget(setup_a):
    with pytest.raises(BudgetExceeded):
        simulate_batch(setup_a.h, setup_a.ts, 1.0, 10, trials=100, budget=1000)


def test_growth_rate_system_a(setup_a, operator_a):
    _, spec = operator_a
    g = estimate_growth(setup_a.h, setup_a.ts, 1.0, 10, trials=2000, seed=0)
    assert abs(g.rho_hat - spec.rho) < 0.05 * spec.rho
    assert g.ci[0] <= g.rho_hat <= g.ci[1]
    assert not g.subcritical and not g.degenerate


def test_growth_rate_subcritical():
    h = uniform_system([0.4, 0.4], [0.0, 0.6], 0.05)
    s = make_setup(h)
    x = float(s.ts.T[0].lo + s.ts.T[0].hi) / 2
    g = estimate_growth(h, s.ts, x, 8, trials=4000, seed=1)
    assert g.rho_hat < 1
    assert g.subcritical


def test_growth_single_trial_degenerate(setup_a):
    g = estimate_growth(setup_a.h, setup_a.ts, 1.0, 1, trials=1, seed=0)
    assert g.degenerate
    assert all(math.isnan(c) for c in g.ci)


def test_toy_a_sequence():
    a = a_sequence(2, 1, 1, 0.5, 8)
    assert a[0] == pytest.approx(0.125)
    assert a[1] == pytest.approx(0.015625)
    logs = log_a_sequence(2, 1, 1, math.log(0.5), 8)
    assert math.exp(logs[-1]) < 1e-300 or len(logs) > 2000


def test_tau_formula():
    assert math.exp(-32 / 2 ** (2 * 3)) == pytest.approx(0.60653, abs=1e-5)


def test_certificate_system_a(setup_a, operator_a, constants_a):
    _, spec = operator_a
    cert = assemble_certificate(setup_a.h, setup_a.ts, constants_a, spec, xi=0.01)
    assert math.isfinite(cert.n_2) and cert.n_2 >= cert.n_1 >= 1
    assert all(a < 0.5 for a in cert.a_k)
    assert cert.a_sum < 0.005
    assert cert.xi_bound >= 0.99
    assert cert.ratios_decreasing
    assert all(b < a for a, b in zip(cert.log_a_k, cert.log_a_k[1:]))
    assert math.log(cert.ell_1 / cert.eta) <= cert.n * math.log(1.2)
    # minimality: one step earlier some condition fails
    alpha, beta = supporting_interval(setup_a.h)
    N_prev = cert.leb_W / (2 * float(beta - alpha)) * 1.2 ** (cert.n - 1)
    assert cert.N_of_n == pytest.approx(N_prev * 1.2)
    prev = log_a_sequence(3, cert.n - 1, cert.r, cert.log_tau, N_prev)
    assert max(prev) >= math.log(0.5) or math.fsum(math.exp(v) for v in prev) >= 0.005 \
        or math.log(cert.ell_1 / cert.eta) > (cert.n - 1) * math.log(1.2)


def test_certificate_rejects_subcritical(setup_b, setup_a, operator_a, constants_a):
    _, spec = operator_a
    with pytest.raises(NotSupercritical):
        assemble_certificate(setup_b.h, setup_b.ts, constants_a, spec)


def test_hoeffding_sanity():
    chk = hoeffding_sanity(C=200, reps=10_000)
    assert chk.holds
    assert chk.bound == pytest.approx(math.exp(-32 * 200 / 27**2))
