"""The multi-type branching process of types and the interval certificate.

An individual of type ``x`` at a node of the tree has, for each letter i, a
child of type ``(x - D_i)/a`` with ``D_i`` the translation drawn at that
node.  Children outside the type space are absorbed and never counted
again.  The draws are the same keyed draws used for cylinder sampling, so
``Z_n(x, .)`` and the cylinders of one seed describe one realisation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .core import DEFAULT_BUDGET, HomogeneousRIFS, as_homogeneous, draw_all, root_state, supporting_interval
from .errors import BudgetExceeded, NotSupercritical
from .intervals import IntervalUnion
from .spectral import GrowthConstants, SpectralResult
from .typespace import TypeSpace


@dataclass
class BranchingRun:
    start: float
    n: int
    seed: int
    counts: list  # Z_0..Z_{n-1} in T, then Z_n in A
    absorbed: int  # children that left the type space

    def to_json(self) -> dict:
        return {"start": self.start, "n": self.n, "seed": self.seed, "counts": self.counts, "absorbed": self.absorbed}


@dataclass
class BatchRun:
    start: float
    n: int
    seed: int
    counts: np.ndarray  # (trials, n+1); column k < n counts in T, column n counts in A
    absorbed: np.ndarray  # (trials,)

    @property
    def trials(self) -> int:
        return self.counts.shape[0]

    def mean(self, level: int | None = None):
        col = self.counts[:, self.n if level is None else level]
        return float(col.mean())

    def stderr(self, level: int | None = None):
        col = self.counts[:, self.n if level is None else level]
        return float(col.std(ddof=1) / math.sqrt(col.size)) if col.size > 1 else float("inf")

    def rows(self):
        """``(trial, level, count)`` rows for CSV output."""
        for t in range(self.trials):
            for k in range(self.n + 1):
                yield t, k, int(self.counts[t, k])


def simulate_from(h: HomogeneousRIFS, T: IntervalUnion, types, states: np.ndarray, n: int,
                  A: IntervalUnion | None = None, budget: int = DEFAULT_BUDGET) -> tuple[np.ndarray, np.ndarray]:
    """Counts for independent individuals with given types and node states.

    Returns ``(counts, absorbed)``; row ``t`` of ``counts`` holds
    ``Z_0..Z_{n-1}`` in ``T`` and ``Z_n`` in ``A`` (``T`` when ``A`` is None)
    for individual ``t``.
    """
    h = as_homogeneous(h)
    a = float(h.ratio)
    Tf = T.to_float()
    Af = Tf if A is None else A.to_float()
    types = np.asarray(types, dtype=float)
    trials = types.size
    owner = np.arange(trials)
    counts = np.zeros((trials, n + 1), dtype=np.int64)
    absorbed = np.zeros(trials, dtype=np.int64)
    counts[:, 0] = (Tf if n > 0 else Af).indicator(types)
    if n > 0:
        keep = Tf.indicator(types)
        types, states, owner = types[keep], states[keep], owner[keep]
    for level in range(1, n + 1):
        if types.size == 0:
            break
        if types.size * h.L > budget:
            raise BudgetExceeded(f"{types.size * h.L} individuals at level {level} exceed the budget {budget}")
        D, C = draw_all(h, states)
        child = (types[:, None] - D) / a
        inside = Tf.indicator(child)
        absorbed += np.bincount(owner, weights=(~inside).sum(axis=1), minlength=trials).astype(np.int64)
        hit = inside & Af.indicator(child) if level == n else inside
        counts[:, level] = np.bincount(owner, weights=hit.sum(axis=1), minlength=trials).astype(np.int64)
        types = child[inside]
        states = C[inside]
        owner = np.broadcast_to(owner[:, None], inside.shape)[inside]
    return counts, absorbed


def _roots(h: HomogeneousRIFS, keys) -> np.ndarray:
    return np.stack([root_state(h, k) for k in keys])


def simulate_Z(h: HomogeneousRIFS, ts: TypeSpace, x, n: int, A: IntervalUnion | None = None, seed: int = 0,
               budget: int = DEFAULT_BUDGET) -> BranchingRun:
    """One realisation (master seed ``seed``) of ``Z_0..Z_{n-1}`` in ``T`` and ``Z_n`` in ``A``."""
    if n > 0 and not ts.contains(x):
        raise ValueError("start type must lie in the type space")
    counts, absorbed = simulate_from(h, ts.T, [x], _roots(h, [seed]), n, A, budget)
    return BranchingRun(float(x), n, seed, [int(c) for c in counts[0]], int(absorbed[0]))


def simulate_batch(h: HomogeneousRIFS, ts: TypeSpace, x, n: int, A: IntervalUnion | None = None, seed: int = 0,
                   trials: int = 1000, budget: int = DEFAULT_BUDGET) -> BatchRun:
    """Independent trials keyed by ``(seed, trial index)``."""
    roots = _roots(h, rng.trial_keys(seed, np.arange(trials)))
    counts, absorbed = simulate_from(h, ts.T, np.full(trials, float(x)), roots, n, A, budget)
    return BatchRun(float(x), n, seed, counts, absorbed)


# ---------------------------------------------------------------------------
# growth rate
# ---------------------------------------------------------------------------


@dataclass
class GrowthEstimate:
    rho_hat: float
    ci: tuple
    levels: list
    means: list
    stderrs: list
    subcritical: bool
    degenerate: bool

    def to_json(self) -> dict:
        return {
            "rho_hat": self.rho_hat,
            "ci": list(self.ci),
            "levels": self.levels,
            "means": self.means,
            "stderrs": self.stderrs,
            "subcritical": self.subcritical,
            "degenerate": self.degenerate,
        }


def _slope(levels, means) -> float:
    ok = [(k, m) for k, m in zip(levels, means) if m > 0]
    if len(ok) < 2:
        return float("-inf")
    ks, ms = zip(*ok)
    return float(np.polyfit(ks, np.log(ms), 1)[0])


def estimate_growth(h: HomogeneousRIFS, ts: TypeSpace, x, n_max: int, trials: int = 2000, seed: int = 0,
                    n_min: int | None = None, boot: int = 200, level: float = 0.95,
                    budget: int = DEFAULT_BUDGET) -> GrowthEstimate:
    """``exp`` of the least-squares slope of ``log mean Z_n(x, T)`` over ``n_min..n_max``."""
    run = simulate_batch(h, ts, x, n_max, None, seed, trials, budget)
    if n_min is None:
        n_min = max(1, n_max // 2) if n_max >= 3 else 0
    levels = list(range(n_min, n_max + 1))
    sub = run.counts[:, n_min:n_max + 1].astype(float)
    means = sub.mean(axis=0)
    se = sub.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.full(len(levels), np.inf)
    slope = _slope(levels, means)
    rho_hat = math.exp(slope) if slope > float("-inf") else 0.0
    degenerate = trials < 2 or len(levels) < 2
    if degenerate:
        ci = (float("nan"), float("nan"))
    else:
        gen = np.random.default_rng(seed)
        vals = []
        for _ in range(boot):
            idx = gen.integers(0, trials, trials)
            s = _slope(levels, sub[idx].mean(axis=0))
            vals.append(math.exp(s) if s > float("-inf") else 0.0)
        q = (1 - level) / 2
        ci = (float(np.quantile(vals, q)), float(np.quantile(vals, 1 - q)))
    return GrowthEstimate(rho_hat, ci, levels, [float(m) for m in means], [float(s) for s in se],
                          rho_hat <= 1, degenerate)


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------


def log_a_sequence(L: int, n: int, r: int, log_tau: float, N: float, tiny: float = 1e-300) -> list:
    """``log a_k(n)`` for ``a_k(n) = L^(n + k r) tau^(2^(k-1) N)`` until the terms drop below ``tiny``."""
    out = []
    k = 0
    stop = math.log(tiny)
    while True:
        val = (n + k * r) * math.log(L) + (2.0 ** (k - 1)) * N * log_tau
        out.append(val)
        if val < stop or k > 2000:
            return out
        k += 1


def a_sequence(L: int, n: int, r: int, tau: float, N: float) -> list:
    return [math.exp(v) for v in log_a_sequence(L, n, r, math.log(tau), N)]


def _series(logs: list, L: int, r: int, N: float, log_tau: float) -> tuple[float, float]:
    """Sum of the listed terms plus a geometric bound on the omitted tail."""
    total = math.fsum(math.exp(v) for v in logs)
    k = len(logs) - 1
    # a_{k+1}/a_k = L^r tau^(2^(k-1) N), decreasing in k
    log_q = r * math.log(L) + (2.0 ** (k - 1)) * N * log_tau
    q = math.exp(min(log_q, 0.0))
    tail = math.exp(logs[-1]) * q / (1 - q) if q < 1 else float("inf")
    return total, tail


@dataclass
class Certificate:
    n: int
    r: int
    tau: float
    log_tau: float
    N_of_n: float
    n_1: int
    n_2: int
    ell_1: float
    c_1: float
    leb_W: float
    eta: float
    L_tilde: list
    L_tilde_log10: list
    a_k: list
    log_a_k: list
    a_sum: float
    xi: float
    xi_bound: float
    ratios_decreasing: bool = True
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "tau": self.tau,
            "log_tau": self.log_tau,
            "N_of_n": self.N_of_n,
            "n_1": self.n_1,
            "n_2": self.n_2,
            "ell_1": self.ell_1,
            "c_1": self.c_1,
            "leb_W": self.leb_W,
            "eta": self.eta,
            "L_tilde": [str(x) if x is not None else None for x in self.L_tilde],
            "L_tilde_log10": self.L_tilde_log10,
            "a_k": self.a_k,
            "log_a_k": self.log_a_k,
            "a_sum": self.a_sum,
            "xi": self.xi,
            "probability_lower_bound": self.xi_bound,
            "ratios_decreasing": self.ratios_decreasing,
        }


def _conditions(L, n, r, log_tau, N, xi, ell_1, eta, La):
    if math.log(ell_1 / eta) > n * math.log(La):
        return None
    logs = log_a_sequence(L, n, r, log_tau, N)
    if max(logs) >= math.log(0.5):
        return None
    total, tail = _series(logs, L, r, N, log_tau)
    if not total + tail < xi / 2:
        return None
    return logs, total + tail


def assemble_certificate(h: HomogeneousRIFS, ts: TypeSpace, growth: GrowthConstants, spec: SpectralResult,
                         xi: float = 0.01, n_cap: int = 100_000) -> Certificate:
    """Smallest ``n_2`` at which the product bound gives probability ``> 1 - xi``."""
    h = as_homogeneous(h)
    L = h.L
    a = float(h.ratio)
    La = L * a
    if not La > 1:
        raise NotSupercritical(f"L a = {La} <= 1: the similarity dimension is at most 1")
    if not spec.rho > 1:
        raise NotSupercritical(f"rho = {spec.rho} <= 1")
    alpha, beta = supporting_interval(h)
    width = float(beta - alpha)
    r = growth.r
    log_tau = -32.0 / float(L) ** (2 * r)
    tau = math.exp(log_tau)
    W = growth.W.to_float()
    leb_W = float(W.measure)
    ell_1 = min(p.hi - p.lo for p in W)
    c_1 = min(float(p.hi - p.lo) for p in ts.T0)
    eta = float(growth.eta)
    n_1 = max(1, math.ceil(math.log(c_1 / leb_W) / math.log(a)))

    def N_of(n):
        return leb_W / (2 * width) * La**n

    # find a feasible n by doubling, then bisect down to the first feasible one
    n = n_1
    found = None
    while n <= n_cap:
        res = _conditions(L, n, r, log_tau, N_of(n), xi, ell_1, eta, La)
        if res is not None:
            found = n
            break
        n *= 2
    if found is None:
        raise NotSupercritical(f"no n up to {n_cap} satisfies the certificate conditions")
    lo = max(n_1, found // 2)
    hi = found
    while lo < hi:
        mid = (lo + hi) // 2
        if _conditions(L, mid, r, log_tau, N_of(mid), xi, ell_1, eta, La) is not None:
            hi = mid
        else:
            lo = mid + 1
    # the conditions are monotone past the peak of log a_0; step back to the first success
    n2 = hi
    while n2 > n_1 and _conditions(L, n2 - 1, r, log_tau, N_of(n2 - 1), xi, ell_1, eta, La) is not None:
        n2 -= 1
    logs, total = _conditions(L, n2, r, log_tau, N_of(n2), xi, ell_1, eta, La)
    ratios = [b - c for c, b in zip(logs, logs[1:])]
    decreasing = all(x < 0 for x in ratios)
    if not decreasing:
        raise AssertionError("a_k(n) is not decreasing in k at the returned n")
    L_tilde, L_tilde_log10 = [], []
    for p in ts.T0:
        lg = math.log10(6 * float(p.hi - p.lo) / ell_1) - n2 * math.log10(a)
        L_tilde_log10.append(lg)
        L_tilde.append(math.ceil(6 * float(p.hi - p.lo) / ell_1 * a ** (-n2)) if lg < 300 else None)
    a_k = [math.exp(v) for v in logs]
    return Certificate(n2, r, tau, log_tau, N_of(n2), n_1, n2, ell_1, c_1, leb_W, eta, L_tilde, L_tilde_log10,
                       a_k, logs, total, xi, 1 - 2 * total, decreasing)


# ---------------------------------------------------------------------------
# concentration sanity check
# ---------------------------------------------------------------------------


@dataclass
class HoeffdingCheck:
    C: int
    reps: int
    span: int
    mean: float
    empirical: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.empirical <= self.bound

    def to_json(self) -> dict:
        return {"C": self.C, "reps": self.reps, "span": self.span, "mean": self.mean,
                "empirical": self.empirical, "bound": self.bound, "holds": self.holds}


def hoeffding_sanity(L: int = 3, r: int = 3, C: int = 200, reps: int = 10_000, mean: float = 6.01,
                     seed: int = 0) -> HoeffdingCheck:
    """Empirical ``P(Z_1 + ... + Z_C < 2C)`` against ``tau^C`` for ``tau = exp(-32/L^(2r))``.

    Each ``Z_i`` is ``L^r`` times a Bernoulli variable, the widest law on
    ``[0, L^r]`` with the given mean.
    """
    span = L**r
    p = mean / span
    gen = np.random.default_rng(seed)
    sums = span * gen.binomial(C, p, size=reps)
    empirical = float(np.mean(sums < 2 * C))
    bound = math.exp(-32.0 * C / span**2)
    return HoeffdingCheck(C, reps, span, mean, empirical, bound)
