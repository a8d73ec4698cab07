"""Mean-offspring kernel of the branching types and its Perron-Frobenius data.

The kernel ``m(x, y) = sum_i a * phi_i(x - t_i - a y)`` (``phi_i`` the centred
density of letter i) is the density at ``y`` of the expected number of
first-generation descendants of a type-``x`` individual.  Restricted to the
type space it is discretised per component on a uniform grid; the weighted
matrix ``K[i, j] ~ m(x_i, y_j) w_j`` then represents the operator
``F h(x) = int m(x, y) h(y) dy``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import HomogeneousRIFS, as_homogeneous
from .errors import NoConvergence, NoEta, NoR, NotPrimitive, NotSupercritical
from .intervals import IntervalUnion, fmt_number, union_to_json
from .typespace import EpsMain, PretypeResult, StripSystem, TypeSpace, epsilon_main, type_space

MIDPOINT = "midpoint"
CELL = "cell"


def kernel_value(h: HomogeneousRIFS, x, y) -> np.ndarray:
    """``m(x, y)``; broadcasts over array arguments."""
    h = as_homogeneous(h)
    a = float(h.ratio)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape)
    for law in h.laws:
        out += a * law.centered_pdf(x - float(law.center) - a * y)
    return out


def kernel_bound(h: HomogeneousRIFS) -> float:
    """``U = a * max_i sup phi_i``, an upper bound of the kernel."""
    h = as_homogeneous(h)
    return float(h.ratio) * max(law.sup_density for law in h.laws)


def letter_matrix(h: HomogeneousRIFS, law, x: np.ndarray, lo: np.ndarray, hi: np.ndarray, quadrature: str) -> np.ndarray:
    """Weighted kernel contribution of one letter on nodes ``x`` and cells ``[lo, hi]``."""
    a = float(h.ratio)
    t = float(law.center)
    if quadrature == CELL:
        # exact integral of a*phi(x - t - a y) over each cell in y
        return law.centered_cdf(x[:, None] - t - a * lo[None, :]) - law.centered_cdf(x[:, None] - t - a * hi[None, :])
    mid = 0.5 * (lo + hi)
    return a * law.centered_pdf(x[:, None] - t - a * mid[None, :]) * (hi - lo)[None, :]


@dataclass
class KernelGrid:
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray  # m(x_i, y_j) (cell averages in y for the cell rule)
    component: np.ndarray  # index of the component of T(eps) holding each node
    quadrature: str = MIDPOINT
    cells: tuple | None = field(default=None, repr=False)
    system: HomogeneousRIFS | None = field(default=None, repr=False)
    domain: IntervalUnion | None = field(default=None, repr=False)

    @property
    def matrix(self) -> np.ndarray:
        return self.values * self.weights[None, :]

    @property
    def size(self) -> int:
        return self.nodes.size

    def indicator(self, A: IntervalUnion) -> np.ndarray:
        return A.indicator(self.nodes).astype(float)

    def integrate(self, vals) -> float:
        return float(np.dot(self.weights, vals))

    def step(self, A: IntervalUnion | None) -> np.ndarray:
        """``F 1_A`` at the nodes, in closed form when the system is known."""
        if self.system is None or self.domain is None:
            v = np.ones(self.size) if A is None else self.indicator(A)
            return self.matrix @ v
        target = self.domain if A is None else self.domain.intersection(A)
        h = self.system
        a = float(h.ratio)
        out = np.zeros(self.size)
        for law in h.laws:
            t = float(law.center)
            for p in target:
                lo, hi = float(p.lo), float(p.hi)
                out += law.centered_cdf(self.nodes - t - a * lo) - law.centered_cdf(self.nodes - t - a * hi)
        return out


def grid_nodes(T: IntervalUnion, points_per_component: int):
    nodes, weights, comp, lo, hi = [], [], [], [], []
    for k, p in enumerate(T):
        edges = np.linspace(float(p.lo), float(p.hi), points_per_component + 1)
        lo.append(edges[:-1])
        hi.append(edges[1:])
        nodes.append(0.5 * (edges[:-1] + edges[1:]))
        weights.append(np.diff(edges))
        comp.append(np.full(points_per_component, k))
    return (np.concatenate(nodes), np.concatenate(weights), np.concatenate(comp),
            np.concatenate(lo), np.concatenate(hi))


def build_grid(h: HomogeneousRIFS, T: IntervalUnion, points_per_component: int = 256,
               quadrature: str = CELL) -> KernelGrid:
    if points_per_component < 8:
        raise ValueError("need at least 8 points per component")
    if quadrature not in (MIDPOINT, CELL):
        raise ValueError(f"unknown quadrature {quadrature!r}")
    h = as_homogeneous(h)
    x, w, comp, lo, hi = grid_nodes(T, points_per_component)
    K = np.zeros((x.size, x.size))
    for law in h.laws:
        K += letter_matrix(h, law, x, lo, hi, quadrature)
    return KernelGrid(x, w, K / w[None, :], comp, quadrature, (lo, hi), h, T)


def grid_from_matrix(nodes, weights, values) -> KernelGrid:
    """Kernel grid from explicit node values, e.g. for synthetic kernels."""
    nodes = np.asarray(nodes, dtype=float)
    return KernelGrid(nodes, np.asarray(weights, dtype=float), np.asarray(values, dtype=float),
                      np.zeros(nodes.size, dtype=int))


# ---------------------------------------------------------------------------
# Perron-Frobenius data
# ---------------------------------------------------------------------------


@dataclass
class SpectralResult:
    rho: float
    f: np.ndarray
    g: np.ndarray
    N0_pos: int
    iterations: int
    residual: float
    harris_delta: float | None = None

    def to_json(self) -> dict:
        return {
            "rho": self.rho,
            "f_min": float(self.f.min()),
            "f_max": float(self.f.max()),
            "g_min": float(self.g.min()),
            "g_max": float(self.g.max()),
            "N0_pos": self.N0_pos,
            "iterations": self.iterations,
            "residual": self.residual,
            "harris_delta": self.harris_delta,
        }


def power_iteration(K: np.ndarray, tol: float = 1e-12, res_tol: float = 1e-10, max_iter: int = 100_000):
    """Dominant eigenpair of a nonnegative matrix; returns ``(rho, v, iterations, residual)``."""
    n = K.shape[0]
    v = np.full(n, 1.0 / n)
    rho = 0.0
    for it in range(1, max_iter + 1):
        u = K @ v
        s = u.sum()
        if not s > 0:
            raise NoConvergence("the operator annihilates the positive cone")
        new_rho = s / v.sum()
        u /= s
        res = np.linalg.norm(K @ u - new_rho * u) / np.linalg.norm(u)
        if abs(new_rho - rho) < tol * max(1.0, new_rho) and res < res_tol:
            return float(new_rho), u, it, float(res)
        rho, v = new_rho, u
    raise NoConvergence(f"power iteration did not converge in {max_iter} steps")


def positivity_index(K: np.ndarray, cap: int = 200) -> int:
    """Smallest ``n <= cap`` with ``K^n`` entrywise positive."""
    B = (K > 0).astype(np.float64)
    P = B.copy()
    for n in range(1, cap + 1):
        if P.all():
            return n
        P = ((P @ B) > 0).astype(np.float64)
    raise NotPrimitive(f"no power up to {cap} of the kernel matrix is entrywise positive")


def spectral_data(grid: KernelGrid, positivity_cap: int = 200, **kw) -> SpectralResult:
    K = grid.matrix
    rho, f, it, res = power_iteration(K, **kw)
    rho_l, h, _, _ = power_iteration(K.T, **kw)
    g = h / grid.weights
    f = f / grid.integrate(f)
    g = g / grid.integrate(f * g)
    n0 = positivity_index(K, positivity_cap)
    return SpectralResult(rho, f, g, n0, it, res)


def build_operator(h: HomogeneousRIFS, ts: TypeSpace, points_per_component: int = 256,
                   quadrature: str = CELL, positivity_cap: int = 200) -> tuple[KernelGrid, SpectralResult]:
    """Discretised kernel on ``T(eps)`` with its eigenvalue and eigenfunctions."""
    grid = build_grid(h, ts.T, points_per_component, quadrature)
    return grid, spectral_data(grid, positivity_cap)


# ---------------------------------------------------------------------------
# Harris convergence
# ---------------------------------------------------------------------------


@dataclass
class HarrisCheck:
    errors: list
    delta: float
    monotone: bool

    def to_json(self) -> dict:
        return {"errors": self.errors, "delta": self.delta, "monotone": self.monotone}


def harris_check(grid: KernelGrid, spec: SpectralResult, n_max: int = 30, floor: float = 1e-12) -> HarrisCheck:
    """Relative distance of ``m_n / rho^n`` from ``f(x) g(y)`` for ``n = 1..n_max``."""
    K = grid.matrix
    fg = np.outer(spec.f, spec.g)
    P = np.eye(K.shape[0])
    errors = []
    for n in range(1, n_max + 1):
        P = (P @ K) / spec.rho
        m_n = P / grid.weights[None, :]
        errors.append(float(np.max(np.abs(m_n - fg) / fg)))
    start = max(spec.N0_pos, 1)
    ns = [n for n in range(start, n_max + 1) if errors[n - 1] > floor]
    if len(ns) >= 2:
        slope = np.polyfit(ns, np.log([errors[n - 1] for n in ns]), 1)[0]
        delta = float(math.exp(slope))
    else:
        delta = 0.0
    tail = [errors[n - 1] for n in ns]
    monotone = all(b < a for a, b in zip(tail, tail[1:]))
    spec.harris_delta = delta
    return HarrisCheck(errors, delta, monotone)


# ---------------------------------------------------------------------------
# growth constants
# ---------------------------------------------------------------------------


@dataclass
class GrowthConstants:
    U: float
    C_star: float
    C_0: float
    eta: object
    W: IntervalUnion
    r: int
    min_mean_r: float  # min_x E[Z_r(x, W)] on the grid
    per_letter_min: float  # min_x max_q E[# first-letter-q descendants in W]
    restricted_growth: bool  # F(f 1_W) > C_0 f on the grid

    def to_json(self) -> dict:
        return {
            "U": self.U,
            "C_star": self.C_star,
            "C_0": self.C_0,
            "eta": fmt_number(self.eta),
            "W": union_to_json(self.W),
            "r": self.r,
            "min_mean_r": self.min_mean_r,
            "per_letter_min": self.per_letter_min,
            "restricted_growth": self.restricted_growth,
        }


def choose_eta(ts: TypeSpace, U: float, fmax: float, C_star: float, j_max: int = 200):
    """Largest ``(eps_MAIN - eps)/2^j`` with ``Leb(T \\ W) U max f < C*/2``."""
    gap = ts.eps_main.eps_main - ts.eps
    for j in range(1, j_max + 1):
        eta = gap / 2**j
        W = ts.shrink(eta)
        lost = float(ts.T.measure - W.measure)
        if lost * U * fmax < C_star / 2:
            return eta, W
    raise NoEta("no admissible eta; the eigenvalue is too close to 1 for this grid")


def growth_constants(h: HomogeneousRIFS, grid: KernelGrid, spec: SpectralResult, ts: TypeSpace,
                     r_cap: int = 10_000) -> GrowthConstants:
    h = as_homogeneous(h)
    if not spec.rho > 1:
        raise NoR(f"rho = {spec.rho} <= 1: expected offspring counts do not grow")
    U = kernel_bound(h)
    fmin, fmax = float(spec.f.min()), float(spec.f.max())
    C_star = spec.rho * fmin**2 / fmax
    C_0 = C_star / (2 * fmax)
    eta, W = choose_eta(ts, U, fmax, C_star)
    K = grid.matrix
    ind = grid.indicator(W)
    restricted_ok = bool(np.all(K @ (spec.f * ind) > C_0 * spec.f))
    L = h.L
    v = ind
    prev = ind
    for r in range(1, r_cap + 1):
        prev = v
        v = K @ v
        if v.min() > 6 * L:
            break
    else:
        raise NoR(f"min_x E[Z_r(x, W)] stays below 6L up to r = {r_cap}")
    best = np.zeros(grid.size)
    lo, hi = grid.cells if grid.cells is not None else (grid.nodes - grid.weights / 2, grid.nodes + grid.weights / 2)
    for law in h.laws:
        Kq = letter_matrix(h, law, grid.nodes, lo, hi, grid.quadrature)
        best = np.maximum(best, Kq @ prev)
    return GrowthConstants(U, C_star, C_0, eta, W, r, float(v.min()), float(best.min()), restricted_ok)


def mean_counts(grid: KernelGrid, A: IntervalUnion | None, n: int) -> np.ndarray:
    """Discretised ``E[Z_n(x, A)]`` at every node; the last generation is exact."""
    if n == 0:
        return np.ones(grid.size) if A is None else grid.indicator(A)
    v = grid.step(A)
    K = grid.matrix
    for _ in range(n - 1):
        v = K @ v
    return v


# ---------------------------------------------------------------------------
# eps~ certification
# ---------------------------------------------------------------------------


@dataclass
class EpsTildeSearch:
    eps_tilde: float
    rho: float
    trail: list  # (eps, rho) pairs visited

    def to_json(self) -> dict:
        return {"eps_tilde": self.eps_tilde, "rho": self.rho, "trail": [[e, r] for e, r in self.trail]}


def certify_eps_tilde(h: HomogeneousRIFS, strips: StripSystem, pretype: PretypeResult,
                      points_per_component: int = 128, margin: float = 0.01, j_max: int = 30,
                      quadrature: str = CELL) -> EpsTildeSearch:
    """Largest ``eps`` in ``{eps_0 / 2^j}`` whose discretised eigenvalue exceeds ``1 + margin``.

    ``eps_0`` is a quarter of ``min{w, d_hat, min length}``; the eigenvalue
    grows as ``eps`` shrinks, so the first success is the largest.
    """
    em = epsilon_main(strips, pretype)
    eps0 = float(em.base) / 4
    trail = []
    for j in range(j_max + 1):
        eps = eps0 / 2**j
        T = pretype.T0.to_float().shrink(eps)
        grid = build_grid(h, T, points_per_component, quadrature)
        rho = power_iteration(grid.matrix)[0]
        trail.append((eps, rho))
        if rho > 1 + margin:
            return EpsTildeSearch(eps, rho, trail)
    raise NotSupercritical(f"eigenvalue stays below 1 + {margin} down to eps = {eps}")


def spectral_report(grid: KernelGrid, spec: SpectralResult, growth: GrowthConstants | None = None,
                    harris: HarrisCheck | None = None) -> dict:
    out = {"grid": {"nodes": grid.size, "quadrature": grid.quadrature}, "spectral": spec.to_json()}
    if harris is not None:
        out["harris"] = harris.to_json()
    if growth is not None:
        out["growth"] = growth.to_json()
    return out
