"""Geometry of the branching types of a homogeneous system.

For ``H_i(x) = a x + D_i`` a type ``x`` has children ``(x - D_i)/a``; the
pair ``(x, y)`` can occur as parent and child iff ``x - a y`` lies in one of
the offset intervals ``(t_i - theta_i, t_i + theta_i)``.  Merging those
intervals gives the strips.  The set map

    Psi(H) = union_i (a H + t_i - theta_i, a H + t_i + theta_i)

iterated from the open fixed interval of the strips decreases to a fixed
point after finitely many steps: the pre-type space ``T(0)``.  Removing an
``eps`` collar from each of its components gives the type space ``T(eps)``.

All constructions are exact when the system is in rational mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import RATIONAL, HomogeneousRIFS, as_homogeneous
from .errors import (
    BoundExceeded,
    EpsTooLarge,
    NotInTypeSpace,
    OutOfDomain,
    SaturationTimeout,
)
from .intervals import Interval, IntervalUnion, fmt_number, union_to_json

INF = float("inf")


@dataclass(frozen=True)
class StripSystem:
    a: object
    offsets: tuple  # raw (t_i - theta_i, t_i + theta_i), sorted
    components: tuple  # merged (lo_k, hi_k)
    tilde: tuple  # (alpha~, beta~)
    exact: bool
    letters: tuple = ()  # raw offsets in letter order

    @property
    def M(self) -> int:
        return len(self.components)

    @property
    def w(self):
        return min(hi - lo for lo, hi in self.components)

    @property
    def theta_min(self):
        return min((hi - lo) / 2 for lo, hi in self.offsets)

    @property
    def tol(self):
        if self.exact:
            return 0
        return 1e-12 * float(self.tilde[1] - self.tilde[0])

    @property
    def domain(self) -> IntervalUnion:
        return IntervalUnion.closed(self.tilde[0], self.tilde[1], self.tol)

    def union(self, parts) -> IntervalUnion:
        return IntervalUnion(parts, self.tol)

    def to_json(self) -> dict:
        return {
            "a": fmt_number(self.a),
            "offsets": [[fmt_number(lo), fmt_number(hi)] for lo, hi in self.letters],
            "components": [[fmt_number(lo), fmt_number(hi)] for lo, hi in self.components],
            "M": self.M,
            "w": fmt_number(self.w),
            "tilde_interval": [fmt_number(v) for v in self.tilde],
        }


def build_strips(h: HomogeneousRIFS) -> StripSystem:
    """Offset intervals of the strips, merged into components."""
    h = as_homogeneous(h)
    a = h.ratio
    raw = tuple((law.center - law.half_width, law.center + law.half_width) for law in h.laws)
    ordered = tuple(sorted(raw))
    comps: list = []
    for lo, hi in ordered:
        # touching offsets are merged as well as overlapping ones
        if comps and lo <= comps[-1][1]:
            comps[-1] = (comps[-1][0], max(comps[-1][1], hi))
        else:
            comps.append((lo, hi))
    tilde = (comps[0][0] / (1 - a), comps[-1][1] / (1 - a))
    return StripSystem(a, ordered, tuple(comps), tilde, h.mode == RATIONAL, raw)


# ---------------------------------------------------------------------------
# Psi and the pre-type space
# ---------------------------------------------------------------------------


def psi(strips: StripSystem, H: IntervalUnion) -> IntervalUnion:
    """Open set ``union`` over components ``<u, v>`` of ``H`` and strips of
    ``(a u + lo, a v + hi)``."""
    if not H:
        return strips.union(())
    if not H.issubset(strips.domain):
        raise OutOfDomain("the argument of Psi must lie in the fixed interval of the strips")
    a = strips.a
    parts = [
        Interval.open(a * p.lo + lo, a * p.hi + hi) for p in H for lo, hi in strips.offsets
    ]
    return strips.union(parts)


def analytic_n0_bound(strips: StripSystem) -> int:
    """Largest ``m`` with ``g^m(beta~ - alpha~) >= 0`` for ``g(x) = a x - theta_min``."""
    x = strips.tilde[1] - strips.tilde[0]
    m = 0
    a, th = strips.a, strips.theta_min
    while True:
        x = a * x - th
        if x < 0:
            return m
        m += 1


@dataclass
class PretypeResult:
    T0: IntervalUnion
    N0: int
    history: list
    red_intervals: list  # red_intervals[m-1] = closures of components of V_{m-1} \ V_m
    green: list  # green[m] = components of V_m kept at the next step
    bound: int

    @property
    def tau(self) -> int:
        return len(self.T0)

    @property
    def components(self) -> list:
        return [(p.lo, p.hi) for p in self.T0]

    def to_json(self) -> dict:
        return {
            "N0": self.N0,
            "analytic_bound": self.bound,
            "tau": self.tau,
            "T0": union_to_json(self.T0),
            "history": [union_to_json(v) for v in self.history],
            "red_intervals": [union_to_json(r) for r in self.red_intervals],
        }


def build_pretype(strips: StripSystem, max_iter: int | None = None) -> PretypeResult:
    """Iterate ``V_{m+1} = Psi(V_m)`` from the open fixed interval to its limit."""
    bound = analytic_n0_bound(strips)
    limit = bound if max_iter is None else max(bound, max_iter)
    V = strips.union([Interval.open(*strips.tilde)])
    history = [V]
    red, green = [], []
    m = 0
    while True:
        nxt = psi(strips, V)
        if nxt.equals(V, strips.tol):
            green.append(V)
            break
        removed = V.difference(nxt)
        red.append(strips.union(p.closure() for p in removed))
        green.append(V.intersection(nxt))
        m += 1
        if m > limit:
            raise BoundExceeded(f"no fixed point after {m} steps (analytic bound {bound})")
        V = nxt
        history.append(V)
    return PretypeResult(V, m, history, red, green, bound)


def check_invariance(strips: StripSystem, pretype_or_set) -> bool:
    """Whether ``Psi(T(0))`` is contained in ``T(0)``."""
    T0 = pretype_or_set.T0 if isinstance(pretype_or_set, PretypeResult) else pretype_or_set
    try:
        image = psi(strips, T0)
    except OutOfDomain:
        return False
    return image.issubset(T0)


# ---------------------------------------------------------------------------
# eps_MAIN and the type space
# ---------------------------------------------------------------------------


@dataclass
class EpsMain:
    eps_main: object
    w: object
    d_hat: object
    min_length: object
    eps_tilde: float = INF
    eps_tilde_certified: bool = False
    projections: tuple = ()  # (i, k, a_ik, b_ik), 1-based

    @property
    def base(self):
        """``min{w, d_hat, min length}``, the part not depending on eps~."""
        return min(self.w, self.d_hat, self.min_length)

    def with_eps_tilde(self, a, eps_tilde: float, certified: bool = True) -> "EpsMain":
        terms = [self.w, self.d_hat, self.min_length]
        if eps_tilde < INF:
            terms.append(eps_tilde)
        val = a * min(terms) / 10
        return EpsMain(val, self.w, self.d_hat, self.min_length, eps_tilde, certified, self.projections)

    def to_json(self) -> dict:
        return {
            "eps_main": fmt_number(self.eps_main),
            "terms": {
                "w": fmt_number(self.w),
                "d_hat": fmt_number(self.d_hat),
                "min_length": fmt_number(self.min_length),
                "eps_tilde": None if self.eps_tilde == INF else self.eps_tilde,
            },
            "eps_tilde_certified": self.eps_tilde_certified,
            "projections": [[i, k, fmt_number(a), fmt_number(b)] for i, k, a, b in self.projections],
        }


def projections(strips: StripSystem, pretype: PretypeResult) -> tuple:
    a = strips.a
    out = []
    for i, (al, be) in enumerate(pretype.components, 1):
        for k, (lo, hi) in enumerate(strips.components, 1):
            out.append((i, k, a * al + lo, a * be + hi))
    return tuple(out)


def epsilon_main(strips: StripSystem, pretype: PretypeResult, eps_tilde: float = INF) -> EpsMain:
    """``(a/10) min{w, d_hat, min component length, eps~}``, itemised."""
    proj = projections(strips, pretype)
    ends = sorted(set(v for _, _, x, y in proj for v in (x, y)))
    gaps = [q - p for p, q in zip(ends, ends[1:]) if q - p > strips.tol]
    d_hat = min(gaps) if gaps else INF
    min_len = min(hi - lo for lo, hi in pretype.components)
    base = EpsMain(None, strips.w, d_hat, min_len, INF, False, proj)
    return base.with_eps_tilde(strips.a, eps_tilde, eps_tilde < INF)


@dataclass
class TypeSpace:
    eps: object
    T: IntervalUnion
    T0: IntervalUnion
    eps_main: EpsMain
    kappa: object
    identity_holds: bool
    strips: StripSystem = field(repr=False)

    @property
    def components(self) -> list:
        return [(p.lo, p.hi) for p in self.T]

    @property
    def projections(self) -> tuple:
        return self.eps_main.projections

    @property
    def d_hat(self):
        return self.eps_main.d_hat

    def shrink(self, extra) -> IntervalUnion:
        """``T(eps + extra)``."""
        return self.T0.shrink(self.eps + extra)

    def contains(self, x) -> bool:
        return x in self.T

    def to_json(self) -> dict:
        return {
            "eps": fmt_number(self.eps),
            "T_eps": union_to_json(self.T),
            "kappa": fmt_number(self.kappa),
            "identity_holds": self.identity_holds,
            "eps_main": self.eps_main.to_json(),
        }


def type_space(strips: StripSystem, pretype: PretypeResult, eps, eps_main: EpsMain | None = None) -> TypeSpace:
    """``T(eps)``: each component of ``T(0)`` with an ``eps`` collar removed."""
    em = eps_main if eps_main is not None else epsilon_main(strips, pretype)
    if not 0 < eps < em.eps_main:
        raise EpsTooLarge(f"eps={eps} must lie strictly between 0 and eps_MAIN={em.eps_main}")
    T = pretype.T0.shrink(eps)
    via = strips.union(Interval.closed(x + eps, y - eps) for _, _, x, y in em.projections)
    ok = via.equals(T, strips.tol)
    kappa = eps * (1 / strips.a - 1)
    return TypeSpace(eps, T, pretype.T0, em, kappa, ok, strips)


# ---------------------------------------------------------------------------
# reachability
# ---------------------------------------------------------------------------


def reach_step(strips: StripSystem, T: IntervalUnion, E: IntervalUnion) -> IntervalUnion:
    """Types reachable in one generation from any type in ``E``, inside ``T``."""
    a = strips.a
    parts = [
        Interval.open((p.lo - hi) / a, (p.hi - lo) / a) for p in E for lo, hi in strips.components
    ]
    return strips.union(parts).intersection(T)


def support_reach(strips: StripSystem, ts: TypeSpace, x, n: int) -> IntervalUnion:
    """``E_n(x)``: the types some generation-n descendant of ``x`` can have."""
    if not ts.contains(x):
        raise NotInTypeSpace(f"{x} is not in the type space")
    E = strips.union([Interval.closed(x, x)])
    for _ in range(n):
        E = reach_step(strips, ts.T, E)
    return E


def _same_cover(E: IntervalUnion, T: IntervalUnion, tol) -> bool:
    if len(E) != len(T):
        return False
    return all(abs(p.lo - q.lo) <= tol and abs(p.hi - q.hi) <= tol for p, q in zip(E, T))


def default_reach_grid(ts: TypeSpace, spacing=None) -> list:
    """Points covering every component of ``T(eps)`` at spacing at most ``kappa/2``."""
    step = ts.kappa / 2 if spacing is None else spacing
    pts = []
    for lo, hi in ts.components:
        n = max(1, int(math.ceil((hi - lo) / step)))
        pts.extend(lo + (hi - lo) * Fraction(j, n) if ts.strips.exact else lo + (hi - lo) * j / n for j in range(n + 1))
    return pts


@dataclass
class SaturationResult:
    N_star: int
    depths: list
    grid: list

    def to_json(self) -> dict:
        return {"N_star": self.N_star, "points": len(self.grid), "max_depth": max(self.depths), "min_depth": min(self.depths)}


def saturation_depth(strips: StripSystem, ts: TypeSpace, grid: Sequence | None = None, max_depth: int = 200) -> SaturationResult:
    """Per grid point the first ``n`` with ``E_n(x) = T(eps)``; ``N*`` is the maximum."""
    if grid is None:
        grid = default_reach_grid(ts)
    depths = []
    for x in grid:
        E = support_reach(strips, ts, x, 0)
        n = 0
        while not _same_cover(E, ts.T, strips.tol):
            if n >= max_depth:
                raise SaturationTimeout(f"E_n({x}) still short of T(eps) after {max_depth} steps")
            E = reach_step(strips, ts.T, E)
            n += 1
        depths.append(n)
    return SaturationResult(max(depths), depths, list(grid))


def typespace_report(strips: StripSystem, pretype: PretypeResult, ts: TypeSpace | None = None,
                     saturation: SaturationResult | None = None) -> dict:
    out = {"strips": strips.to_json(), "pretype": pretype.to_json()}
    if ts is not None:
        out["type_space"] = ts.to_json()
    if saturation is not None:
        out["saturation"] = saturation.to_json()
    return out
