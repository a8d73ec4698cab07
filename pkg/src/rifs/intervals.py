"""Finite unions of real intervals with exact endpoint bookkeeping.

Endpoints may be ``fractions.Fraction`` (exact) or ``float``.  A union is
kept in canonical form: components sorted, pairwise disjoint, and any two
components that touch are merged whatever their facing flags, so set
equality is plain tuple equality.  In float mode an optional tolerance
widens "touching" to gaps no larger than ``tol``.

Also holds a few vectorised helpers for the large float unions produced by
cylinder sampling.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

INF = float("inf")


@dataclass(frozen=True, order=True)
class Interval:
    lo: object
    hi: object
    lo_closed: bool = False
    hi_closed: bool = False

    @classmethod
    def open(cls, lo, hi) -> "Interval":
        return cls(lo, hi, False, False)

    @classmethod
    def closed(cls, lo, hi) -> "Interval":
        return cls(lo, hi, True, True)

    @property
    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    @property
    def length(self):
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def closure(self) -> "Interval":
        return Interval(self.lo, self.hi, True, True)

    def interior(self) -> "Interval":
        return Interval(self.lo, self.hi, False, False)

    def __str__(self) -> str:
        return f"{'[' if self.lo_closed else '('}{self.lo}, {self.hi}{']' if self.hi_closed else ')'}"


def _normalize(parts: Iterable[Interval], tol=0) -> tuple[Interval, ...]:
    items = sorted((p for p in parts if not p.is_empty), key=lambda p: (p.lo, not p.lo_closed))
    out: list[Interval] = []
    for p in items:
        if out:
            cur = out[-1]
            if p.lo < cur.hi or p.lo - cur.hi <= tol:
                if p.hi > cur.hi:
                    out[-1] = Interval(cur.lo, p.hi, cur.lo_closed, p.hi_closed)
                elif p.hi == cur.hi and p.hi_closed and not cur.hi_closed:
                    out[-1] = Interval(cur.lo, cur.hi, cur.lo_closed, True)
                elif p.lo == cur.lo and p.lo_closed and not cur.lo_closed:
                    out[-1] = Interval(cur.lo, cur.hi, True, cur.hi_closed)
                continue
        out.append(p)
    return tuple(out)


class IntervalUnion:
    """Immutable finite union of intervals in canonical form."""

    __slots__ = ("parts", "tol")

    def __init__(self, parts: Iterable[Interval] = (), tol=0):
        self.tol = tol
        self.parts = _normalize(parts, tol)

    @classmethod
    def empty(cls, tol=0) -> "IntervalUnion":
        return cls((), tol)

    @classmethod
    def open(cls, lo, hi, tol=0) -> "IntervalUnion":
        return cls([Interval.open(lo, hi)], tol)

    @classmethod
    def closed(cls, lo, hi, tol=0) -> "IntervalUnion":
        return cls([Interval.closed(lo, hi)], tol)

    @classmethod
    def point(cls, x, tol=0) -> "IntervalUnion":
        return cls([Interval.closed(x, x)], tol)

    @classmethod
    def from_pairs(cls, pairs, closed=False, tol=0) -> "IntervalUnion":
        return cls([Interval(lo, hi, closed, closed) for lo, hi in pairs], tol)

    def _new(self, parts) -> "IntervalUnion":
        return IntervalUnion(parts, self.tol)

    # --- container protocol -------------------------------------------------
    def __iter__(self) -> Iterator[Interval]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __bool__(self) -> bool:
        return bool(self.parts)

    def __getitem__(self, i) -> Interval:
        return self.parts[i]

    def __contains__(self, x) -> bool:
        return any(x in p for p in self.parts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalUnion):
            return NotImplemented
        return self.equals(other, tol=max(self.tol, other.tol))

    def __hash__(self):
        return hash(self.parts)

    def __repr__(self) -> str:
        if not self.parts:
            return "IntervalUnion(∅)"
        return "IntervalUnion(" + " ∪ ".join(str(p) for p in self.parts) + ")"

    def equals(self, other: "IntervalUnion", tol=0) -> bool:
        if len(self.parts) != len(other.parts):
            return False
        if tol == 0:
            return self.parts == other.parts
        for p, q in zip(self.parts, other.parts):
            if abs(p.lo - q.lo) > tol or abs(p.hi - q.hi) > tol:
                return False
        return True

    # --- measures and shape -------------------------------------------------
    @property
    def measure(self):
        return sum((p.hi - p.lo for p in self.parts), 0)

    @property
    def lo(self):
        return self.parts[0].lo

    @property
    def hi(self):
        return self.parts[-1].hi

    def endpoints(self) -> list:
        return [(p.lo, p.hi) for p in self.parts]

    def closure(self) -> "IntervalUnion":
        return self._new(p.closure() for p in self.parts)

    def interior(self) -> "IntervalUnion":
        return self._new(p.interior() for p in self.parts)

    @property
    def is_open(self) -> bool:
        return all(not p.lo_closed and not p.hi_closed for p in self.parts)

    # --- algebra --------------------------------------------------------------
    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return self._new(self.parts + other.parts)

    __or__ = union

    def complement(self) -> "IntervalUnion":
        out = []
        lo, lo_closed = -INF, False
        for p in self.parts:
            out.append(Interval(lo, p.lo, lo_closed, not p.lo_closed))
            lo, lo_closed = p.hi, not p.hi_closed
        out.append(Interval(lo, INF, lo_closed, False))
        # complement is taken without tolerance merging
        return IntervalUnion(out)

    def intersection(self, other: "IntervalUnion") -> "IntervalUnion":
        out = []
        i = j = 0
        a, b = self.parts, other.parts
        while i < len(a) and j < len(b):
            p, q = a[i], b[j]
            if p.lo > q.lo or (p.lo == q.lo and not p.lo_closed):
                lo, lo_closed = p.lo, p.lo_closed
            else:
                lo, lo_closed = q.lo, q.lo_closed
            if p.hi < q.hi or (p.hi == q.hi and not p.hi_closed):
                hi, hi_closed = p.hi, p.hi_closed
            else:
                hi, hi_closed = q.hi, q.hi_closed
            out.append(Interval(lo, hi, lo_closed, hi_closed))
            if p.hi < q.hi or (p.hi == q.hi and not p.hi_closed and q.hi_closed):
                i += 1
            else:
                j += 1
        return self._new(out)

    __and__ = intersection

    def difference(self, other: "IntervalUnion") -> "IntervalUnion":
        c = other.complement()
        return IntervalUnion(self.intersection(c).parts, self.tol)

    __sub__ = difference

    def issubset(self, other: "IntervalUnion") -> bool:
        if self.tol or other.tol:
            tol = max(self.tol, other.tol)
            return all(
                any(q.lo - tol <= p.lo and p.hi <= q.hi + tol for q in other.parts) for p in self.parts
            )
        return not self.difference(other)

    def __le__(self, other: "IntervalUnion") -> bool:
        return self.issubset(other)

    def affine(self, scale, shift) -> "IntervalUnion":
        """Image under ``x -> scale*x + shift`` with ``scale > 0``."""
        if scale <= 0:
            raise ValueError("affine image needs a positive scale")
        return self._new(
            Interval(scale * p.lo + shift, scale * p.hi + shift, p.lo_closed, p.hi_closed) for p in self.parts
        )

    def shrink(self, eps) -> "IntervalUnion":
        """Closed intervals ``[lo+eps, hi-eps]`` of every component."""
        return self._new(Interval.closed(p.lo + eps, p.hi - eps) for p in self.parts)

    def longest(self) -> Interval | None:
        if not self.parts:
            return None
        return max(self.parts, key=lambda p: p.hi - p.lo)

    def gaps(self) -> list:
        return [(p.hi, q.lo) for p, q in zip(self.parts, self.parts[1:])]

    def to_float(self) -> "IntervalUnion":
        return IntervalUnion(
            (Interval(float(p.lo), float(p.hi), p.lo_closed, p.hi_closed) for p in self.parts), self.tol
        )

    def indicator(self, x: np.ndarray) -> np.ndarray:
        """Vectorised membership test for float points."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for p in self.parts:
            lo, hi = float(p.lo), float(p.hi)
            left = x >= lo if p.lo_closed else x > lo
            right = x <= hi if p.hi_closed else x < hi
            out |= left & right
        return out


# --- vectorised float helpers ----------------------------------------------------


def merge_intervals(lefts: np.ndarray, rights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Union of closed intervals ``[lefts[i], rights[i]]`` as sorted disjoint arrays."""
    lefts = np.asarray(lefts, dtype=float)
    rights = np.asarray(rights, dtype=float)
    if lefts.size == 0:
        return lefts.copy(), rights.copy()
    order = np.argsort(lefts, kind="stable")
    lo = lefts[order]
    hi = np.maximum.accumulate(rights[order])
    # a new component starts where the left endpoint exceeds the running max
    start = np.empty(lo.size, dtype=bool)
    start[0] = True
    start[1:] = lo[1:] > hi[:-1]
    idx = np.flatnonzero(start)
    ends = np.append(idx[1:] - 1, lo.size - 1)
    return lo[idx], hi[ends]


def intersect_merged(a_lo, a_hi, b_lo, b_hi) -> tuple[np.ndarray, np.ndarray]:
    """Intersection of two sorted disjoint families of closed intervals."""
    out_lo, out_hi = [], []
    i = j = 0
    na, nb = len(a_lo), len(b_lo)
    while i < na and j < nb:
        lo = max(a_lo[i], b_lo[j])
        hi = min(a_hi[i], b_hi[j])
        if lo <= hi:
            out_lo.append(lo)
            out_hi.append(hi)
        if a_hi[i] < b_hi[j]:
            i += 1
        else:
            j += 1
    return np.asarray(out_lo, dtype=float), np.asarray(out_hi, dtype=float)


def to_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, ``"p/q"`` string or decimal literal."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def fmt_number(x):
    """JSON form of a number: ``"p/q"`` for rationals, float otherwise."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    return float(x)


def union_to_json(u: IntervalUnion) -> list:
    return [
        {"lo": fmt_number(p.lo), "hi": fmt_number(p.hi), "lo_closed": p.lo_closed, "hi_closed": p.hi_closed}
        for p in u
    ]


def union_from_json(items: Sequence[dict], exact: bool = True) -> IntervalUnion:
    conv = to_fraction if exact else float
    return IntervalUnion(
        Interval(conv(d["lo"]), conv(d["hi"]), bool(d["lo_closed"]), bool(d["hi_closed"])) for d in items
    )
