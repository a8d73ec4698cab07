"""Random self-similar iterated function systems on the line.

A system is a list of maps ``f_i(x) = r_i x + D_i`` whose translations
``D_i = t_i + Y_i`` are redrawn independently at every node of the L-ary
construction tree.  This module holds the data model, validation, the
similarity dimension, the supporting interval, and keyed sampling of the
level-n cylinder intervals ``f_i1 o ... o f_in([alpha, beta])``.

Systems built by composing maps of another system (subsystems, difference
systems) remember where they came from, so that sampling reads the parent's
tree and both views share one realisation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import rng
from .errors import BudgetExceeded, InsufficientScales, ValidationError
from .intervals import Interval, fmt_number, intersect_merged, merge_intervals, to_fraction
from .laws import SAMPLED, TRIANGULAR, UNIFORM, PerturbationLaw

RATIONAL = "rational"
FLOAT = "float"
DEFAULT_BUDGET = 2**22

Word = tuple  # letters 1..L


# ---------------------------------------------------------------------------
# data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Composite:
    """How a derived system reads its parent's realisation tree.

    ``kind == "words"``: letter j of the derived system is the composed map
    along ``words[j]`` of the parent.  ``kind == "difference"``: letter
    ``(i, j)`` is ``D_i`` of a second independent copy minus ``D_j`` of the
    first.
    """

    kind: str
    parent: "RIFSSpec"
    words: tuple = ()


@dataclass(frozen=True, eq=False)
class RIFSSpec:
    ratios: tuple
    laws: tuple
    mode: str = FLOAT
    interval: tuple | None = None  # optional explicit supporting interval
    composite: Composite | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "ratios", tuple(self.ratios))
        object.__setattr__(self, "laws", tuple(self.laws))
        if self.mode not in (RATIONAL, FLOAT):
            raise ValueError(f"unknown arithmetic mode {self.mode!r}")

    @property
    def L(self) -> int:
        return len(self.ratios)

    @property
    def centers(self) -> tuple:
        return tuple(law.center for law in self.laws)

    @property
    def half_widths(self) -> tuple:
        return tuple(law.half_width for law in self.laws)

    @property
    def is_homogeneous(self) -> bool:
        return len(set(self.ratios)) == 1 and 0 < self.ratios[0] < 1

    @property
    def key_width(self) -> int:
        """Number of 64-bit keys making up one node of the realisation tree."""
        if self.composite is None:
            return 1
        w = self.composite.parent.key_width
        return 2 * w if self.composite.kind == "difference" else w

    def __eq__(self, other) -> bool:
        if not isinstance(other, RIFSSpec):
            return NotImplemented
        return (
            self.ratios == other.ratios
            and self.laws == other.laws
            and self.mode == other.mode
            and self.interval == other.interval
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class HomogeneousRIFS(RIFSSpec):
    """All maps share the ratio ``a`` in (0, 1)."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_homogeneous:
            raise ValueError("homogeneous system needs one common ratio in (0, 1)")

    @classmethod
    def of(cls, a, laws: Sequence[PerturbationLaw], mode: str = FLOAT, **kw) -> "HomogeneousRIFS":
        return cls((a,) * len(laws), tuple(laws), mode, **kw)

    @property
    def ratio(self):
        return self.ratios[0]


def as_homogeneous(spec: RIFSSpec) -> HomogeneousRIFS:
    if isinstance(spec, HomogeneousRIFS):
        return spec
    return HomogeneousRIFS(spec.ratios, spec.laws, spec.mode, spec.interval, spec.composite)


def make_spec(ratios, laws, mode: str = FLOAT, **kw) -> RIFSSpec:
    """Build a spec, converting numbers to the arithmetic mode and upgrading
    to :class:`HomogeneousRIFS` when all ratios agree and lie in (0, 1)."""
    conv = to_fraction if mode == RATIONAL else float
    ratios = tuple(conv(r) for r in ratios)
    laws = tuple(
        PerturbationLaw(conv(l.center), conv(l.half_width), l.shape, l.offsets, l.values) for l in laws
    )
    if "interval" in kw and kw["interval"] is not None:
        kw["interval"] = tuple(conv(v) for v in kw["interval"])
    spec = RIFSSpec(ratios, laws, mode, **kw)
    if spec.L >= 1 and spec.is_homogeneous:
        return as_homogeneous(spec)
    return spec


def uniform_system(ratios, centers, half_widths, mode: str = FLOAT, shape: str = UNIFORM, **kw) -> RIFSSpec:
    L = len(ratios)
    if not isinstance(half_widths, (list, tuple)):
        half_widths = [half_widths] * L
    laws = [PerturbationLaw(c, h, shape) for c, h in zip(centers, half_widths)]
    return make_spec(ratios, laws, mode, **kw)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    index: int | None = None  # 1-based map index
    detail: str = ""

    def __str__(self) -> str:
        return self.code if self.index is None else f"{self.code}({self.index})"

    def to_json(self) -> dict:
        return {"code": self.code, "index": self.index, "detail": self.detail}


def _law_violations(law: PerturbationLaw, i: int) -> list[Violation]:
    out = []
    if not law.half_width > 0:
        out.append(Violation("DegenerateSupport", i, "half-width must be positive"))
        return out
    if law.shape == SAMPLED:
        off, val = law.offsets, law.values
        h = float(law.half_width)
        if not (math.isclose(off[0], -h, rel_tol=0, abs_tol=1e-12 * max(1, h))
                and math.isclose(off[-1], h, rel_tol=0, abs_tol=1e-12 * max(1, h))):
            out.append(Violation("SampledGridEndpoints", i, "grid must span exactly [-theta, theta]"))
        if np.any(val < 0) or not np.all(np.isfinite(val)):
            out.append(Violation("NegativeDensity", i))
        if np.any(val[1:-1] <= 0):
            out.append(Violation("DensityNotPositive", i, "density vanishes strictly inside the support"))
    if abs(law.mass() - 1) > 1e-9 and law.shape != SAMPLED:
        out.append(Violation("DensityNotNormalized", i))
    return out


def validate_spec(spec: RIFSSpec) -> list[Violation]:
    """Every invariant violation of ``spec``; an empty list means valid."""
    out: list[Violation] = []
    if len(spec.ratios) != len(spec.laws):
        out.append(Violation("LengthMismatch", None, "ratios and laws differ in length"))
    if len(spec.ratios) < 2:
        out.append(Violation("TooFewMaps", None, "at least two maps are required"))
    for i, r in enumerate(spec.ratios, 1):
        if r == 0:
            out.append(Violation("ZeroRatio", i))
        elif not -1 < r < 1:
            out.append(Violation("RatioOutOfRange", i))
        if spec.mode == RATIONAL and not isinstance(r, (Fraction, int)):
            out.append(Violation("NotRational", i, "ratio"))
    for i, law in enumerate(spec.laws, 1):
        out.extend(_law_violations(law, i))
        if spec.mode == RATIONAL:
            for name in ("center", "half_width"):
                if not isinstance(getattr(law, name), (Fraction, int)):
                    out.append(Violation("NotRational", i, name))
    if spec.interval is not None and not out:
        if not is_supporting(spec, spec.interval):
            out.append(Violation("NotSupporting", None, "explicit interval is not mapped into itself"))
    return out


def require_valid(spec: RIFSSpec) -> None:
    bad = validate_spec(spec)
    if bad:
        raise ValidationError(bad)


# ---------------------------------------------------------------------------
# dimension and supporting interval
# ---------------------------------------------------------------------------


def similarity_dimension(spec_or_ratios, tol: float = 1e-13) -> float:
    """Root ``s`` of ``sum |r_i|^s = 1`` by bisection."""
    ratios = spec_or_ratios.ratios if isinstance(spec_or_ratios, RIFSSpec) else spec_or_ratios
    logs = [math.log(abs(float(r))) for r in ratios]

    def excess(s):
        return math.fsum(math.exp(s * g) for g in logs) - 1.0

    lo, hi = 0.0, 1.0
    while excess(hi) > 0:
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _image_bounds(spec: RIFSSpec, lo, hi):
    """Smallest interval holding every ``f_i([lo, hi])`` over all draws."""
    los, his = [], []
    for r, law in zip(spec.ratios, spec.laws):
        t, h = law.center, law.half_width
        if r > 0:
            los.append(r * lo + t - h)
            his.append(r * hi + t + h)
        else:
            los.append(r * hi + t - h)
            his.append(r * lo + t + h)
    return min(los), max(his)


def is_supporting(spec: RIFSSpec, interval) -> bool:
    lo, hi = interval
    ilo, ihi = _image_bounds(spec, lo, hi)
    eps = 0 if spec.mode == RATIONAL else 1e-12 * max(1.0, abs(float(lo)), abs(float(hi)))
    return ilo >= lo - eps and ihi <= hi + eps


def minimal_supporting_interval(spec: RIFSSpec) -> tuple:
    """Fixed interval of ``[lo, hi] -> hull of the images``; exact in rational mode."""
    if all(r > 0 for r in spec.ratios) and spec.is_homogeneous:
        a = spec.ratios[0]
        lo = min(law.center - law.half_width for law in spec.laws) / (1 - a)
        hi = max(law.center + law.half_width for law in spec.laws) / (1 - a)
        return lo, hi
    # float iteration of the monotone contraction, then solve the linear
    # equations of the active maps exactly and check the result
    flo, fhi = 0.0, 0.0
    fspec = spec if spec.mode == FLOAT else to_float_spec(spec)
    for _ in range(10000):
        nlo, nhi = _image_bounds(fspec, flo, fhi)
        if nlo == flo and nhi == fhi:
            break
        flo, fhi = nlo, nhi
    best = None
    for i, (r1, law1) in enumerate(zip(spec.ratios, spec.laws)):
        for j, (r2, law2) in enumerate(zip(spec.ratios, spec.laws)):
            cand = _solve_active(r1, law1, r2, law2)
            if cand is None:
                continue
            lo, hi = cand
            if spec.mode == FLOAT:
                if abs(lo - flo) > 1e-9 * max(1, abs(flo)) or abs(hi - fhi) > 1e-9 * max(1, abs(fhi)):
                    continue
            if _image_bounds(spec, lo, hi) == (lo, hi) or (
                spec.mode == FLOAT and is_supporting(spec, (lo, hi))
            ):
                if best is None or hi - lo < best[1] - best[0]:
                    best = (lo, hi)
    return best if best is not None else (flo, fhi)


def _solve_active(r1, law1, r2, law2):
    # lo comes from map 1 and hi from map 2
    t1, h1, t2, h2 = law1.center, law1.half_width, law2.center, law2.half_width
    if r1 > 0 and r2 > 0:
        return (t1 - h1) / (1 - r1), (t2 + h2) / (1 - r2)
    # lo = r1*(hi or lo) + t1 - h1 ; hi = r2*(lo or hi) + t2 + h2
    if r1 < 0 and r2 < 0:
        # lo = r1 hi + c1, hi = r2 lo + c2
        c1, c2 = t1 - h1, t2 + h2
        det = 1 - r1 * r2
        return (c1 + r1 * c2) / det, (c2 + r2 * c1) / det
    if r1 > 0 > r2:
        lo = (t1 - h1) / (1 - r1)
        return lo, r2 * lo + t2 + h2
    hi = (t2 + h2) / (1 - r2)
    return r1 * hi + t1 - h1, hi


def supporting_interval(spec: RIFSSpec) -> tuple:
    """A compact interval mapped into itself by every map under every draw.

    An explicit interval attached to the spec is returned as is; otherwise
    the minimal one.
    """
    if spec.interval is not None:
        return spec.interval
    return minimal_supporting_interval(spec)


def to_float_spec(spec: RIFSSpec) -> RIFSSpec:
    if spec.mode == FLOAT:
        return spec
    laws = tuple(
        PerturbationLaw(float(l.center), float(l.half_width), l.shape, l.offsets, l.values) for l in spec.laws
    )
    interval = None if spec.interval is None else tuple(float(v) for v in spec.interval)
    cls = HomogeneousRIFS if isinstance(spec, HomogeneousRIFS) else RIFSSpec
    return cls(tuple(float(r) for r in spec.ratios), laws, FLOAT, interval, spec.composite)


# ---------------------------------------------------------------------------
# keyed draws
# ---------------------------------------------------------------------------

_COPY_TAG = 0x436F7079  # separates the two copies of a difference system


def root_state(spec: RIFSSpec, key) -> np.ndarray:
    """Node state (row of 64-bit keys) of the tree root for ``spec``."""
    key = np.uint64(key)
    if spec.composite is None or spec.composite.kind == "words":
        if spec.composite is not None:
            return root_state(spec.composite.parent, key)
        return np.array([key], dtype=np.uint64)
    parent = spec.composite.parent
    # copy 2 supplies the minuend, copy 1 the subtrahend
    k2, k1 = rng.trial_keys(int(key) ^ _COPY_TAG, [2, 1])
    return np.concatenate([root_state(parent, k2), root_state(parent, k1)])


def draw_letters(spec: RIFSSpec, states: np.ndarray, letters: Sequence[int]) -> dict:
    """Translations and child states of the given 0-based letters.

    ``states`` has shape ``(N, key_width)``.  Returns ``{letter: (D, child)}``
    with ``D`` of shape ``(N,)`` and ``child`` of shape ``(N, key_width)``.
    """
    letters = sorted(set(int(j) for j in letters))
    comp = spec.composite
    if comp is None:
        keys = states[:, 0]
        out = {}
        for j in letters:
            u, ck = rng.node_block(keys, j)
            out[j] = (spec.laws[j].sample(u), ck[:, None])
        return out
    if comp.kind == "words":
        parent = comp.parent
        pr = [float(r) for r in parent.ratios]
        cache = {(): (np.zeros(states.shape[0]), 1.0, states)}

        def node(prefix):
            if prefix in cache:
                return cache[prefix]
            T, scale, st = node(prefix[:-1])
            last = prefix[-1] - 1
            D, ch = draw_letters(parent, st, [last])[last]
            cache[prefix] = (T + scale * D, scale * pr[last], ch)
            return cache[prefix]

        out = {}
        for j in letters:
            T, _, st = node(tuple(comp.words[j]))
            out[j] = (T, st)
        return out
    parent = comp.parent
    Lp = parent.L
    w = parent.key_width
    s2, s1 = states[:, :w], states[:, w:]
    first = draw_letters(parent, s2, {j // Lp for j in letters})
    second = draw_letters(parent, s1, {j % Lp for j in letters})
    out = {}
    for j in letters:
        D2, c2 = first[j // Lp]
        D1, c1 = second[j % Lp]
        out[j] = (D2 - D1, np.concatenate([c2, c1], axis=1))
    return out


def draw_all(spec: RIFSSpec, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All ``L`` translations ``(N, L)`` and child states ``(N, L, key_width)``."""
    d = draw_letters(spec, states, range(spec.L))
    D = np.stack([d[j][0] for j in range(spec.L)], axis=1)
    C = np.stack([d[j][1] for j in range(spec.L)], axis=1)
    return D, C


def node_draws(spec: RIFSSpec, tree: rng.RealizationTree, word: Word = ()) -> np.ndarray:
    """The ``L`` translation draws attached to the node ``word``."""
    st = root_state(spec, tree.master_seed)[None, :]
    for letter in word:
        st = draw_letters(spec, st, [letter - 1])[letter - 1][1]
    return draw_all(spec, st)[0][0]


# ---------------------------------------------------------------------------
# cylinders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderInterval:
    word: Word
    left: float
    right: float

    @property
    def length(self) -> float:
        return self.right - self.left


@dataclass(frozen=True, eq=False)
class CylinderLevel:
    """All ``L^n`` level-n cylinders in lexicographic word order."""

    spec: RIFSSpec
    n: int
    left: np.ndarray
    right: np.ndarray
    translation: np.ndarray
    ratio: np.ndarray
    exact_length: object = None  # (beta - alpha) * a^n for homogeneous systems

    def __len__(self) -> int:
        return self.left.size

    def word(self, idx: int) -> Word:
        L = self.spec.L
        letters = []
        for _ in range(self.n):
            idx, d = divmod(idx, L)
            letters.append(d + 1)
        return tuple(reversed(letters))

    def index(self, word: Word) -> int:
        idx = 0
        for letter in word:
            idx = idx * self.spec.L + (letter - 1)
        return idx

    def __iter__(self) -> Iterator[CylinderInterval]:
        for k in range(len(self)):
            yield CylinderInterval(self.word(k), float(self.left[k]), float(self.right[k]))

    def __getitem__(self, k: int) -> CylinderInterval:
        return CylinderInterval(self.word(k), float(self.left[k]), float(self.right[k]))

    def union(self) -> tuple[np.ndarray, np.ndarray]:
        return merge_intervals(self.left, self.right)

    def measure(self) -> float:
        lo, hi = self.union()
        return float(np.sum(hi - lo))


def _check_budget(L: int, n: int, budget: int) -> None:
    if L**n > budget:
        raise BudgetExceeded(f"{L}^{n} = {L**n} cylinders exceed the budget {budget}")


def iter_levels(spec: RIFSSpec, tree: rng.RealizationTree, n: int, budget: int = DEFAULT_BUDGET):
    """Yield the cylinder levels ``0, 1, ..., n`` of one realisation."""
    if n < 0:
        raise ValueError("level must be nonnegative")
    _check_budget(spec.L, n, budget)
    alpha, beta = supporting_interval(spec)
    fa, fb = float(alpha), float(beta)
    r = np.array([float(x) for x in spec.ratios])
    states = root_state(spec, tree.master_seed)[None, :]
    T = np.zeros(1)
    R = np.ones(1)
    exact = beta - alpha
    homogeneous = spec.is_homogeneous
    for level in range(n + 1):
        lo = np.where(R > 0, R * fa, R * fb) + T
        hi = np.where(R > 0, R * fb, R * fa) + T
        yield CylinderLevel(spec, level, lo, hi, T, R, exact if homogeneous else None)
        if level == n:
            break
        D, C = draw_all(spec, states)
        T = (T[:, None] + R[:, None] * D).ravel()
        R = (R[:, None] * r[None, :]).ravel()
        states = C.reshape(-1, states.shape[1])
        if homogeneous:
            exact = exact * spec.ratios[0]


def sample_cylinders(spec: RIFSSpec, tree: rng.RealizationTree, n: int, budget: int = DEFAULT_BUDGET) -> CylinderLevel:
    """All level-n cylinder intervals of the realisation ``tree``."""
    level = None
    for level in iter_levels(spec, tree, n, budget):
        pass
    return level


def sample_levels(spec: RIFSSpec, tree: rng.RealizationTree, n: int, budget: int = DEFAULT_BUDGET) -> list[CylinderLevel]:
    return list(iter_levels(spec, tree, n, budget))


def translation_bounds(spec: RIFSSpec, word: Word) -> tuple[float, float]:
    """Deterministic range ``[t_w - theta_w, t_w + theta_w]`` of ``T_w``."""
    t = 0.0
    h = 0.0
    scale = 1.0
    for letter in word:
        law = spec.laws[letter - 1]
        t += scale * float(law.center)
        h += abs(scale) * float(law.half_width)
        scale *= float(spec.ratios[letter - 1])
    return t - h, t + h


# ---------------------------------------------------------------------------
# coverage and box counting
# ---------------------------------------------------------------------------


@dataclass
class CoverageStats:
    measures: list
    covered: Interval | None
    covered_length: float

    def to_json(self) -> dict:
        return {
            "measures": [float(m) for m in self.measures],
            "covered": None if self.covered is None else [self.covered.lo, self.covered.hi],
            "covered_length": self.covered_length,
        }


def coverage_statistics(levels: Sequence[CylinderLevel]) -> CoverageStats:
    """Union measure per level and the longest interval covered at every level.

    An interval only counts as covered when it is longer than every cylinder
    of the deepest level, i.e. when it is not just a single surviving cylinder.
    """
    levels = [lv for lv in levels if lv.n >= 1] or list(levels)
    measures = []
    cur_lo = cur_hi = None
    for lv in levels:
        lo, hi = lv.union()
        measures.append(float(np.sum(hi - lo)))
        if cur_lo is None:
            cur_lo, cur_hi = lo, hi
        else:
            cur_lo, cur_hi = intersect_merged(cur_lo, cur_hi, lo, hi)
    covered = None
    length = 0.0
    if cur_lo is not None and cur_lo.size:
        k = int(np.argmax(cur_hi - cur_lo))
        cand = float(cur_hi[k] - cur_lo[k])
        deepest = levels[-1]
        cyl = float(np.max(deepest.right - deepest.left))
        if cand > cyl * (1 + 1e-9):
            covered = Interval.closed(float(cur_lo[k]), float(cur_hi[k]))
            length = cand
    return CoverageStats(measures, covered, length)


def box_counts(lo: np.ndarray, hi: np.ndarray, scale: float, origin: float = 0.0) -> int:
    """Number of grid cells of side ``scale`` meeting a union of closed intervals.

    A cell counts when it meets an interval in positive length, so an endpoint
    lying on a grid line does not add a cell; point intervals count once.
    """
    a = np.floor((lo - origin) / scale).astype(np.int64)
    b = np.maximum(a, np.ceil((hi - origin) / scale).astype(np.int64) - 1)
    # count distinct integers in the union of [a_k, b_k]
    ma, mb = merge_intervals(a.astype(float), b.astype(float) + 0.5)
    return int(np.sum(np.floor(mb) - ma + 1))


def default_scales(level: CylinderLevel, count: int | None = None) -> list[float]:
    """Geometric scales from the support size down to the cylinder size."""
    alpha, beta = supporting_interval(level.spec)
    width = float(beta - alpha)
    rho = max(abs(float(r)) for r in level.spec.ratios)
    kmax = level.n
    ks = range(2, kmax + 1) if count is None else np.linspace(2, kmax, count)
    return [width * rho ** float(k) for k in ks]


def box_dimension_estimate(level: CylinderLevel, scales: Sequence[float] | None = None) -> float:
    """Least-squares slope of ``log N(scale)`` against ``log(1/scale)``."""
    if scales is None:
        scales = default_scales(level)
    scales = [float(s) for s in scales if s > 0]
    if len(scales) < 4:
        raise InsufficientScales(f"need at least 4 scales, got {len(scales)}")
    lo, hi = level.union()
    origin = float(supporting_interval(level.spec)[0])
    counts = [box_counts(lo, hi, s, origin) for s in scales]
    x = np.log(1.0 / np.asarray(scales))
    y = np.log(np.asarray(counts, dtype=float))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def law_to_json(law: PerturbationLaw) -> dict:
    shape = law.shape
    if shape == SAMPLED:
        shape = {"sampled": [[float(o), float(v)] for o, v in zip(law.offsets, law.values)]}
    return {"center": fmt_number(law.center), "half_width": fmt_number(law.half_width), "shape": shape}


def law_from_json(d: dict, mode: str) -> PerturbationLaw:
    conv = to_fraction if mode == RATIONAL else float
    shape = d.get("shape", UNIFORM)
    if isinstance(shape, dict):
        grid = np.asarray(shape["sampled"], dtype=float)
        return PerturbationLaw(conv(d["center"]), conv(d["half_width"]), SAMPLED, grid[:, 0], grid[:, 1])
    if shape not in (UNIFORM, TRIANGULAR):
        raise ValueError(f"unknown law shape {shape!r}")
    return PerturbationLaw(conv(d["center"]), conv(d["half_width"]), shape)


def spec_to_json(spec: RIFSSpec) -> dict:
    out = {
        "ratios": [fmt_number(r) for r in spec.ratios],
        "laws": [law_to_json(l) for l in spec.laws],
        "mode": spec.mode,
    }
    if spec.interval is not None:
        out["interval"] = [fmt_number(v) for v in spec.interval]
    if spec.composite is not None:
        comp = {"kind": spec.composite.kind, "parent": spec_to_json(spec.composite.parent)}
        if spec.composite.words:
            comp["words"] = [list(w) for w in spec.composite.words]
        out["composite"] = comp
    return out


def spec_from_json(d: dict) -> RIFSSpec:
    mode = d.get("mode", FLOAT)
    conv = to_fraction if mode == RATIONAL else float
    laws = [law_from_json(x, mode) for x in d["laws"]]
    ratios = [conv(r) for r in d["ratios"]]
    interval = d.get("interval")
    composite = None
    if "composite" in d:
        c = d["composite"]
        words = tuple(tuple(int(x) for x in w) for w in c.get("words", ()))
        composite = Composite(c["kind"], spec_from_json(c["parent"]), words)
    return make_spec(ratios, laws, mode, interval=None if interval is None else [conv(v) for v in interval],
                     composite=composite)
