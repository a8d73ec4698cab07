"""Reductions between systems: positive ratios, one common ratio, subsystems
of composed maps, and the system generating the difference of two copies."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    Composite,
    HomogeneousRIFS,
    RIFSSpec,
    make_spec,
    require_valid,
    similarity_dimension,
    supporting_interval,
)
from .errors import BudgetExceeded, InvalidWord, ValidationError
from .intervals import fmt_number
from .laws import DEFAULT_GRID, UNIFORM, PerturbationLaw, convolve_laws, difference_law

MAP_CAP = 4096


@dataclass(frozen=True)
class SubsystemSelection:
    depth: int
    words: tuple

    def __post_init__(self):
        words = tuple(tuple(int(x) for x in w) for w in self.words)
        object.__setattr__(self, "words", words)
        if len(words) < 2:
            raise InvalidWord("a selection needs at least two words")
        if any(len(w) != self.depth for w in words):
            raise InvalidWord(f"all words must have length {self.depth}")
        if len(set(words)) != len(words):
            raise InvalidWord("selected words must be distinct")

    @classmethod
    def all_words(cls, L: int, depth: int) -> "SubsystemSelection":
        words = [()]
        for _ in range(depth):
            words = [w + (j,) for w in words for j in range(1, L + 1)]
        return cls(depth, tuple(words))


# ---------------------------------------------------------------------------
# composing maps
# ---------------------------------------------------------------------------


def composed_map(spec: RIFSSpec, word, points: int = DEFAULT_GRID):
    """Ratio and translation law of ``f_w = f_w1 o ... o f_wn``."""
    scale = 1 if spec.mode == "rational" else 1.0
    center = 0 * scale
    width = 0 * scale
    terms = []
    for letter in word:
        law = spec.laws[letter - 1]
        terms.append((scale, law))
        center += scale * law.center
        width += abs(scale) * law.half_width
        scale *= spec.ratios[letter - 1]
    if len(word) == 1:
        return scale, spec.laws[word[0] - 1]
    if width == 0:
        return scale, PerturbationLaw(center, width, UNIFORM)
    return scale, convolve_laws(terms, center, width, points)


def compose_words(spec: RIFSSpec, words: Sequence, points: int = DEFAULT_GRID, **kw) -> RIFSSpec:
    """System of the composed maps along ``words``, driven by ``spec``'s tree.

    Words may have different lengths as long as none is a prefix of another.
    """
    words = tuple(tuple(int(x) for x in w) for w in words)
    for w in words:
        if not w or any(not 1 <= x <= spec.L for x in w):
            raise InvalidWord(f"word {w} is not over the alphabet 1..{spec.L}")
    ratios, laws, memo = [], [], {}
    for w in words:
        if w not in memo:
            memo[w] = composed_map(spec, w, points)
        r, law = memo[w]
        ratios.append(r)
        laws.append(law)
    return make_spec(ratios, laws, spec.mode, composite=Composite("words", spec, words), **kw)


def subsystem(spec: RIFSSpec, sel: SubsystemSelection, points: int = DEFAULT_GRID) -> RIFSSpec:
    """The system ``{f_w : w in U}``; its attractor lies inside the parent's."""
    return compose_words(spec, sel.words, points)


# ---------------------------------------------------------------------------
# positive ratios
# ---------------------------------------------------------------------------


@dataclass
class PositivizeResult:
    spec: RIFSSpec
    depth: int
    words: tuple
    s_input: float
    s_output: float
    negative_letter: int | None

    def __iter__(self):
        yield self.spec
        yield self.depth

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "negative_letter": self.negative_letter,
            "map_count": len(self.words),
            "word_lengths": dict(sorted(Counter(len(w) for w in self.words).items())),
            "s_input": self.s_input,
            "s_output": self.s_output,
        }


def positivize_depth(ratios, s: float, eps: float, letter: int) -> int:
    """Smallest n with ``(sum |r_i|^(s-eps))^n >= |r_letter|^(eps-s)``.

    Compared in logarithms with a relative slack of 1e-12, so that the
    equality cases common with dyadic ratios do not hinge on rounding.
    """
    sp = s - eps
    log_base = math.log(math.fsum(abs(float(r)) ** sp for r in ratios))
    log_target = -sp * math.log(abs(float(ratios[letter - 1])))
    if log_base <= 0:
        raise ValueError("eps must be positive for the depth search")
    n = 1
    while n * log_base < log_target * (1 - 1e-12):
        n += 1
    return n


def positivize(spec: RIFSSpec, eps: float, points: int = DEFAULT_GRID) -> PositivizeResult:
    """Subsystem with positive ratios losing less than ``eps`` in dimension.

    Each depth-n word with a negative composed ratio is extended by one more
    negative letter, so its ratio turns positive; the words stay prefix-free.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    require_valid(spec)
    s = similarity_dimension(spec)
    if all(r > 0 for r in spec.ratios):
        words = tuple((j,) for j in range(1, spec.L + 1))
        return PositivizeResult(spec, 1, words, s, s, None)
    # the negative ratio of largest modulus needs the smallest depth
    neg = min((j for j in range(1, spec.L + 1) if spec.ratios[j - 1] < 0), key=lambda j: spec.ratios[j - 1])
    n = positivize_depth(spec.ratios, s, eps, neg)
    words = [()]
    for _ in range(n):
        words = [w + (j,) for w in words for j in range(1, spec.L + 1)]
    out = []
    for w in words:
        sign = 1
        for x in w:
            if spec.ratios[x - 1] < 0:
                sign = -sign
        out.append(w if sign > 0 else w + (neg,))
    result = compose_words(spec, out, points)
    s_out = similarity_dimension(result)
    return PositivizeResult(result, n, tuple(out), s, s_out, neg)


# ---------------------------------------------------------------------------
# one common ratio
# ---------------------------------------------------------------------------


def _largest_remainder(k: int, p: Sequence[float]) -> tuple:
    raw = [k * x for x in p]
    base = [int(math.floor(x)) for x in raw]
    rest = k - sum(base)
    order = sorted(range(len(p)), key=lambda i: (-(raw[i] - base[i]), i))
    for i in order[:rest]:
        base[i] += 1
    return tuple(base)


def _multinomial(k: int, parts: Sequence[int]) -> int:
    out = math.factorial(k)
    for x in parts:
        out //= math.factorial(x)
    return out


def _class_sequences(counts: tuple):
    """Distinct arrangements of a multiset of class labels, lexicographic."""
    counts = list(counts)
    total = sum(counts)
    seq = []

    def rec():
        if len(seq) == total:
            yield tuple(seq)
            return
        for c, m in enumerate(counts):
            if m:
                counts[c] -= 1
                seq.append(c)
                yield from rec()
                seq.pop()
                counts[c] += 1

    yield from rec()


@dataclass
class HomogenizeResult:
    system: HomogeneousRIFS
    selection: SubsystemSelection
    s_achieved: float
    s_input: float
    k: int
    composition: tuple
    class_ratios: tuple
    class_sizes: tuple
    positivized: PositivizeResult | None = None

    def __iter__(self):
        yield self.system
        yield self.selection
        yield self.s_achieved

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "composition": list(self.composition),
            "class_ratios": [fmt_number(r) for r in self.class_ratios],
            "class_sizes": list(self.class_sizes),
            "map_count": len(self.selection.words),
            "ratio": fmt_number(self.system.ratio),
            "s_input": self.s_input,
            "s_achieved": self.s_achieved,
            "positivize_depth": None if self.positivized is None else self.positivized.depth,
        }


def homogenize_plan(ratios, s: float, eps: float, cap: int = MAP_CAP, k_max: int = 10000):
    """Search ``k`` for a composition whose words share one ratio and whose
    dimension exceeds ``s - eps``.  Returns ``(k, composition, classes, count, ratio, s_k)``."""
    groups: dict = {}
    for j, r in enumerate(ratios, 1):
        groups.setdefault(r, []).append(j)
    classes = sorted(groups.items(), key=lambda kv: min(kv[1]))
    p = [len(js) * float(r) ** s for r, js in classes]
    for k in range(1, k_max + 1):
        comp = _largest_remainder(k, p)
        count = _multinomial(k, comp)
        for (r, js), m in zip(classes, comp):
            count *= len(js) ** m
        ratio = 1
        for (r, _), m in zip(classes, comp):
            ratio = ratio * r**m
        if count >= 2:
            s_k = math.log(count) / -math.log(float(ratio))
            if s_k > s - eps:
                if count > cap:
                    raise BudgetExceeded(f"{count} maps needed at k={k} exceed the cap {cap}")
                return k, comp, classes, count, ratio, s_k
        if count > cap:
            raise BudgetExceeded(f"{count} maps at k={k} exceed the cap {cap} before reaching s - eps")
    raise BudgetExceeded("no admissible composition found")


def homogenize(spec: RIFSSpec, eps: float, cap: int = MAP_CAP, points: int = DEFAULT_GRID) -> HomogenizeResult:
    """Homogeneous subsystem of words with fixed letter counts and ``s_k > s - eps``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    require_valid(spec)
    s_input = similarity_dimension(spec)
    pos = None
    base = spec
    if any(r < 0 for r in spec.ratios):
        pos = positivize(spec, eps / 2, points)
        base = pos.spec
    s_base = similarity_dimension(base)
    k, comp, classes, count, ratio, s_k = homogenize_plan(base.ratios, s_base, eps - (s_input - s_base), cap)
    words = []
    for seq in _class_sequences(comp):
        partial = [()]
        for c in seq:
            partial = [w + (j,) for w in partial for j in classes[c][1]]
        words.extend(partial)
    words.sort()
    sel = SubsystemSelection(k, tuple(words))
    system = subsystem(base, sel, points)
    return HomogenizeResult(
        system, sel, s_k, s_input, k, comp, tuple(r for r, _ in classes), tuple(len(js) for _, js in classes), pos
    )


# ---------------------------------------------------------------------------
# differences
# ---------------------------------------------------------------------------


def difference_system(h: HomogeneousRIFS, points: int = DEFAULT_GRID) -> HomogeneousRIFS:
    """L^2 maps ``a x + (D'_i - D_j)`` generating ``C_2 - C_1``.

    Map ``(i, j)`` has index ``(i-1) L + j`` (1-based); its law is the
    cross-correlation of the two letter laws.
    """
    if h.L < 2:
        raise ValidationError(["TooFewMaps"])
    if not h.is_homogeneous:
        raise ValidationError(["NotHomogeneous"])
    memo = {}
    laws = []
    for i in range(h.L):
        for j in range(h.L):
            key = (i, j)
            if key not in memo:
                memo[key] = difference_law(h.laws[i], h.laws[j], points)
            laws.append(memo[key])
    interval = None
    if h.interval is not None:
        alpha, beta = supporting_interval(h)
        interval = (alpha - beta, beta - alpha)
    return HomogeneousRIFS.of(h.ratio, laws, h.mode, interval=interval, composite=Composite("difference", h))
