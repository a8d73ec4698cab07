"""Ready-made systems used in examples, tests and the CLI."""
from __future__ import annotations

from fractions import Fraction

from .core import FLOAT, RATIONAL, HomogeneousRIFS, uniform_system
from .errors import InvalidParameters
from .intervals import to_fraction


def larsson_system(a, b, mode: str = FLOAT) -> HomogeneousRIFS:
    """Two maps of ratio ``a`` placing intervals of length ``a`` uniformly in
    ``[b, 1/2 - 3a/2]`` and ``[1/2 + a/2, 1 - b - a]``, inside ``[0, 1]``."""
    conv = to_fraction if mode == RATIONAL else float
    a, b = conv(a), conv(b)
    if not (a > 0 and b > 0 and 3 * a + 2 * b < 1):
        raise InvalidParameters(f"need a > 0, b > 0 and 3a + 2b < 1, got a={a}, b={b}")
    half = conv(Fraction(1, 2))
    lo1, hi1 = b, half - 3 * a / 2
    lo2, hi2 = half + a / 2, 1 - b - a
    centers = [(lo1 + hi1) / 2, (lo2 + hi2) / 2]
    widths = [(hi1 - lo1) / 2, (hi2 - lo2) / 2]
    return uniform_system([a, a], centers, widths, mode, interval=(conv(0), conv(1)))


def system_a(mode: str = RATIONAL) -> HomogeneousRIFS:
    """Three maps of ratio 2/5, centres 0, 1, 2, uniform half-width 3/10."""
    return uniform_system([Fraction(2, 5)] * 3, [0, 1, 2], Fraction(3, 10), mode)


def system_b(mode: str = RATIONAL) -> HomogeneousRIFS:
    """Two far-apart maps of ratio 2/5 (centres 0 and 10, half-width 1/2); subcritical."""
    return uniform_system([Fraction(2, 5)] * 2, [0, 10], Fraction(1, 2), mode)


PRESETS = {"system_a": system_a, "system_b": system_b}
