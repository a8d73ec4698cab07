"""Perturbation laws of the random translations ``D_i = t_i + Y_i``.

A law is a centre ``t``, a half-width ``theta`` and the shape of the density
of the centred part ``Y`` on ``(-theta, theta)``: uniform, symmetric
triangular, or a sampled grid of ``(offset, density)`` pairs interpolated
linearly.  ``theta == 0`` is accepted as a point mass so that deterministic
systems can be simulated, but such laws fail validation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import fft as sfft

UNIFORM = "uniform"
TRIANGULAR = "triangular"
SAMPLED = "sampled"

DEFAULT_GRID = 2**12


@dataclass(frozen=True, eq=False)
class PerturbationLaw:
    center: object
    half_width: object
    shape: str = UNIFORM
    # sampled shape: offsets in [-half_width, half_width] and density values
    offsets: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.shape not in (UNIFORM, TRIANGULAR, SAMPLED):
            raise ValueError(f"unknown law shape {self.shape!r}")
        if self.shape == SAMPLED:
            if self.offsets is None or self.values is None:
                raise ValueError("sampled law needs offsets and values")
            off = np.asarray(self.offsets, dtype=float)
            val = np.asarray(self.values, dtype=float)
            if off.ndim != 1 or off.shape != val.shape or off.size < 2:
                raise ValueError("sampled grid must be two equal 1-d arrays of length >= 2")
            if np.any(np.diff(off) <= 0):
                raise ValueError("sampled offsets must be strictly increasing")
            mass = np.trapezoid(val, off)
            if mass <= 0:
                raise ValueError("sampled density has no mass")
            object.__setattr__(self, "offsets", off)
            object.__setattr__(self, "values", val / mass)
            cdf = np.concatenate([[0.0], np.cumsum(0.5 * (val[1:] + val[:-1]) * np.diff(off))]) / mass
            object.__setattr__(self, "_cdf", cdf)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PerturbationLaw):
            return NotImplemented
        if (self.center, self.half_width, self.shape) != (other.center, other.half_width, other.shape):
            return False
        if self.shape != SAMPLED:
            return True
        return np.array_equal(self.offsets, other.offsets) and np.array_equal(self.values, other.values)

    __hash__ = None

    @property
    def is_degenerate(self) -> bool:
        return self.half_width <= 0

    @property
    def support(self) -> tuple:
        return (self.center - self.half_width, self.center + self.half_width)

    def with_center(self, center) -> "PerturbationLaw":
        return PerturbationLaw(center, self.half_width, self.shape, self.offsets, self.values)

    # --- densities of the centred variable -----------------------------------
    def centered_pdf(self, u) -> np.ndarray:
        """Density of ``Y`` at offsets ``u``; zero outside the open support."""
        u = np.asarray(u, dtype=float)
        h = float(self.half_width)
        if h <= 0:
            return np.zeros_like(u)
        inside = np.abs(u) < h
        if self.shape == UNIFORM:
            return np.where(inside, 0.5 / h, 0.0)
        if self.shape == TRIANGULAR:
            return np.where(inside, (h - np.abs(u)) / (h * h), 0.0)
        scale = h / self.offsets[-1] if self.offsets[-1] != h else 1.0
        vals = np.interp(u / scale, self.offsets, self.values, left=0.0, right=0.0) / scale
        return np.where(inside, vals, 0.0)

    def pdf(self, x) -> np.ndarray:
        return self.centered_pdf(np.asarray(x, dtype=float) - float(self.center))

    def centered_cdf(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        h = float(self.half_width)
        if h <= 0:
            return (u >= 0).astype(float)
        v = np.clip(u, -h, h)
        if self.shape == UNIFORM:
            return (v + h) / (2 * h)
        if self.shape == TRIANGULAR:
            z = v / h
            return np.where(z < 0, 0.5 * (1 + z) ** 2, 1 - 0.5 * (1 - z) ** 2)
        # linear interpolation of the trapezoid cumulative mass
        return np.interp(v * self.offsets[-1] / h, self.offsets, self._cdf)

    @property
    def sup_density(self) -> float:
        h = float(self.half_width)
        if h <= 0:
            return float("inf")
        if self.shape == UNIFORM:
            return 0.5 / h
        if self.shape == TRIANGULAR:
            return 1.0 / h
        return float(np.max(self.values)) * self.offsets[-1] / h

    # --- sampling --------------------------------------------------------------
    def centered_quantile(self, q) -> np.ndarray:
        """Inverse CDF of ``Y``; maps (0,1) into (-theta, theta)."""
        q = np.asarray(q, dtype=float)
        h = float(self.half_width)
        if h <= 0:
            return np.zeros_like(q)
        if self.shape == UNIFORM:
            return h * (2 * q - 1)
        if self.shape == TRIANGULAR:
            return h * np.where(q < 0.5, np.sqrt(2 * q) - 1, 1 - np.sqrt(2 * (1 - q)))
        return np.interp(q, self._cdf, self.offsets) * h / self.offsets[-1]

    def sample(self, q) -> np.ndarray:
        """Translation draws ``t + Y`` from uniforms ``q``."""
        return float(self.center) + self.centered_quantile(q)

    def grid(self, n: int = 513) -> tuple[np.ndarray, np.ndarray]:
        """Offsets and density values of ``Y`` on a uniform grid over ``[-theta, theta]``."""
        h = float(self.half_width)
        u = np.linspace(-h, h, n)
        if self.shape == SAMPLED:
            return u, np.interp(u * self.offsets[-1] / h, self.offsets, self.values) * self.offsets[-1] / h
        if self.shape == UNIFORM:
            return u, np.full(n, 0.5 / h)
        return u, (h - np.abs(u)) / (h * h)

    def mass(self) -> float:
        """Numerical integral of the density (close to 1 for a valid law)."""
        u, v = self.grid(4097)
        return float(np.trapezoid(v, u))


def _scaled_grid(law: PerturbationLaw, scale: float, dx: float) -> np.ndarray:
    """Density of ``scale * Y`` sampled at spacing ``dx`` around 0 (odd length)."""
    h = abs(scale) * float(law.half_width)
    m = int(np.ceil(h / dx - 0.5))
    if m < 1:
        return np.array([1.0 / dx])
    u = np.arange(-m, m + 1) * dx
    # cell averages via the CDF keep the mass exact on coarse grids
    p = (u + 0.5 * dx) / scale
    q = (u - 0.5 * dx) / scale
    return (law.centered_cdf(np.maximum(p, q)) - law.centered_cdf(np.minimum(p, q))) / dx


def convolve_laws(terms: Sequence[tuple[float, PerturbationLaw]], center, half_width=None,
                  points: int = DEFAULT_GRID) -> PerturbationLaw:
    """Law of ``center + sum_k c_k Y_k`` for independent centred ``Y_k``.

    Each term is ``(c_k, law_k)``.  The support is exactly
    ``[-sum |c_k| theta_k, sum |c_k| theta_k]``; pass ``half_width`` to keep it
    as an exact rational.  A single uniform or triangular term stays in closed
    form; anything else becomes a sampled law on ``points`` grid points.
    """
    terms = [(c, law) for c, law in terms if law.half_width > 0 and c != 0]
    if not terms:
        raise ValueError("convolution of point masses is degenerate")
    if half_width is None:
        half_width = sum(abs(c) * law.half_width for c, law in terms)
    width = float(half_width)
    if len(terms) == 1 and terms[0][1].shape != SAMPLED:
        return PerturbationLaw(center, half_width, terms[0][1].shape)
    if len(terms) == 1:
        c, law = terms[0]
        u = np.linspace(-width, width, points)
        return _sampled(center, half_width, u, law.centered_pdf(u / float(c)) / abs(float(c)))
    dx = width / points
    grids = [_scaled_grid(law, float(c), dx) for c, law in terms]
    # one transform per term and a single inverse for the whole product
    n_full = sum(g.size for g in grids) - len(grids) + 1
    nfft = sfft.next_fast_len(n_full, real=True)
    spec = np.ones(nfft // 2 + 1, dtype=complex)
    for g in grids:
        spec *= sfft.rfft(g * dx, nfft)
    dens = np.clip(sfft.irfft(spec, nfft)[:n_full] / dx, 0.0, None)
    n = dens.size
    u_fine = (np.arange(n) - (n - 1) / 2) * dx
    u = np.linspace(-width, width, points)
    vals = np.interp(u, u_fine, dens, left=0.0, right=0.0)
    vals[0] = vals[-1] = 0.0
    # the interpolated tails must stay strictly positive inside the support
    vals[1:-1] = np.maximum(vals[1:-1], 1e-12 * vals.max())
    return _sampled(center, half_width, u, vals)


def _sampled(center, width, u, vals) -> PerturbationLaw:
    return PerturbationLaw(center, width, SAMPLED, offsets=np.asarray(u, dtype=float), values=np.asarray(vals, dtype=float))


def difference_law(first: PerturbationLaw, second: PerturbationLaw, points: int = DEFAULT_GRID) -> PerturbationLaw:
    """Law of ``D - D'`` for independent ``D ~ first`` and ``D' ~ second``."""
    center = first.center - second.center
    hw = first.half_width + second.half_width
    if first.shape == UNIFORM and second.shape == UNIFORM and first.half_width == second.half_width:
        return PerturbationLaw(center, hw, TRIANGULAR)
    return convolve_laws([(1, first), (-1, second)], center, hw, points)
