"""Finite-horizon interaction kernels and their cell-mass quadrature weights.

A kernel is a one-sided probability density w(h) = rho(h/delta)/delta supported
on [0, delta], where rho is a named unit-mass profile on [0, 1].  Profiles ship
with closed-form antiderivatives, so partial masses (and therefore the
quadrature weights built from them) are exact to round-off.  No numeric
quadrature of the kernel happens anywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kernel",
    "QuadratureWeights",
    "PROFILE_NAMES",
    "compute_weights",
]


def _rho_uniform(s):
    return np.ones_like(np.asarray(s, dtype=float))


def _cdf_uniform(s):
    return np.asarray(s, dtype=float)


def _rho_triangular(s):
    s = np.asarray(s, dtype=float)
    return 2.0 * (1.0 - s)


def _cdf_triangular(s):
    s = np.asarray(s, dtype=float)
    return s * (2.0 - s)


def _rho_quadratic(s):
    s = np.asarray(s, dtype=float)
    return 1.5 * (1.0 - s * s)


def _cdf_quadratic(s):
    s = np.asarray(s, dtype=float)
    return 0.5 * s * (3.0 - s * s)


# name -> (density rho on [0,1], antiderivative R with R(0)=0, R(1)=1)
_PROFILES = {
    "uniform": (_rho_uniform, _cdf_uniform),
    "triangular": (_rho_triangular, _cdf_triangular),
    "quadratic": (_rho_quadratic, _cdf_quadratic),
}
_ALIASES = {"triangular_decreasing": "triangular"}

PROFILE_NAMES = tuple(sorted(_PROFILES))


@dataclass(frozen=True)
class Kernel:
    """One-sided interaction kernel w(h) = rho(h/delta)/delta on [0, delta].

    ``delta`` is the horizon: the maximum pairwise interaction distance.
    The density integrates to one over [0, delta] by construction.
    """

    delta: float
    profile: str = "uniform"

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0.0):
            raise ValueError(f"horizon delta must be positive and finite, got {self.delta}")
        name = _ALIASES.get(self.profile, self.profile)
        if name not in _PROFILES:
            raise ValueError(
                f"unknown kernel profile {self.profile!r}; valid profiles: "
                + ", ".join(PROFILE_NAMES)
            )
        object.__setattr__(self, "profile", name)

    def density(self, h):
        """Evaluate w(h); zero outside [0, delta]."""
        h = np.asarray(h, dtype=float)
        rho, _ = _PROFILES[self.profile]
        inside = (h >= 0.0) & (h <= self.delta)
        s = np.clip(h / self.delta, 0.0, 1.0)
        vals = np.where(inside, rho(s) / self.delta, 0.0)
        return float(vals) if vals.ndim == 0 else vals

    def cumulative(self, h):
        """Exact mass on [0, h], clamped to the support; vectorized."""
        _, cdf = _PROFILES[self.profile]
        s = np.clip(np.asarray(h, dtype=float) / self.delta, 0.0, 1.0)
        out = cdf(s)
        return float(out) if out.ndim == 0 else out

    def mass(self, a: float, b: float) -> float:
        """Exact integral of the kernel over [a, b].

        Integration limits are clamped to the support [0, delta]; computed
        from the profile antiderivative, so the result carries no quadrature
        error.  Requires 0 <= a <= b.
        """
        if not (0.0 <= a <= b):
            raise ValueError(f"need 0 <= a <= b, got a={a}, b={b}")
        return self.cumulative(b) - self.cumulative(a)


@dataclass(frozen=True)
class QuadratureWeights:
    """Weights W_1..W_{max(r,1)} that turn the horizon integral into a cell sum.

    ``r = floor(delta / dx)`` counts whole cells inside the horizon.  The
    weights satisfy dx * sum_k k * W_k = 1 exactly (up to round-off) for every
    (dx, delta) pair, which is what makes the induced scheme consistent.
    """

    dx: float
    delta: float
    r: int
    weights: np.ndarray  # units 1/length

    @property
    def n_terms(self) -> int:
        return len(self.weights)

    def normalization_defect(self) -> float:
        """|dx * sum_k k W_k - 1|; should sit at round-off level."""
        k = np.arange(1, self.n_terms + 1, dtype=float)
        return abs(self.dx * float(np.dot(k, self.weights)) - 1.0)


def compute_weights(kernel: Kernel, dx: float) -> QuadratureWeights:
    """Cell masses of the kernel, averaged over the jump length k*dx.

    W_k = (1/(k dx)) * integral of w over [(k-1) dx, k dx] for k = 1..max(r,1),
    and the residual mass on [r dx, delta] is folded into W_r.  When
    delta < dx the whole unit mass lands in W_1 = 1/dx, which degenerates the
    nonlocal update into the classical three-point scheme.
    """
    if not (math.isfinite(dx) and dx > 0.0):
        raise ValueError(f"dx must be positive and finite, got {dx}")
    r = int(math.floor(kernel.delta / dx))
    n = max(r, 1)
    edges = np.arange(n + 1, dtype=float) * dx
    cumulative = kernel.cumulative(edges)
    w = np.diff(cumulative) / (np.arange(1, n + 1, dtype=float) * dx)
    if r >= 1:
        # residual mass beyond r dx; the profile antiderivative makes the
        # total exactly one, so the tail is 1 - cumulative(r dx) to round-off
        w[r - 1] += (1.0 - cumulative[r]) / (r * dx)
    return QuadratureWeights(dx=dx, delta=kernel.delta, r=r, weights=w)
