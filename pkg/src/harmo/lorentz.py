"""Lorentz L^(p,q) norms on discretely weighted samples.

The discrete distribution function of a weighted sample is exactly a step
function, so every norm here is evaluated in closed form per breakpoint --
there is no quadrature tolerance anywhere in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import InvalidSampleError, UnsupportedDimensionError
from .grid import GridSpec, TensorField, gradient_values

__all__ = [
    "LorentzExponent",
    "WeightedSample",
    "distribution_function",
    "lorentz_norm",
    "sobolev_lorentz_norm",
    "barw_norm",
    "field_sample",
]


@dataclass(frozen=True)
class LorentzExponent:
    """Exponent pair (p, q), p,q in [1, inf]; p = inf forces q = inf."""

    p: float
    q: float

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        if not (p >= 1.0 and q >= 1.0):
            raise InvalidSampleError(f"Lorentz exponents must be >= 1, got ({p}, {q})")
        if math.isinf(p) and not math.isinf(q):
            raise InvalidSampleError("p = inf requires q = inf (L^(inf,q) is rejected)")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)


class WeightedSample:
    """Finite list of |f| values with matching positive measure weights."""

    def __init__(self, values, weights):
        values = np.abs(np.asarray(values, dtype=float).ravel())
        weights = np.asarray(weights, dtype=float).ravel()
        if values.size == 0:
            raise InvalidSampleError("empty sample")
        if values.shape != weights.shape:
            raise InvalidSampleError("values and weights must have equal length")
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(weights)):
            raise InvalidSampleError("sample contains non-finite entries")
        if np.any(weights <= 0):
            raise InvalidSampleError("weights must be strictly positive")
        self.values = values
        self.weights = weights


def field_sample(
    values: NDArray, grid: GridSpec, volume_density: NDArray | None = None
) -> WeightedSample:
    """Sample of node values weighted by cell volume (times sqrt(det g) if given)."""
    w = grid.quadrature_weights()
    if volume_density is not None:
        w = w * volume_density
    # Trapezoid corners on box grids can carry weight 0 only if spacing were 0;
    # weights here are always positive.
    return WeightedSample(np.ravel(values), np.ravel(w))


def distribution_function(sample: WeightedSample) -> tuple[NDArray, NDArray]:
    """Distribution function mu(lambda) = vol({|f| > lambda}) as a step function.

    Returns ``(breakpoints, tails)``: distinct sample values v_1 < ... < v_k
    and tails T_i = vol({|f| >= v_i}), so that for lambda in [v_{i-1}, v_i)
    (with v_0 = 0) one has mu(lambda) = T_i, and mu = 0 for lambda >= v_k.
    Ties are merged, hence the result is independent of input order.
    """
    order = np.argsort(sample.values, kind="stable")
    v = sample.values[order]
    w = sample.weights[order]
    distinct, start = np.unique(v, return_index=True)
    # tail weight at each distinct value: total weight of values >= v_i
    suffix = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    tails = suffix[start]
    return distinct, tails


def evaluate_distribution(sample: WeightedSample, lam: NDArray) -> NDArray:
    """mu(lambda) for given lambda values (right-continuous, nonincreasing)."""
    v, tails = distribution_function(sample)
    lam = np.asarray(lam, dtype=float)
    # mu(lam) = total weight of values > lam = tail of the smallest v_i > lam
    idx = np.searchsorted(v, lam, side="right")
    padded = np.concatenate([tails, [0.0]])
    return padded[idx]


def lorentz_norm(sample: WeightedSample, e: LorentzExponent) -> float:
    """Closed-form L^(p,q) norm of the step distribution.

    ||f||^q = p * integral_0^inf lambda^(q-1) mu(lambda)^(q/p) d lambda for
    finite q; q = inf gives sup_lambda lambda * mu(lambda)^(1/p).
    """
    v, tails = distribution_function(sample)
    positive = v > 0
    v = v[positive]
    tails = tails[positive]
    if v.size == 0:
        return 0.0
    p, q = e.p, e.q
    if math.isinf(q):
        if math.isinf(p):
            return float(v[-1])
        # sup over [v_{i-1}, v_i) is attained as lambda -> v_i^-
        return float(np.max(v * tails ** (1.0 / p)))
    lower = np.concatenate([[0.0], v[:-1]])
    pieces = (v**q - lower**q) * tails ** (q / p)
    return float((p / q * np.sum(pieces)) ** (1.0 / q))


def _tensor_g_norm(values: NDArray, ginv: NDArray, order: int, grid_dim: int) -> NDArray:
    """Pointwise |T|_g for a fully covariant tensor of the given order."""
    if order == 0:
        return np.abs(values)
    sq = values
    # contract each covariant slot with g^{-1}
    letters = "abcdef"[:order]
    dual = "uvwxyz"[:order]
    spec = (
        "..." + letters + ","
        + ",".join("..." + letters[i] + dual[i] for i in range(order))
        + ",..." + dual + "->..."
    )
    args = [sq] + [ginv] * order + [sq]
    out = np.einsum(spec, *args, optimize=True)
    return np.sqrt(np.maximum(out, 0.0))


def sobolev_lorentz_norm(field: TensorField, metric, k: int, e: LorentzExponent) -> float:
    """Sum over derivative orders 0..k of the L^(p,q) norm of |grad^j f|_g.

    ``metric`` supplies the pointwise inner product and the volume density
    sqrt(det g); coordinate (not covariant) derivatives are used, matching
    the flat-background norms of the estimates.
    """
    if k < 0 or k > 2:
        raise InvalidSampleError("sobolev_lorentz_norm supports orders k <= 2")
    grid = field.grid
    ginv = metric.inverse()
    dens = metric.volume_density()
    total = 0.0
    vals = field.values
    for j in range(k + 1):
        mag = _tensor_g_norm(vals, ginv, j + field.total_rank, grid.dim)
        total += lorentz_norm(field_sample(mag, grid, dens), e)
        if j < k:
            vals = gradient_values(vals, grid)
    return total


def barw_norm(field: TensorField, grid: GridSpec | None = None) -> float:
    """||f||_inf + ||grad f||_(n,1) + ||grad^2 f||_(n/2,1) with Euclidean weights."""
    grid = grid or field.grid
    n = grid.dim
    if n < 3:
        raise UnsupportedDimensionError("barw_norm requires dimension n >= 3")
    vals = field.values
    if field.total_rank != 0:
        raise InvalidSampleError("barw_norm expects a scalar field")
    sup = float(np.max(np.abs(vals)))
    d1 = gradient_values(vals, grid)
    d2 = gradient_values(d1, grid)
    mag1 = np.sqrt(np.sum(d1**2, axis=-1))
    mag2 = np.sqrt(np.sum(d2**2, axis=(-2, -1)))
    n1 = lorentz_norm(field_sample(mag1, grid), LorentzExponent(n, 1))
    n2 = lorentz_norm(field_sample(mag2, grid), LorentzExponent(n / 2, 1))
    return sup + n1 + n2
