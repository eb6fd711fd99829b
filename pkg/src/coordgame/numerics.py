"""Scalar numerics: Gaussian CDF, quadrature, entropies, bisection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import integrate, special

from .exceptions import (
    BracketError,
    InvalidArgumentError,
    InvalidDensityError,
    NumericalDomainError,
)

LOG2E = 1.0 / math.log(2.0)
DENSITY_FLOOR = 1e-300
_SQRT_2PI = math.sqrt(2.0 * math.pi)

KINDS = ("gauss_hermite", "trapezoid_truncated")


@dataclass(frozen=True)
class QuadratureSpec:
    """How to take expectations over a standard Gaussian.

    ``truncation_sigmas`` is only used by the trapezoid rule.
    """

    node_count: int = 96
    kind: str = "gauss_hermite"
    truncation_sigmas: float = 8.0

    def __post_init__(self):
        if int(self.node_count) != self.node_count or self.node_count < 2:
            raise InvalidArgumentError(f"node_count must be an integer >= 2, got {self.node_count!r}")
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.truncation_sigmas >= 4:
            raise InvalidArgumentError(
                f"truncation_sigmas must be >= 4, got {self.truncation_sigmas!r}"
            )


DEFAULT_QUADRATURE = QuadratureSpec()


def _check_finite(x, name="x"):
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError(f"{name} must be finite, got {x!r}")


def std_normal_cdf(x):
    """Standard Gaussian CDF. Accepts scalars or arrays."""
    _check_finite(x)
    out = special.ndtr(x)
    return float(out) if np.ndim(out) == 0 else out


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / _SQRT_2PI
    return float(out) if out.ndim == 0 else out


def gaussian_pdf(x, var):
    """Density of N(0, var)."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x / var) / math.sqrt(2.0 * math.pi * var)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=32)
def _nodes_weights(spec: QuadratureSpec):
    if spec.kind == "gauss_hermite":
        nodes, weights = hermegauss(spec.node_count)
        weights = weights / _SQRT_2PI
    else:
        nodes = np.linspace(-spec.truncation_sigmas, spec.truncation_sigmas, spec.node_count)
        h = nodes[1] - nodes[0]
        weights = np.full(spec.node_count, h) * std_normal_pdf(nodes)
        weights[[0, -1]] *= 0.5
        # renormalise so the truncated rule integrates constants exactly
        weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _evaluate(f: Callable, points: np.ndarray) -> np.ndarray:
    # f may be vectorised or scalar-only
    try:
        values = np.asarray(f(points), dtype=float)
        if values.shape != points.shape:
            raise ValueError
    except (TypeError, ValueError):
        values = np.array([f(float(p)) for p in points], dtype=float)
    return values


def gaussian_expectation(f: Callable, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Approximate ``E[f(W)]`` for ``W ~ N(0, 1)``.

    ``f`` is called once on the whole node array when it is vectorised,
    otherwise once per node.
    """
    nodes, weights = _nodes_weights(spec)
    values = _evaluate(f, nodes)
    if not np.all(np.isfinite(values)):
        bad = nodes[~np.isfinite(values)][0]
        raise NumericalDomainError(f"integrand is not finite at node w={bad!r}")
    return float(np.dot(weights, values))


def binary_entropy(p):
    """Binary entropy in bits, with 0 log 0 = 0. Vectorised over ``p``."""
    arr = np.asarray(p, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise InvalidArgumentError(f"p must lie in [0, 1], got {p!r}")
    out = (special.entr(arr) + special.entr(1.0 - arr)) * LOG2E
    return float(out) if out.ndim == 0 else out


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12,
           max_iter: int = 500) -> tuple[float, int]:
    """Bisection returning ``(root, iterations)``.

    Stops once the bracket is narrower than ``tol`` or cannot be split further
    in floating point.
    """
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol!r}")
    if not lo < hi:
        raise InvalidArgumentError(f"need lo < hi, got [{lo!r}, {hi!r}]")
    f_lo, f_hi = float(f(lo)), float(f(hi))
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
        raise NumericalDomainError(f"f is not finite at the bracket ends: {f_lo!r}, {f_hi!r}")
    if f_lo == 0.0:
        return lo, 0
    if f_hi == 0.0:
        return hi, 0
    if (f_lo < 0) == (f_hi < 0):
        raise BracketError(lo, hi, f_lo, f_hi)

    lo_neg = f_lo < 0
    it = 0
    while hi - lo > tol and it < max_iter:
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        f_mid = float(f(mid))
        it += 1
        if not math.isfinite(f_mid):
            raise NumericalDomainError(f"f({mid!r}) is not finite")
        if f_mid == 0.0:
            return mid, it
        if (f_mid < 0) == lo_neg:
            lo = mid
        else:
            hi = mid
    return lo + 0.5 * (hi - lo), it


def find_root_bracketed(f: Callable[[float], float], lo: float, hi: float,
                        tol: float = 1e-12) -> float:
    """Root of ``f`` inside ``[lo, hi]`` by bisection. Deterministic."""
    return bisect(f, lo, hi, tol)[0]


def inverse_binary_entropy(hval: float, tol: float = 1e-13) -> float:
    """The p in [0, 1/2] with ``binary_entropy(p) == hval``."""
    if not 0.0 <= hval <= 1.0:
        raise InvalidArgumentError(f"hval must lie in [0, 1], got {hval!r}")
    if hval == 0.0:
        return 0.0
    if hval == 1.0:
        return 0.5
    return find_root_bracketed(lambda p: binary_entropy(p) - hval, 0.0, 0.5, tol)


def differential_entropy(density: Callable, lo: float, hi: float, node_count: int = 4001) -> float:
    """Differential entropy in bits of ``density`` over ``[lo, hi]`` (composite Simpson).

    Grid points where the density is below 1e-300 contribute nothing.
    """
    if node_count < 3:
        raise InvalidArgumentError("node_count must be >= 3")
    if not lo < hi:
        raise InvalidArgumentError(f"need lo < hi, got [{lo!r}, {hi!r}]")
    grid = np.linspace(lo, hi, node_count)
    p = _evaluate(density, grid)
    if np.any(np.isnan(p)):
        raise InvalidDensityError("density evaluated to NaN")
    if np.any(p < -1e-12):
        i = int(np.argmin(p))
        raise InvalidDensityError(f"negative density {p[i]!r} at {grid[i]!r}")
    p = np.clip(p, 0.0, None)
    safe = np.where(p > DENSITY_FLOOR, p, 1.0)
    integrand = np.where(p > DENSITY_FLOOR, -p * np.log2(safe), 0.0)
    return float(integrate.simpson(integrand, x=grid))


def simpson_on_grid(values: np.ndarray, grid: np.ndarray) -> float:
    return float(integrate.simpson(values, x=grid))
