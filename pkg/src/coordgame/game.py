"""Model parameters and the finite-N utility / coordination structure.

Actions are encoded 0 = safe, 1 = risky (engage).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .exceptions import (
    InvalidArgumentError,
    InvalidBenefitError,
    NoiselessDegenerateError,
    ResourceLimitError,
)
from .numerics import find_root_bracketed

INFINITE = math.inf
MAX_ENUMERATION_AGENTS = 12


def parse_n_agents(value) -> int | float:
    """Accept an integer >= 2 or one of ``"inf"``, ``"infinite"``, ``math.inf``."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinite", "infinity"):
            return INFINITE
        try:
            value = float(text)
        except ValueError:
            raise InvalidArgumentError(f"n_agents must be an integer >= 2 or 'inf', got {value!r}")
    if isinstance(value, float) and math.isinf(value) and value > 0:
        return INFINITE
    if isinstance(value, bool) or int(value) != value:
        raise InvalidArgumentError(f"n_agents must be an integer >= 2 or 'inf', got {value!r}")
    n = int(value)
    if n < 2:
        raise InvalidArgumentError(f"n_agents must be >= 2, got {n}")
    return n


@dataclass(frozen=True)
class GameParams:
    """Scalar parameters of the Gaussian global game.

    ``n_agents`` is an integer >= 2 or :data:`INFINITE` for the mean-field
    limit. ``lam`` is the slope of the linear benefit function.
    """

    n_agents: int | float
    lam: float
    sigma_x_sq: float
    sigma_z_sq: float

    def __post_init__(self):
        object.__setattr__(self, "n_agents", parse_n_agents(self.n_agents))
        for name in ("lam", "sigma_x_sq", "sigma_z_sq"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise InvalidArgumentError(f"{name} must be a finite real, got {v!r}")
            object.__setattr__(self, name, float(v))
        if not self.lam > 0:
            raise InvalidArgumentError(f"lambda must be > 0, got {self.lam!r}")
        if not self.sigma_x_sq > 0:
            raise InvalidArgumentError(f"sigma_x_sq must be > 0, got {self.sigma_x_sq!r}")
        if not self.sigma_z_sq >= 0:
            raise InvalidArgumentError(f"sigma_z_sq must be >= 0, got {self.sigma_z_sq!r}")

    @property
    def is_mean_field(self) -> bool:
        return math.isinf(self.n_agents)

    @property
    def sigma_x(self) -> float:
        return math.sqrt(self.sigma_x_sq)

    @property
    def sigma_z(self) -> float:
        return math.sqrt(self.sigma_z_sq)

    def alpha(self) -> float:
        """MMSE gain sigma_x^2 / (sigma_x^2 + sigma_z^2)."""
        return self.sigma_x_sq / (self.sigma_x_sq + self.sigma_z_sq)

    def sigma_tilde_sq(self) -> float:
        """Posterior variance of X given one signal."""
        return self.alpha() * self.sigma_z_sq

    def br_coeff(self) -> float:
        if self.is_mean_field:
            return self.lam
        return self.lam * (self.n_agents - 1) / self.n_agents

    def require_noisy(self):
        if self.sigma_z_sq <= 0:
            raise NoiselessDegenerateError(
                "sigma_z_sq must be > 0 here; use the oracle threshold for the noiseless limit"
            )

    def require_finite_n(self):
        if self.is_mean_field:
            raise InvalidArgumentError("this operation needs a finite number of agents")

    def replace(self, **changes) -> "GameParams":
        return replace(self, **changes)


class BenefitSpec:
    """Benefit b(k) of engaging when k other agents engage, on [0, N-1].

    Build with :meth:`linear` (b(k) = lam * k / N) or :meth:`custom`. Custom
    functions are checked on a 1000-point grid: nonnegative and strictly
    increasing.
    """

    GRID_POINTS = 1000
    INCREASE_SLACK = 1e-12

    def __init__(self, kind: str, n_agents: int, func: Callable, lam: float | None = None):
        if kind not in ("linear", "custom"):
            raise InvalidArgumentError(f"unknown benefit kind {kind!r}")
        n = parse_n_agents(n_agents)
        if math.isinf(n):
            raise InvalidArgumentError("a benefit function needs a finite number of agents")
        self.kind = kind
        self.n_agents = n
        self.lam = lam
        self._func = func
        self.grid = np.linspace(0.0, n - 1.0, self.GRID_POINTS)
        self.grid_values = np.asarray(self(self.grid), dtype=float)
        self._validate()

    @classmethod
    def linear(cls, lam: float, n_agents: int) -> "BenefitSpec":
        if not lam > 0:
            raise InvalidArgumentError(f"lambda must be > 0, got {lam!r}")
        n = parse_n_agents(n_agents)
        return cls("linear", n, lambda k: lam * np.asarray(k, dtype=float) / n, lam=float(lam))

    @classmethod
    def custom(cls, func: Callable, n_agents: int) -> "BenefitSpec":
        return cls("custom", n_agents, func)

    @classmethod
    def from_params(cls, params: GameParams) -> "BenefitSpec":
        params.require_finite_n()
        return cls.linear(params.lam, params.n_agents)

    def __call__(self, k):
        arr = np.asarray(k, dtype=float)
        if arr.ndim == 0:
            return float(self._func(float(arr)))
        try:
            out = np.asarray(self._func(arr), dtype=float)
            if out.shape == arr.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(self._func(float(v))) for v in arr.ravel()]).reshape(arr.shape)

    def _validate(self):
        v = self.grid_values
        if not np.all(np.isfinite(v)):
            raise InvalidBenefitError("benefit function is not finite on [0, N-1]")
        if np.any(v < 0):
            raise InvalidBenefitError("benefit function must be nonnegative")
        steps = np.diff(v)
        if np.any(steps <= self.INCREASE_SLACK):
            i = int(np.argmin(steps))
            raise InvalidBenefitError(
                f"benefit function is not strictly increasing near k={self.grid[i]:.6g}"
            )

    def __repr__(self):
        if self.kind == "linear":
            return f"BenefitSpec.linear(lam={self.lam!r}, n_agents={self.n_agents!r})"
        return f"BenefitSpec.custom({self._func!r}, n_agents={self.n_agents!r})"


@dataclass(frozen=True)
class MassVector:
    """Empirical mass function of an action profile of ``count`` agents."""

    masses: tuple[float, ...]
    count: int

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if self.count < 1:
            raise InvalidArgumentError("count must be >= 1")
        if m.ndim != 1 or m.size < 1 or np.any(m < 0):
            raise InvalidArgumentError(f"masses must be a nonnegative vector, got {self.masses!r}")
        if abs(m.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError(f"masses must sum to 1, got {m.sum()!r}")
        scaled = m * self.count
        if np.any(np.abs(scaled - np.round(scaled)) > 1e-9):
            raise InvalidArgumentError("masses must be multiples of 1/count")
        object.__setattr__(self, "masses", tuple(float(x) for x in m))

    @property
    def action_count(self) -> int:
        return len(self.masses)

    def __getitem__(self, action: int) -> float:
        return self.masses[action]


def empirical_mass(actions: Sequence[int], action_count: int) -> MassVector:
    a = np.asarray(actions)
    if a.ndim != 1 or a.size == 0:
        raise InvalidArgumentError("actions must be a nonempty 1-d sequence")
    if not np.issubdtype(a.dtype, np.integer):
        if not np.all(np.mod(a, 1) == 0):
            raise InvalidArgumentError(f"actions must be integers, got {actions!r}")
        a = a.astype(int)
    if np.any(a < 0) or np.any(a >= action_count):
        raise InvalidArgumentError(f"actions must lie in 0..{action_count - 1}, got {actions!r}")
    counts = np.bincount(a, minlength=action_count)
    return MassVector(tuple(counts / a.size), int(a.size))


@dataclass(frozen=True)
class PolicyProfile:
    """Per-agent signal thresholds; agent i engages iff its signal <= thresholds[i]."""

    thresholds: tuple[float, ...] = field()

    def __post_init__(self):
        t = tuple(float(x) for x in np.ravel(self.thresholds))
        if len(t) < 1:
            raise InvalidArgumentError("a policy profile needs at least one threshold")
        if any(math.isnan(x) for x in t):
            raise InvalidArgumentError("thresholds must not be NaN")
        object.__setattr__(self, "thresholds", t)

    @classmethod
    def homogeneous(cls, tau: float, n_agents: int) -> "PolicyProfile":
        n = parse_n_agents(n_agents)
        if math.isinf(n):
            raise InvalidArgumentError("a profile needs a finite number of agents")
        return cls((float(tau),) * n)

    @property
    def n_agents(self) -> int:
        return len(self.thresholds)

    @property
    def is_homogeneous(self) -> bool:
        return len(set(self.thresholds)) == 1

    def as_array(self) -> np.ndarray:
        return np.array(self.thresholds)

    def __len__(self):
        return len(self.thresholds)

    def __getitem__(self, i):
        return self.thresholds[i]


def _check_benefit_matches(b: BenefitSpec, params: GameParams):
    params.require_finite_n()
    if b.n_agents != params.n_agents:
        raise InvalidArgumentError(
            f"benefit is defined for N={b.n_agents} but params have N={params.n_agents}"
        )


def utility(a_i: int, mass_minus_i: MassVector, x: float, b: BenefitSpec,
            params: GameParams) -> float:
    """Payoff ``a_i * (b((N-1) g_1) - x)`` written on the opponents' mass vector."""
    if a_i not in (0, 1):
        raise InvalidArgumentError(f"a_i must be 0 or 1, got {a_i!r}")
    _check_benefit_matches(b, params)
    if mass_minus_i.action_count != 2 or mass_minus_i.count != params.n_agents - 1:
        raise InvalidArgumentError("mass_minus_i must be a binary mass over the N-1 opponents")
    if a_i == 0:
        return 0.0
    return b((params.n_agents - 1) * mass_minus_i[1]) - x


def profile_utility(a_i: int, others: Sequence[int], x: float, b: BenefitSpec) -> float:
    """Payoff evaluated directly on the opponents' action vector."""
    return a_i * (b(float(np.sum(others))) - x)


def utility_batch(a_i: np.ndarray, others_engaged: np.ndarray, x: np.ndarray,
                  benefit: Callable) -> np.ndarray:
    """Vectorised payoff for many draws; ``others_engaged`` counts engaging opponents."""
    return np.asarray(a_i, dtype=float) * (benefit(np.asarray(others_engaged, dtype=float)) - x)


class CoordinatingAction(NamedTuple):
    action: int
    cutoff: float


def coordinating_action_set(x: float, b: BenefitSpec, params: GameParams,
                            tol: float = 1e-10) -> tuple[CoordinatingAction, ...]:
    """Actions that are optimal once a large enough majority plays them.

    Below b(0) only engaging coordinates, above b(N-1) only staying out does;
    in between both do, each with its own majority cutoff.
    """
    _check_benefit_matches(b, params)
    span = params.n_agents - 1
    b_lo, b_hi = b(0.0), b(float(span))
    if x <= b_lo:
        return (CoordinatingAction(1, 0.0),)
    if x >= b_hi:
        return (CoordinatingAction(0, 0.0),)
    c_engage = find_root_bracketed(lambda q: b(q * span) - x, 0.0, 1.0, tol)
    # smallest q with b(q span) >= x: step onto the feasible side of the bracket
    if b(c_engage * span) < x:
        c_engage = min(1.0, c_engage + tol)
    c_stay = find_root_bracketed(lambda q: b((1.0 - q) * span) - x, 0.0, 1.0, tol)
    if b((1.0 - c_stay) * span) < x:
        c_stay = max(0.0, c_stay - tol)
    return (CoordinatingAction(1, c_engage), CoordinatingAction(0, c_stay))


@dataclass
class CoordinationCheck:
    passed: bool
    profiles_checked: int
    counterexample: dict | None = None

    def __bool__(self):
        return self.passed


def verify_coordination_property(b: BenefitSpec, params: GameParams, x_grid: Sequence[float],
                                 atol: float = 1e-9) -> CoordinationCheck:
    """Brute-force check that every coordinating action is a best reply.

    Enumerates all 2^(N-1) opponent profiles; only feasible for N <= 12.
    """
    _check_benefit_matches(b, params)
    n = params.n_agents
    if n > MAX_ENUMERATION_AGENTS:
        raise ResourceLimitError(
            f"exhaustive enumeration is limited to N <= {MAX_ENUMERATION_AGENTS}, got {n}"
        )
    profiles = [empirical_mass(p, 2) for p in itertools.product((0, 1), repeat=n - 1)]
    checked = 0
    for x in x_grid:
        for a_star, cutoff in coordinating_action_set(float(x), b, params):
            for g in profiles:
                share = g[a_star]
                if share < max(g.masses) or share < cutoff - atol:
                    continue
                checked += 1
                best = utility(a_star, g, float(x), b, params)
                for a in (0, 1):
                    other = utility(a, g, float(x), b, params)
                    if best < other - atol:
                        return CoordinationCheck(False, checked, {
                            "x": float(x), "a_star": a_star, "cutoff": cutoff,
                            "masses": g.masses, "deviation": a,
                            "u_star": best, "u_deviation": other,
                        })
    return CoordinationCheck(True, checked)
