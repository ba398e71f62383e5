"""Heat and shifted Poisson semigroups, and Poisson via subordination to the heat flow."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .spectral import SpectralSystem, as_coeffs


@dataclass(frozen=True, eq=False)
class SubordinationRule:
    """Nodes and weights for integrals against e^{-s} / sqrt(pi s) ds on (0, inf)."""

    s_nodes: np.ndarray
    s_weights: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s_nodes, dtype=float)
        w = np.asarray(self.s_weights, dtype=float)
        if s.shape != w.shape or s.ndim != 1:
            raise ValueError("s_nodes and s_weights must be 1-D arrays of equal length")
        if np.any(s <= 0) or np.any(w <= 0):
            raise ValueError("subordination nodes and weights must be positive")
        s.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "s_nodes", s)
        object.__setattr__(self, "s_weights", w)


@lru_cache(maxsize=None)
def make_subordination_rule(step: float = 0.25, log_min: float = -60.0, log_max: float = 4.5) -> SubordinationRule:
    """Trapezoid rule in v = log s.

    After the substitution the integrand sqrt(s) e^{-s} e^{-c/s} decays doubly
    exponentially at both ends, so the trapezoid rule converges geometrically
    in 1/step uniformly in c = (lambda + a) t^2 / 4.
    """
    v = np.arange(log_min, log_max + step / 2, step)
    s = np.exp(v)
    w = step * np.sqrt(s) * np.exp(-s) / math.sqrt(math.pi)
    keep = w > 0
    return SubordinationRule(s[keep], w[keep])


@dataclass(frozen=True)
class PoissonParams:
    a: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not self.a >= 0:
            raise ValueError(f"shift a must be non-negative, got {self.a}")
        if not self.t >= 0:
            raise ValueError(f"time t must be non-negative, got {self.t}")


def heat_apply(sys: SpectralSystem, t: float, c) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be non-negative")
    return np.exp(-t * sys.eigenvalues) * as_coeffs(sys, c)


def poisson_factor(sys: SpectralSystem, a: float, t) -> np.ndarray:
    """Multipliers e^{-t sqrt(lambda + a)}; broadcasts over an array of times."""
    kappa = np.sqrt(sys.eigenvalues + a)
    return np.exp(-np.multiply.outer(np.asarray(t, dtype=float), kappa))


def poisson_spectral(sys: SpectralSystem, pp: PoissonParams, c) -> np.ndarray:
    return poisson_factor(sys, pp.a, pp.t) * as_coeffs(sys, c)


def poisson_subordinated(sys: SpectralSystem, rule: SubordinationRule, pp: PoissonParams, c) -> np.ndarray:
    """Poisson semigroup as a weighted average of heat operators h_{t^2/4s}."""
    c = as_coeffs(sys, c)
    if pp.t == 0:
        return c.copy()
    times = pp.t**2 / (4.0 * rule.s_nodes)
    weights = rule.s_weights * np.exp(-pp.a * times)
    heat = np.exp(-np.multiply.outer(times, sys.eigenvalues))
    return (weights @ heat) * c


def rho_a(a: float, t: float, rule: SubordinationRule | None = None) -> float:
    """Contraction factor of the shifted Poisson semigroup on every L^p."""
    if a < 0 or t < 0:
        raise ValueError("a and t must be non-negative")
    rule = make_subordination_rule() if rule is None else rule
    if t == 0 or a == 0:
        # the rule integrates the unit-mass density; report its actual sum
        return float(rule.s_weights.sum())
    return float(rule.s_weights @ np.exp(-a * t**2 / (4.0 * rule.s_nodes)))


def rho_integral(a: float, rule: SubordinationRule | None = None) -> float:
    """Integral of rho_a over (0, inf), by adaptive quadrature."""
    if a <= 0:
        raise ValueError("the integral diverges unless a > 0")
    val, _ = quad(lambda t: rho_a(a, t, rule), 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(val)


def form_semigroup(sys: SpectralSystem, pp: PoissonParams, w) -> np.ndarray:
    """Poisson semigroup on exact forms: component k is multiplied by e^{-t sqrt(lambda_k + a)}."""
    return poisson_spectral(sys, pp, w)
