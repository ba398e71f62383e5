"""Lusin-type Lipschitz approximation through heat maximal functions."""

from __future__ import annotations

import math
import time
from functools import lru_cache

import numpy as np
from scipy.special import ive

from .operators import BesselParams, bessel_operator_matrix, laguerre_distance
from .report import AuditReport
from .riesz import sqrt_shifted
from .semigroups import heat_apply
from .spectral import (
    SpectralSystem,
    as_coeffs,
    derivative_field,
    field_norm,
    gradient_lp_norm,
    lp_norm,
    nodal_derivative_field,
    project,
    synthesize,
)

DEFAULT_S_GRID = tuple(np.geomspace(1e-3, 10.0, 13))


def refine_s_grid(s_grid) -> np.ndarray:
    """Insert the geometric midpoint between consecutive entries (doubles the resolution)."""
    s = np.sort(np.asarray(s_grid, dtype=float))
    mid = np.sqrt(s[:-1] * s[1:])
    return np.sort(np.concatenate([s, mid]))


def sample_pairs(sys: SpectralSystem, count: int, seed: int) -> np.ndarray:
    """Seeded distinct grid-index pairs (i, j) with i != j."""
    rng = np.random.default_rng(seed)
    m = sys.grid.size
    i = rng.integers(0, m, size=count)
    j = (i + rng.integers(1, m, size=count)) % m
    return np.stack([i, j], axis=1)


def grid_distance(sys: SpectralSystem, i: int, j: int) -> float:
    x, y = sys.grid.points[i], sys.grid.points[j]
    if sys.metric == "laguerre":
        return laguerre_distance(x, y)
    return float(np.linalg.norm(np.atleast_1d(x - y)))


def mehler_matrix(sys: SpectralSystem, s: float) -> np.ndarray:
    """Ornstein-Uhlenbeck heat kernel on the Gaussian grid, rows normalized to sum 1."""
    x = sys.grid.points
    r = math.exp(-s)
    log_w = np.log(sys.grid.weights) + 0.5 * x**2
    expo = -((r * x[:, None] - x[None, :]) ** 2) / (2.0 * (1.0 - r * r)) + log_w[None, :]
    expo -= expo.max(axis=1, keepdims=True)
    k = np.exp(expo)
    return k / k.sum(axis=1, keepdims=True)


def hille_hardy_matrix(sys: SpectralSystem, s: float) -> np.ndarray:
    """Laguerre heat kernel on the Gauss-Laguerre grid, rows normalized to sum 1."""
    a = float(sys.params["alpha"])
    x = sys.grid.points
    r = math.exp(-s)
    xy = np.outer(x, x)
    z = 2.0 * np.sqrt(xy * r) / (1.0 - r)
    # log of the kernel up to row-independent constants, via the scaled Bessel function
    with np.errstate(divide="ignore"):
        expo = (-r * (x[:, None] + x[None, :]) / (1.0 - r) - 0.5 * a * np.log(xy * r)
                + np.log(ive(a, z)) + z + np.log(sys.grid.weights)[None, :])
    expo -= expo.max(axis=1, keepdims=True)
    k = np.exp(expo)
    return k / k.sum(axis=1, keepdims=True)


@lru_cache(maxsize=8)
def _bessel_full_spectrum(sys: SpectralSystem):
    """All eigenpairs of the finite-volume generator, symmetrized by the cell masses."""
    pr = sys.params
    A = bessel_operator_matrix(BesselParams(pr["alpha"], pr["R"], pr["n"], 1))
    root = np.sqrt(sys.grid.weights)
    lam, vec = np.linalg.eigh(root[:, None] * A / root[None, :])
    return np.maximum(lam, 0.0), vec, root


@lru_cache(maxsize=256)
def _kernel(sys: SpectralSystem, s: float) -> np.ndarray:
    space = sys.params["space"]
    if space == "hermite":
        return mehler_matrix(sys, s)
    if space == "laguerre":
        return hille_hardy_matrix(sys, s)
    lam, vec, root = _bessel_full_spectrum(sys)
    return (vec * np.exp(-s * lam)) @ vec.T / root[:, None] * root[None, :]


def heat_smooth(sys: SpectralSystem, s: float, samples: np.ndarray) -> np.ndarray:
    """h_s applied to non-negative grid samples.

    The 1-D systems use a positivity-preserving form of the semigroup: the
    explicit kernels for the Gaussian and Laguerre grids, and the exact
    matrix exponential of the finite-volume generator for Bessel. Other
    systems act through projection onto the retained modes, clamped at 0.
    """
    space = sys.params.get("space")
    if space in ("hermite", "laguerre", "bessel"):
        return _kernel(sys, s) @ samples
    return np.maximum(synthesize(sys, heat_apply(sys, s, project(sys, samples))), 0.0)


def heat_maximal(sys: SpectralSystem, samples: np.ndarray, s_grid) -> np.ndarray:
    """max over s in {0} and s_grid of h_s applied to samples; s = 0 is the identity."""
    out = np.array(samples, dtype=float)
    for s in s_grid:
        out = np.maximum(out, heat_smooth(sys, float(s), samples))
    return out


def lusin_function(sys: SpectralSystem, f, alpha: float, s_grid, a: float = 0.0) -> np.ndarray:
    """g = max_s (h_s |df|^alpha)^{1/alpha} + max_s h_s |sqrt(a + L) f| on the function grid."""
    c = as_coeffs(sys, f)
    grad = field_norm(nodal_derivative_field(sys, c))
    root = np.abs(synthesize(sys, sqrt_shifted(sys, a, c)))
    return heat_maximal(sys, grad**alpha, s_grid) ** (1.0 / alpha) + heat_maximal(sys, root, s_grid)


def lusin_audit(sys: SpectralSystem, f, p: float, alpha: float, s_grid, pairs,
                tolerance: float = 0.0) -> AuditReport:
    """Empirical constant in |f(x) - f(y)| <= d(x, y) (G(x) + G(y)) with G a multiple of g.

    The smallest admissible multiple r of g over the sampled pairs gives
    G = r g, and the reported constant is ||G||_p / (||f||_p + ||df||_p).
    Pairs with g(x) + g(y) = 0 but f(x) != f(y) count as violations.
    """
    start = time.perf_counter()
    if not 1 < alpha < min(2.0, p):
        raise ValueError(f"alpha must lie in (1, min(2, p)), got {alpha}")
    c = as_coeffs(sys, f)
    values = synthesize(sys, c)
    g = lusin_function(sys, c, alpha, s_grid)
    pairs = np.asarray(pairs, dtype=int)
    ratios, violations = [], 0
    scale = max(float(np.max(np.abs(values))), 1.0)
    for i, j in pairs:
        diff = abs(values[i] - values[j])
        denom = grid_distance(sys, i, j) * (g[i] + g[j])
        if denom == 0:
            if diff > 1e-12 * scale:
                violations += 1
            continue
        ratios.append(diff / denom)
    r = max(ratios, default=0.0)
    g_norm = lp_norm(sys, g, p)
    sobolev = lp_norm(sys, values, p) + gradient_lp_norm(sys, derivative_field(sys, c), p)
    constant = r * g_norm / sobolev if sobolev > 0 else 0.0
    observed = {"max_ratio": r, "empirical_constant": constant, "g_norm_p": g_norm,
                "sobolev_norm_p": sobolev, "violations": violations, "n_pairs": int(len(pairs)),
                "n_s": int(len(s_grid))}
    finite = math.isfinite(r) and math.isfinite(constant)
    rep = AuditReport.from_worst("lusin", {"system": sys.name, "N": sys.n_modes, "grid_size": sys.grid.size,
                                           "p": p, "alpha": alpha},
                                 observed, "violations", 0.0, violations if finite else math.inf, tolerance,
                                 runtime_ms=int(round(1000 * (time.perf_counter() - start))))
    # ||G||_p <= c (||f||_p + ||df||_p) with G = r g
    if r * g_norm > constant * sobolev * (1 + 1e-12) + 1e-300:
        rep.fail("norm inequality for the approximating function fails")
    return rep


def lusin_stability(sys: SpectralSystem, functions, p: float, alpha: float, s_grid, pairs,
                    tolerance: float = 0.1) -> AuditReport:
    """Relative change of the empirical constants when the s-grid is refined."""
    start = time.perf_counter()
    fine = refine_s_grid(s_grid)
    changes, coarse_c, fine_c = [], [], []
    for f in functions:
        c0 = lusin_audit(sys, f, p, alpha, s_grid, pairs).observed["empirical_constant"]
        c1 = lusin_audit(sys, f, p, alpha, fine, pairs).observed["empirical_constant"]
        coarse_c.append(c0)
        fine_c.append(c1)
        changes.append(abs(c1 - c0) / c0 if c0 > 0 else (0.0 if c1 == 0 else math.inf))
    worst = max(changes, default=0.0)
    observed = {"worst_relative_change": worst, "max_constant_coarse": max(coarse_c, default=0.0),
                "max_constant_fine": max(fine_c, default=0.0), "n_functions": len(changes)}
    return AuditReport.from_worst("lusin-stability", {"system": sys.name, "p": p, "alpha": alpha,
                                                      "n_s": len(s_grid), "n_s_fine": len(fine)},
                                  observed, "relative_change_max", tolerance, worst, 0.0,
                                  runtime_ms=int(round(1000 * (time.perf_counter() - start))))
