"""Truncated spectral systems and the functional calculus built on them.

A :class:`SpectralSystem` stores finitely many eigenpairs of a non-negative
generator sampled on a quadrature grid. Functions are handled either as grid
samples or as coefficient vectors ``c`` (plain 1-D arrays of length N, with
``c[k] = <f, phi_k>``). 1-forms are always exact here and are stored as
coefficients in the orthonormal basis ``d phi_k / sqrt(lambda_k)``,
``lambda_k > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class SystemConstructionError(ValueError):
    """A constructed system failed its orthonormality or compatibility check."""


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and positive weights representing the reference measure."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if pts.shape[0] != w.shape[0] or w.ndim != 1:
            raise ValueError("points and weights must have matching length")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("quadrature weights must be positive and finite")
        if pts.ndim == 1 and np.any(np.diff(pts) <= 0):
            raise ValueError("1-D grid points must be strictly increasing")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True, eq=False)
class SpectralSystem:
    """Immutable truncated eigen-decomposition of a generator.

    ``gradient_samples`` live on ``gradient_grid`` (which is ``grid`` itself
    for the polynomial systems, and the cell faces for the finite-volume
    Bessel system). For tensor systems they carry a leading axis with one
    component per coordinate. ``nodal_gradient_samples`` and
    ``hessian_samples`` are the same derivative fields evaluated on ``grid``;
    the latter holds the metric second derivative and exists only in 1-D.
    """

    name: str
    eigenvalues: np.ndarray
    eigenfunction_samples: np.ndarray
    gradient_samples: np.ndarray
    grid: QuadratureGrid
    gradient_grid: QuadratureGrid
    kernel_modes: tuple[int, ...]
    nodal_gradient_samples: np.ndarray | None = None
    hessian_samples: np.ndarray | None = None
    metric: str = "euclidean"
    probability: bool = True
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        phi = np.asarray(self.eigenfunction_samples, dtype=float)
        grad = np.asarray(self.gradient_samples, dtype=float)
        n = lam.shape[0]
        if phi.shape != (n, self.grid.size):
            raise ValueError(f"eigenfunction table has shape {phi.shape}, expected {(n, self.grid.size)}")
        if grad.shape[-2:] != (n, self.gradient_grid.size):
            raise ValueError("gradient table does not match the gradient grid")
        if np.any(lam < 0) or np.any(np.diff(lam) < 0):
            raise ValueError("eigenvalues must be non-negative and sorted")
        nodal = grad if self.nodal_gradient_samples is None else np.asarray(self.nodal_gradient_samples, float)
        if nodal.shape[-2:] != (n, self.grid.size):
            raise ValueError("nodal gradient table does not match the grid")
        arrays = {"eigenvalues": lam, "eigenfunction_samples": phi, "gradient_samples": grad,
                  "nodal_gradient_samples": nodal}
        if self.hessian_samples is not None:
            arrays["hessian_samples"] = np.asarray(self.hessian_samples, dtype=float)
        for key, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, key, arr)
        object.__setattr__(self, "kernel_modes", tuple(int(k) for k in self.kernel_modes))

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def dim(self) -> int:
        return 1 if self.gradient_samples.ndim == 2 else self.gradient_samples.shape[0]

    @property
    def positive_modes(self) -> np.ndarray:
        return self.eigenvalues > 0


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def invariant_errors(sys: SpectralSystem) -> dict[str, float]:
    """Max deviations from orthonormality and from <d phi_j, d phi_k> = lambda_k delta_jk."""
    phi = sys.eigenfunction_samples
    gram = (phi * sys.grid.weights) @ phi.T
    grad = sys.gradient_samples.reshape(-1, sys.n_modes, sys.gradient_grid.size)
    energy = sum((g * sys.gradient_grid.weights) @ g.T for g in grad)
    return {
        "orthonormality": float(np.max(np.abs(gram - np.eye(sys.n_modes)))),
        "compatibility": float(np.max(np.abs(energy - np.diag(sys.eigenvalues)))),
    }


def validate(sys: SpectralSystem, orth_tol: float = 1e-8, compat_tol: float = 1e-6) -> SpectralSystem:
    err = invariant_errors(sys)
    if err["orthonormality"] > orth_tol:
        raise SystemConstructionError(
            f"{sys.name}: orthonormality error {err['orthonormality']:.3e} exceeds {orth_tol:g}"
        )
    if err["compatibility"] > compat_tol:
        raise SystemConstructionError(
            f"{sys.name}: gradient compatibility error {err['compatibility']:.3e} exceeds {compat_tol:g}"
        )
    return sys


# --------------------------------------------------------------------------
# projection, synthesis and functional calculus
# --------------------------------------------------------------------------


def as_coeffs(sys: SpectralSystem, c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape != (sys.n_modes,):
        raise ValueError(f"expected {sys.n_modes} coefficients, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite")
    return c


def project(sys: SpectralSystem, samples) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (sys.grid.size,):
        raise ValueError(f"expected {sys.grid.size} grid samples, got shape {samples.shape}")
    return sys.eigenfunction_samples @ (samples * sys.grid.weights)


def synthesize(sys: SpectralSystem, c) -> np.ndarray:
    return as_coeffs(sys, c) @ sys.eigenfunction_samples


def unit(sys: SpectralSystem, k: int) -> np.ndarray:
    e = np.zeros(sys.n_modes)
    e[k] = 1.0
    return e


def multiplier(sys: SpectralSystem, phi: Callable) -> np.ndarray:
    lam = sys.eigenvalues
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        try:
            vals = np.asarray(phi(lam), dtype=float)
            if vals.shape != lam.shape:
                vals = np.broadcast_to(vals, lam.shape).astype(float)
        except (TypeError, ValueError):
            vals = np.array([phi(x) for x in lam], dtype=float)
    return vals


def functional_calculus(sys: SpectralSystem, phi: Callable, c) -> np.ndarray:
    """Apply phi(L): c_k -> phi(lambda_k) c_k.

    Non-finite values of phi are tolerated only on modes that are not excited.
    """
    c = as_coeffs(sys, c)
    vals = multiplier(sys, phi)
    bad = ~np.isfinite(vals) & (c != 0)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise ValueError(
            f"multiplier is not finite at eigenvalue {sys.eigenvalues[k]:g} (mode {k}) on an excited mode"
        )
    return np.where(c != 0, np.where(np.isfinite(vals), vals, 0.0) * c, 0.0)


def field_norm(field) -> np.ndarray:
    """Pointwise norm of a scalar field (M,) or vector field (D, M)."""
    field = np.asarray(field, dtype=float)
    if field.ndim == 1:
        return np.abs(field)
    return np.sqrt(np.sum(field**2, axis=0))


def lp_norm(sys: SpectralSystem, samples, p: float, grid: QuadratureGrid | None = None) -> float:
    """Weighted L^p norm by grid quadrature; vector fields use their pointwise norm.

    ``grid`` defaults to the function grid; pass ``sys.gradient_grid`` for
    derivative fields.
    """
    grid = sys.grid if grid is None else grid
    if p < 1:
        raise ValueError("p must be >= 1")
    a = field_norm(samples)
    if a.shape != (grid.size,):
        raise ValueError(f"expected {grid.size} samples, got shape {a.shape}")
    if np.isinf(p):
        return float(np.max(a))
    scale = float(np.max(a))
    if scale == 0:
        return 0.0
    # rescale to keep |f|^p finite for large p
    return scale * float(np.sum((a / scale) ** p * grid.weights) ** (1.0 / p))


def gradient_lp_norm(sys: SpectralSystem, field, p: float) -> float:
    return lp_norm(sys, field, p, grid=sys.gradient_grid)


def derivative_field(sys: SpectralSystem, c) -> np.ndarray:
    """Metric derivative sum_k c_k (delta phi_k) on the gradient grid."""
    c = as_coeffs(sys, c)
    return np.tensordot(c, sys.gradient_samples, axes=([0], [-2]))


def nodal_derivative_field(sys: SpectralSystem, c) -> np.ndarray:
    """Same as :func:`derivative_field`, evaluated on the function grid."""
    c = as_coeffs(sys, c)
    return np.tensordot(c, sys.nodal_gradient_samples, axes=([0], [-2]))


def hessian_field(sys: SpectralSystem, c) -> np.ndarray:
    if sys.hessian_samples is None:
        raise ValueError(f"{sys.name} carries no second-derivative samples")
    return as_coeffs(sys, c) @ sys.hessian_samples


# --------------------------------------------------------------------------
# exact 1-forms
# --------------------------------------------------------------------------


def form_potential(sys: SpectralSystem, w) -> np.ndarray:
    """Coefficients of h with dh equal to the form with exact-basis coefficients w."""
    w = as_coeffs(sys, w)
    pos = sys.positive_modes
    if np.any(w[~pos] != 0):
        raise ValueError("exact forms have no component on kernel modes")
    out = np.zeros_like(w)
    out[pos] = w[pos] / np.sqrt(sys.eigenvalues[pos])
    return out


def form_synthesize(sys: SpectralSystem, w) -> np.ndarray:
    return derivative_field(sys, form_potential(sys, w))


def form_project(sys: SpectralSystem, field) -> np.ndarray:
    """Exact-basis coefficients of a form sampled on the gradient grid."""
    field = np.asarray(field, dtype=float)
    grad = sys.gradient_samples
    wts = sys.gradient_grid.weights
    if grad.ndim == 2:
        inner = grad @ (field * wts)
    else:
        inner = sum(grad[i] @ (field[i] * wts) for i in range(grad.shape[0]))
    pos = sys.positive_modes
    out = np.zeros(sys.n_modes)
    out[pos] = inner[pos] / np.sqrt(sys.eigenvalues[pos])
    return out


def differential_coeffs(sys: SpectralSystem, c) -> np.ndarray:
    """Exact-basis coefficients of df: sqrt(lambda_k) c_k."""
    return np.sqrt(sys.eigenvalues) * as_coeffs(sys, c)
