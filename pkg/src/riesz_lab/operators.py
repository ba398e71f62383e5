"""Concrete generators: Laguerre, Ornstein-Uhlenbeck (Hermite), Bessel, and tensor products."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln, roots_genlaguerre, roots_hermitenorm

from .spectral import QuadratureGrid, SpectralSystem, SystemConstructionError, validate

GRID_FACTOR = 4
MAX_TENSOR_POINTS = 2_000_000
MAX_TENSOR_MODES = 5_000
NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class LaguerreParams:
    alpha: float = 0.0
    n_modes: int = 32

    def __post_init__(self):
        if not self.alpha > -1:
            raise ValueError(f"alpha must exceed -1, got {self.alpha}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError(f"n_modes must be a positive integer, got {self.n_modes}")


@dataclass(frozen=True)
class BesselParams:
    alpha: float = 0.0
    R: float = 40.0
    n: int = 400
    n_modes: int = 32

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if not 1 <= self.n_modes <= self.n:
            raise ValueError(f"n_modes must lie in [1, n], got {self.n_modes}")


# --------------------------------------------------------------------------
# Laguerre
# --------------------------------------------------------------------------


def laguerre_table(n: int, alpha: float, x) -> np.ndarray:
    """Rows P_0^alpha .. P_{n-1}^alpha evaluated at x, by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((max(n, 1),) + x.shape)
    out[0] = 1.0
    if n > 1:
        out[1] = 1.0 + alpha - x
    for k in range(1, n - 1):
        out[k + 1] = ((2 * k + 1 + alpha - x) * out[k] - (k + alpha) * out[k - 1]) / (k + 1)
    return out[:n]


def laguerre_poly(k: int, alpha: float, x):
    """Generalized Laguerre polynomial L_k^alpha(x)."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    val = laguerre_table(k + 1, alpha, x)[k]
    return float(val) if np.ndim(val) == 0 else val


def laguerre_norms_sq(n: int, alpha: float) -> np.ndarray:
    """Closed-form ||L_k^alpha||^2 under x^alpha e^{-x} / Gamma(alpha+1)."""
    k = np.arange(n)
    return np.exp(gammaln(k + alpha + 1) - gammaln(alpha + 1) - gammaln(k + 1))


def _laguerre_grid(alpha: float, m: int) -> QuadratureGrid:
    x, w = roots_genlaguerre(m, alpha)
    return QuadratureGrid(x, w / math.exp(gammaln(alpha + 1)))


def build_laguerre(params: LaguerreParams) -> SpectralSystem:
    """Laguerre system with eigenvalues 0, 1, ..., N-1 and metric derivative sqrt(x) d/dx."""
    a, n = float(params.alpha), int(params.n_modes)
    grid = _laguerre_grid(a, GRID_FACTOR * n)
    x = grid.points
    poly = laguerre_table(n, a, x)
    norms_sq = (poly**2) @ grid.weights
    exact = laguerre_norms_sq(n, a)
    rel = np.max(np.abs(norms_sq / exact - 1))
    if rel > NORMALIZATION_TOL:
        raise SystemConstructionError(f"laguerre normalization off by {rel:.2e}")
    scale = 1.0 / np.sqrt(norms_sq)[:, None]
    # d/dx L_k^a = -L_{k-1}^{a+1}, d2/dx2 L_k^a = L_{k-2}^{a+2}
    d1 = np.zeros_like(poly)
    d2 = np.zeros_like(poly)
    if n > 1:
        d1[1:] = -laguerre_table(n - 1, a + 1, x)
    if n > 2:
        d2[2:] = laguerre_table(n - 2, a + 2, x)
    grad = np.sqrt(x) * d1 * scale
    # second derivative in the flat coordinate y = 2 sqrt(x)
    hess = (0.5 * d1 + x * d2) * scale
    sys = SpectralSystem(
        name=f"laguerre(alpha={a:g})",
        eigenvalues=np.arange(n, dtype=float),
        eigenfunction_samples=poly * scale,
        gradient_samples=grad,
        grid=grid,
        gradient_grid=grid,
        kernel_modes=(0,),
        hessian_samples=hess,
        metric="laguerre",
        params={"space": "laguerre", "alpha": a, "n_modes": n, "grid_size": grid.size},
    )
    return validate(sys)


def laguerre_distance(x, y) -> float:
    """Intrinsic distance 2 |sqrt(x) - sqrt(y)| (Euclidean over coordinates)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("coordinates must be non-negative")
    return float(2.0 * np.sqrt(np.sum((np.sqrt(x) - np.sqrt(y)) ** 2)))


# --------------------------------------------------------------------------
# Ornstein-Uhlenbeck
# --------------------------------------------------------------------------


def hermite_table(n: int, x) -> np.ndarray:
    """Probabilists' Hermite polynomials He_0 .. He_{n-1} at x."""
    x = np.asarray(x, dtype=float)
    out = np.empty((max(n, 1),) + x.shape)
    out[0] = 1.0
    if n > 1:
        out[1] = x
    for k in range(1, n - 1):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out[:n]


def build_hermite(n_modes: int = 32) -> SpectralSystem:
    """Ornstein-Uhlenbeck system on the standard Gaussian line."""
    n = int(n_modes)
    if n < 2:
        raise ValueError(f"n_modes must be at least 2, got {n_modes}")
    x, w = roots_hermitenorm(GRID_FACTOR * n)
    grid = QuadratureGrid(x, w / math.sqrt(2 * math.pi))
    poly = hermite_table(n, x)
    k = np.arange(n)
    scale = np.exp(-0.5 * gammaln(k + 1))[:, None]
    # He_k' = k He_{k-1}
    d1 = np.zeros_like(poly)
    d2 = np.zeros_like(poly)
    d1[1:] = k[1:, None] * poly[:-1]
    d2[2:] = (k[2:] * (k[2:] - 1))[:, None] * poly[:-2]
    sys = SpectralSystem(
        name="hermite",
        eigenvalues=k.astype(float),
        eigenfunction_samples=poly * scale,
        gradient_samples=d1 * scale,
        grid=grid,
        gradient_grid=grid,
        kernel_modes=(0,),
        hessian_samples=d2 * scale,
        params={"space": "hermite", "n_modes": n, "grid_size": grid.size},
    )
    return validate(sys)


# --------------------------------------------------------------------------
# Bessel
# --------------------------------------------------------------------------


def _bessel_geometry(params: BesselParams):
    n, R, a = int(params.n), float(params.R), float(params.alpha)
    h = R / n
    cells = (np.arange(n) + 0.5) * h
    faces = np.arange(1, n) * h
    if a == 0:
        density = np.ones(n)
    else:
        edges = np.arange(n + 1) * h
        density = np.diff(edges ** (2 * a + 1)) / ((2 * a + 1) * h)
    face_weight = faces ** (2 * a)
    return h, cells, faces, density, face_weight


def _flux_matrix(face_weight: np.ndarray) -> np.ndarray:
    """Symmetric tridiagonal T with f^T T g = sum over faces m (f_{i+1}-f_i)(g_{i+1}-g_i)."""
    n = face_weight.size + 1
    diag = np.zeros(n)
    diag[:-1] += face_weight
    diag[1:] += face_weight
    return np.diag(diag) - np.diag(face_weight, 1) - np.diag(face_weight, -1)


def neumann_laplacian_matrix(n: int, R: float) -> np.ndarray:
    """Standard cell-centred second-difference matrix for -d^2/dx^2 with Neumann ends."""
    h = R / n
    main = np.full(n, 2.0)
    main[0] = main[-1] = 1.0
    off = -np.ones(n - 1)
    return (np.diag(main) + np.diag(off, 1) + np.diag(off, -1)) / h**2


def bessel_operator_matrix(params: BesselParams) -> np.ndarray:
    """Finite-volume matrix of -(d^2 + (2 alpha / x) d) with Neumann walls at 0 and R."""
    h, _, _, density, face_weight = _bessel_geometry(params)
    return (_flux_matrix(face_weight) / h**2) / density[:, None]


def build_bessel(params: BesselParams) -> SpectralSystem:
    """Bessel system on [0, R] with weight x^(2 alpha), truncated to the lowest n_modes."""
    h, cells, faces, density, face_weight = _bessel_geometry(params)
    n, nm = int(params.n), int(params.n_modes)
    mass = density * h
    # D^{1/2} A D^{-1/2} with D = diag(mass) is symmetric tridiagonal
    sq = np.sqrt(density)
    diag = np.zeros(n)
    diag[:-1] += face_weight
    diag[1:] += face_weight
    d = diag / (h**2 * density)
    e = -face_weight / (h**2 * sq[:-1] * sq[1:])
    lam, vec = eigh_tridiagonal(d, e, select="i", select_range=(0, nm - 1))
    phi = (vec / np.sqrt(mass)[:, None]).T
    lam = lam.copy()
    lam[0] = 0.0
    phi[0] = 1.0 / math.sqrt(mass.sum())
    # deterministic sign: positive at the first cell
    phi *= np.where(phi[:, :1] < 0, -1.0, 1.0)
    if np.any(lam[1:] <= 0):
        raise SystemConstructionError("bessel spectrum has more than one kernel mode")
    face_grad = np.diff(phi, axis=1) / h
    padded = np.pad(face_grad, ((0, 0), (1, 1)))
    nodal = 0.5 * (padded[:, :-1] + padded[:, 1:])
    ghost = np.pad(phi, ((0, 0), (1, 1)), mode="edge")
    hess = (ghost[:, 2:] - 2 * phi + ghost[:, :-2]) / h**2
    sys = SpectralSystem(
        name=f"bessel(alpha={params.alpha:g})",
        eigenvalues=lam,
        eigenfunction_samples=phi,
        gradient_samples=face_grad,
        grid=QuadratureGrid(cells, mass),
        gradient_grid=QuadratureGrid(faces, face_weight * h),
        kernel_modes=(0,),
        nodal_gradient_samples=nodal,
        hessian_samples=hess,
        probability=False,
        params={"space": "bessel", "alpha": float(params.alpha), "R": float(params.R),
                "n": n, "n_modes": nm, "grid_size": n},
    )
    return validate(sys)


# --------------------------------------------------------------------------
# tensor products
# --------------------------------------------------------------------------


def tensor_product(systems: list[SpectralSystem], max_total_degree: int) -> SpectralSystem:
    """Product system keeping modes whose index sum is at most max_total_degree."""
    if len(systems) < 2:
        raise ValueError("tensor_product needs at least two factor systems")
    for s in systems:
        if s.dim != 1 or s.gradient_grid is not s.grid:
            raise ValueError(f"{s.name}: only 1-D factors with collocated gradients can be tensorized")
    sizes = [s.grid.size for s in systems]
    total_points = math.prod(sizes)
    if total_points > MAX_TENSOR_POINTS:
        raise ValueError(f"product grid of {total_points} points exceeds {MAX_TENSOR_POINTS}")
    ranges = [range(min(s.n_modes, max_total_degree + 1)) for s in systems]
    indices = [k for k in itertools.product(*ranges) if sum(k) <= max_total_degree]
    if len(indices) > MAX_TENSOR_MODES:
        raise ValueError(f"{len(indices)} product modes exceed {MAX_TENSOR_MODES}")
    lam = np.array([sum(s.eigenvalues[i] for s, i in zip(systems, k)) for k in indices])
    order = sorted(range(len(indices)), key=lambda j: (lam[j], indices[j]))
    indices = [indices[j] for j in order]
    lam = lam[order]

    def outer(rows):
        out = rows[0]
        for r in rows[1:]:
            out = np.multiply.outer(out, r)
        return out.reshape(-1)

    phi = np.array([outer([s.eigenfunction_samples[i] for s, i in zip(systems, k)]) for k in indices])
    grad = np.array([
        [outer([(s.gradient_samples if axis == d else s.eigenfunction_samples)[i]
                for axis, (s, i) in enumerate(zip(systems, k))]) for k in indices]
        for d in range(len(systems))
    ])
    mesh = np.meshgrid(*[s.grid.points for s in systems], indexing="ij")
    points = np.stack([m.reshape(-1) for m in mesh], axis=1)
    weights = outer([s.grid.weights for s in systems])
    grid = QuadratureGrid(points, weights)
    metrics = {s.metric for s in systems}
    sys = SpectralSystem(
        name=" x ".join(s.name for s in systems),
        eigenvalues=lam,
        eigenfunction_samples=phi,
        gradient_samples=grad,
        grid=grid,
        gradient_grid=grid,
        kernel_modes=tuple(j for j, k in enumerate(indices) if lam[j] == 0),
        metric=metrics.pop() if len(metrics) == 1 else "mixed",
        probability=all(s.probability for s in systems),
        params={"space": "tensor", "factors": [s.params for s in systems],
                "max_total_degree": int(max_total_degree), "multi_indices": [list(k) for k in indices],
                "grid_size": grid.size},
    )
    return validate(sys, orth_tol=1e-7)


def multi_index_mode(sys: SpectralSystem, k) -> int:
    """Position of the product mode with multi-index k in a tensor system."""
    return sys.params["multi_indices"].index(list(k))
