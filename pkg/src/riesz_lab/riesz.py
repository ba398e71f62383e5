"""Riesz transform d (a + L)^{-1/2} and the audits of its L^p bounds."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import roots_legendre

from .report import AuditReport
from .spectral import (
    SpectralSystem,
    as_coeffs,
    derivative_field,
    form_potential,
    form_synthesize,
    functional_calculus,
    gradient_lp_norm,
    lp_norm,
    synthesize,
)


def exact_exponent(p) -> Fraction:
    """p as a fraction, snapping floats such as 4/3 to the nearby small-denominator rational."""
    if isinstance(p, str):
        return Fraction(p)
    frac = Fraction(p)
    near = frac.limit_denominator(1000)
    return near if abs(near - frac) <= 1e-12 * abs(frac) else frac


def conjugate(p) -> float:
    if math.isinf(p):
        return 1.0
    P = exact_exponent(p)
    if P <= 1:
        raise ValueError("p must exceed 1")
    return float(P / (P - 1))


def riesz_constant(p) -> float:
    """c_p = 16 max(p, p/(p-1)), evaluated in exact rational arithmetic."""
    P = exact_exponent(p)
    if P <= 1:
        raise ValueError("p must exceed 1")
    return float(16 * max(P, P / (P - 1)))


def _params(sys: SpectralSystem, **extra) -> dict:
    out = {"system": sys.name, "N": sys.n_modes, "grid_size": sys.grid.size}
    out.update(extra)
    return out


def _ms(start: float) -> int:
    return int(round(1000 * (time.perf_counter() - start)))


def _check_range(sys: SpectralSystem, a: float, c: np.ndarray, what: str = "f") -> None:
    if a == 0 and any(c[k] != 0 for k in sys.kernel_modes):
        raise ValueError(f"{what} excites a kernel mode, which lies outside the domain when a = 0")


# --------------------------------------------------------------------------
# operators
# --------------------------------------------------------------------------


def sqrt_shifted(sys: SpectralSystem, a: float, c) -> np.ndarray:
    if a < 0:
        raise ValueError("a must be non-negative")
    return np.sqrt(sys.eigenvalues + a) * as_coeffs(sys, c)


def riesz_apply(sys: SpectralSystem, a: float, c) -> np.ndarray:
    """Riesz transform of f sampled on the gradient grid."""
    c = as_coeffs(sys, c)
    _check_range(sys, a, c)
    return derivative_field(sys, functional_calculus(sys, lambda lam: (lam + a) ** -0.5, c))


# --------------------------------------------------------------------------
# test functions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TestFunctionSet:
    """Seeded random coefficient vectors with algebraic decay and unit L^2 norm."""

    __test__ = False  # not a pytest class

    seed: int
    count: int
    decay: float
    functions: np.ndarray


def make_test_functions(sys: SpectralSystem, seed: int, count: int, decay: float = 1.0,
                        a: float = 0.0) -> TestFunctionSet:
    if decay <= 0:
        raise ValueError("decay must be positive")
    rng = np.random.default_rng(seed)
    k = np.arange(sys.n_modes)
    c = rng.standard_normal((count, sys.n_modes)) * (1.0 + k) ** (-decay)
    if a == 0:
        c[:, list(sys.kernel_modes)] = 0.0
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    c.setflags(write=False)
    return TestFunctionSet(seed, count, decay, c)


def make_test_forms(sys: SpectralSystem, seed: int, count: int, decay: float = 1.0) -> np.ndarray:
    """Unit exact forms in the d phi_k / sqrt(lambda_k) basis."""
    return make_test_functions(sys, seed, count, decay, a=0.0).functions


# --------------------------------------------------------------------------
# main bound
# --------------------------------------------------------------------------


def main_bound_audit(sys: SpectralSystem, p: float, a: float, tests: TestFunctionSet,
                     tolerance: float = 1e-6) -> AuditReport:
    """Forward ratio ||df||_p / ||sqrt(a+L) f||_p and reverse constant, both against c_p."""
    start = time.perf_counter()
    cp = riesz_constant(p)
    forward, reverse = [], []
    for c in tests.functions:
        _check_range(sys, a, c)
        df = gradient_lp_norm(sys, derivative_field(sys, c), p)
        sq = lp_norm(sys, synthesize(sys, sqrt_shifted(sys, a, c)), p)
        fp = lp_norm(sys, synthesize(sys, c), p)
        forward.append(df / sq)
        reverse.append((sq - math.sqrt(a) * fp) / df if df > 0 else (0.0 if sq <= math.sqrt(a) * fp else math.inf))
    forward, reverse = np.array(forward), np.array(reverse)
    observed = {
        "worst_forward_ratio": float(forward.max()),
        "best_forward_ratio": float(forward.min()),
        "worst_reverse_constant": float(reverse.max()),
        "n_functions": len(forward),
    }
    worst = max(observed["worst_forward_ratio"], observed["worst_reverse_constant"])
    return AuditReport.from_worst(
        "riesz-main", _params(sys, p=p, a=a, seed=tests.seed, decay=tests.decay),
        observed, "c_p", cp, worst, tolerance, runtime_ms=_ms(start),
    )


# --------------------------------------------------------------------------
# time quadrature
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TimeRule:
    """Gauss-Legendre panels on [0, T], geometrically refined towards t = 0."""

    nodes: np.ndarray
    weights: np.ndarray
    T: float


def make_time_rule(kappa_min: float, kappa_max: float, order: int = 20, decay_length: float = 20.0,
                   first_panel: float = 0.05) -> TimeRule:
    """Panels [0, t0], [t0, 2 t0], [2 t0, 4 t0], ... up to T = decay_length / kappa_min.

    ``t0 = first_panel / kappa_max`` resolves the fastest mode; every mode's
    factor e^{-2 t kappa} has decayed to e^{-2 decay_length} relative at T.
    """
    if not 0 < kappa_min <= kappa_max:
        raise ValueError("need 0 < kappa_min <= kappa_max")
    T = decay_length / kappa_min
    t0 = min(first_panel / kappa_max, T)
    edges = [0.0, t0]
    while edges[-1] < T:
        edges.append(min(2 * edges[-1], T))
    x, w = roots_legendre(order)
    lo, hi = np.array(edges[:-1]), np.array(edges[1:])
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * x
    weights = half[:, None] * w
    return TimeRule(nodes.ravel(), weights.ravel(), float(T))


def exp_moment_tail(b: float, T: float) -> float:
    """Integral of t e^{-b t} over (T, inf)."""
    return math.exp(-b * T) * (b * T + 1) / b**2


def _kappa(sys: SpectralSystem, a: float) -> np.ndarray:
    return np.sqrt(sys.eigenvalues + a)


def _auto_rule(sys: SpectralSystem, a: float, active: np.ndarray) -> TimeRule:
    kappa = _kappa(sys, a)[active]
    kappa = kappa[kappa > 0]
    if kappa.size == 0:
        kappa = np.array([1.0])
    return make_time_rule(float(kappa.min()), float(kappa.max()))


def _grid_inner(sys: SpectralSystem, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Row-wise gradient-grid inner products of fields given by coefficient rows."""
    grad = sys.gradient_samples
    wts = sys.gradient_grid.weights
    if grad.ndim == 2:
        return np.einsum("tm,tm,m->t", left @ grad, right @ grad, wts)
    return sum(np.einsum("tm,tm,m->t", left @ g, right @ g, wts) for g in grad)


# --------------------------------------------------------------------------
# integral representation
# --------------------------------------------------------------------------


def integral_rep_audit(sys: SpectralSystem, a: float, f, omega, t_rule: TimeRule | None = None,
                       tolerance: float = 1e-4) -> AuditReport:
    """Compare <R^a f, omega> with 4 int int <d P_t f, d/dt P_t omega> t dt by magnitude.

    The left side is spectral; the right side is a time quadrature of
    grid-level inner products plus an analytic tail estimate. The sign
    relation between the two is reported, not asserted.
    """
    start = time.perf_counter()
    c = as_coeffs(sys, f)
    w = as_coeffs(sys, omega)
    _check_range(sys, a, c)
    form_potential(sys, w)
    lam = sys.eigenvalues
    kappa = _kappa(sys, a)
    pos = lam > 0
    lhs = float(np.sum(c[pos] * w[pos] * np.sqrt(lam[pos] / kappa[pos] ** 2)))

    active = pos & (c != 0) & (w != 0)
    rule = t_rule if t_rule is not None else _auto_rule(sys, a, pos)
    decay = np.exp(-np.outer(rule.nodes, kappa))
    f_rows = decay * c
    # potential of d/dt P_t omega is -kappa e^{-t kappa} w / sqrt(lambda)
    pot = np.zeros_like(w)
    pot[pos] = w[pos] / np.sqrt(lam[pos])
    w_rows = -decay * kappa * pot
    integrand = _grid_inner(sys, f_rows, w_rows)
    rhs = float(4.0 * np.sum(rule.weights * rule.nodes * integrand))
    tail = float(4.0 * np.sum(np.abs(np.sqrt(lam[active]) * kappa[active] * c[active] * w[active])
                              * [exp_moment_tail(2 * k, rule.T) for k in kappa[active]]))

    scale = float(np.linalg.norm(c) * np.linalg.norm(w))
    floor = 1e-8 * max(scale, 1e-300)
    denom = max(abs(lhs), abs(rhs), floor)
    gap = abs(abs(lhs) - abs(rhs)) / denom
    sign = 0 if max(abs(lhs), abs(rhs)) <= floor else int(np.sign(lhs * rhs))
    observed = {"lhs": lhs, "rhs": rhs, "relative_gap": gap, "sign_relation": sign,
                "tail_bound": tail, "T": rule.T, "n_time_nodes": int(rule.nodes.size)}
    rep = AuditReport.from_worst("integral-rep", _params(sys, a=a), observed, "relative_gap_max",
                                 tolerance, gap, 0.0, runtime_ms=_ms(start))
    if tail > tolerance * denom:
        rep.fail("time horizon too short: tail bound exceeds tolerance")
    return rep


# --------------------------------------------------------------------------
# bilinear embedding
# --------------------------------------------------------------------------


def _gram_top(rows: list[np.ndarray], wts: np.ndarray) -> float:
    """Largest eigenvalue of sum_r R W R^T."""
    g = sum((r * wts) @ r.T for r in rows)
    return float(np.linalg.eigvalsh(g)[-1]) if g.size else 0.0


def bilinear_audit(sys: SpectralSystem, p: float, a: float, f, omega, t_rule: TimeRule | None = None,
                   tolerance: float = 0.0) -> AuditReport:
    """Space-time integral of |grad P_t f| |grad P_t omega| t against 4 max(p, q) ||f||_p ||omega||_q.

    Integrands are synthesized on the function grid at every time node; the
    tail beyond T is bounded through the top eigenvalue of each Gram matrix.
    """
    start = time.perf_counter()
    if sys.hessian_samples is None or sys.dim != 1:
        raise ValueError(f"{sys.name}: bilinear audit needs a 1-D system with second derivatives")
    c = as_coeffs(sys, f)
    w = as_coeffs(sys, omega)
    pot = form_potential(sys, w)
    q = conjugate(p)
    kappa = _kappa(sys, a)
    lam = sys.eigenvalues
    phi, dphi, hphi = sys.eigenfunction_samples, sys.nodal_gradient_samples, sys.hessian_samples
    wts = sys.grid.weights

    f_norm = lp_norm(sys, synthesize(sys, c), p)
    w_norm = gradient_lp_norm(sys, form_synthesize(sys, w), q)
    bound = 4.0 * max(float(p), q) * f_norm * w_norm

    f_modes = (c != 0) & (kappa > 0)
    w_modes = pot != 0
    if not f_modes.any() or not w_modes.any():
        observed = {"lhs": 0.0, "tail_bound": 0.0, "f_norm_p": f_norm, "omega_norm_q": w_norm}
        return AuditReport.from_worst("bilinear", _params(sys, p=p, a=a), observed, "4max(p,q)|f|_p|w|_q",
                                      bound, 0.0, tolerance, runtime_ms=_ms(start))
    rule = t_rule if t_rule is not None else _auto_rule(sys, a, f_modes | w_modes)
    decay = np.exp(-np.outer(rule.nodes, kappa))
    cf = decay * c
    cw = decay * pot
    grad_f = np.sqrt(((cf * -kappa) @ phi) ** 2 + (cf @ dphi) ** 2)
    grad_w = np.sqrt(((cw * -kappa) @ dphi) ** 2 + (cw @ hphi) ** 2)
    integrand = (grad_f * grad_w) @ wts
    body = float(np.sum(rule.weights * rule.nodes * integrand))

    kf, kw = kappa[f_modes].min(), kappa[w_modes].min()
    fm, wm = f_modes, w_modes
    top_f = _gram_top([kappa[fm, None] * phi[fm], dphi[fm]], wts)
    top_w = _gram_top([kappa[wm, None] * dphi[wm], hphi[wm]], wts)
    # ||grad P_t f||_2 <= sqrt(top_f) |c| e^{-t kf}, likewise for omega
    tail = (math.sqrt(top_f * top_w) * float(np.linalg.norm(c[fm]) * np.linalg.norm(pot[wm]))
            * exp_moment_tail(kf + kw, rule.T))
    lhs = body + tail
    observed = {"lhs": lhs, "quadrature_part": body, "tail_bound": tail, "f_norm_p": f_norm,
                "omega_norm_q": w_norm, "ratio_to_bound": lhs / bound if bound > 0 else math.inf,
                "T": rule.T}
    return AuditReport.from_worst("bilinear", _params(sys, p=p, a=a), observed, "4max(p,q)|f|_p|w|_q",
                                  bound, lhs, tolerance, runtime_ms=_ms(start))
