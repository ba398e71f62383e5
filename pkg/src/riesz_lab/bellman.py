"""Closed-form Bellman function, its mollified version and their derivatives.

The function is

    B(u, v) = u^p + v^q + delta * (2/p u^p + (2/q - 1) v^q)   if u^p >= v^q
    B(u, v) = u^p + v^q + delta * u^2 v^(2-q)                 if u^p <= v^q

with p >= 2, q = p/(p-1) and delta = q(q-1)/8. Everything here is vectorised
over numpy arrays; scalars go in and come out as floats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Absolute slack for the floating-point inequality audits.
SLACK = 1e-12


@dataclass(frozen=True)
class BellmanParams:
    p: float
    q: float
    delta: float


def make_params(p: float) -> BellmanParams:
    """Exponents (p, q, delta) for the Bellman function.

    Raises ValueError for p < 2; callers with p in (1, 2) swap the roles of
    the function and the form and use the conjugate exponent instead.
    """
    p = float(p)
    if not np.isfinite(p) or p < 2:
        raise ValueError(f"Bellman exponent p must be >= 2, got {p}")
    q = p / (p - 1.0)
    return BellmanParams(p=p, q=q, delta=q * (q - 1.0) / 8.0)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def eval_B(params: BellmanParams, u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u < 0) or np.any(v < 0):
        raise ValueError("B is defined on u, v >= 0")
    p, q, d = params.p, params.q, params.delta
    up, vq = u**p, v**q
    with np.errstate(divide="ignore", invalid="ignore"):
        two = u**2 * v ** (2.0 - q)
    one = d * (2.0 / p * up + (2.0 / q - 1.0) * vq)
    return _out(up + vq + np.where(up >= vq, one, d * two))


def upper_bound_B(params: BellmanParams, u, v):
    """(1 + 2/p) u^p + (2/q) v^q, which dominates B."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return _out((1.0 + 2.0 / params.p) * u**params.p + 2.0 / params.q * v**params.q)


def _powers(params: BellmanParams, u, v):
    p, q = params.p, params.q
    with np.errstate(divide="ignore", invalid="ignore"):
        up2 = u ** (p - 2)
        vq2 = v ** (q - 2)
        # v^(2-q) = 1/v^(q-2) except at v = 0, where both vanish or blow up together
        v2q = v ** (2 - q)
    with np.errstate(invalid="ignore"):
        region_one = (up2 * u * u >= vq2 * v * v) | (v == 0)
    return region_one, up2, vq2, v2q


def _grad_branchwise(params: BellmanParams, u, v, powers=None):
    p, q, d = params.p, params.q, params.delta
    r1, up2, vq2, v2q = powers if powers is not None else _powers(params, u, v)
    up1 = up2 * u
    vq1 = vq2 * v
    with np.errstate(divide="ignore", invalid="ignore"):
        du = np.where(r1, (p + 2 * d) * up1, p * up1 + 2 * d * u * v2q)
        dv = np.where(r1, (q + d * (2 - q)) * vq1, q * vq1 + d * (2 - q) * u * u * v2q / v)
    return du, dv


def _hess_branchwise(params: BellmanParams, u, v, powers=None):
    p, q, d = params.p, params.q, params.delta
    r1, up2, vq2, v2q = powers if powers is not None else _powers(params, u, v)
    with np.errstate(divide="ignore", invalid="ignore"):
        huu = np.where(r1, (p + 2 * d) * (p - 1) * up2, p * (p - 1) * up2 + 2 * d * v2q)
        huv = np.where(r1, 0.0, 2 * d * (2 - q) * u * v2q / v)
        hvv = np.where(
            r1,
            (q + d * (2 - q)) * (q - 1) * vq2,
            q * (q - 1) * vq2 + d * (2 - q) * (1 - q) * u * u * v2q / (v * v),
        )
    return huu, huv, hvv


def _check_open_region(params: BellmanParams, u, v):
    if np.any(u <= 0) or np.any(v <= 0):
        raise ValueError("derivatives of B are evaluated only for u, v > 0")
    up, vq = u**params.p, v**params.q
    if np.any(np.abs(up - vq) <= 1e-14 * np.maximum(up, vq)):
        raise ValueError("point lies on the interface u^p = v^q")


def grad_B(params: BellmanParams, u, v):
    """(dB/du, dB/dv) off the interface u^p = v^q."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_open_region(params, u, v)
    du, dv = _grad_branchwise(params, u, v)
    return _out(du), _out(dv)


def hess_quadratic_form(params: BellmanParams, u, v, alpha, beta):
    """Hessian of B applied to the direction (alpha, beta), off the interface."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_open_region(params, u, v)
    huu, huv, hvv = _hess_branchwise(params, u, v)
    return _out(huu * alpha**2 + 2 * huv * alpha * beta + hvv * beta**2)


def hess_lower_bound(params: BellmanParams, v, alpha, beta):
    v = np.asarray(v, dtype=float)
    q = params.q
    return _out(params.delta * (v ** (2 - q) * alpha**2 + v ** (q - 2) * beta**2))


# --------------------------------------------------------------------------
# mollification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Mollifier:
    """Discrete probability measure on (epsilon, 2 epsilon) standing in for rho_eps."""

    epsilon: float
    nodes: np.ndarray
    weights: np.ndarray


def _bump(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1
    out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    return out


def bump_density(epsilon: float, x):
    """Unnormalised bump exp(-1/(1-y^2)) mapped affinely onto (epsilon, 2 epsilon)."""
    return _bump((np.asarray(x, dtype=float) - 1.5 * epsilon) / (0.5 * epsilon))


def make_mollifier(epsilon: float, n_nodes: int = 32) -> Mollifier:
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    y, w = np.polynomial.legendre.leggauss(n_nodes)
    w = w * _bump(y)
    w = w / w.sum()
    nodes = epsilon * (1.5 + 0.5 * y)
    return Mollifier(epsilon=float(epsilon), nodes=nodes, weights=w)


def bracket_moment(m: Mollifier, u, r: float):
    """[u]_eps^r, the r-th moment of u + u' with u' distributed as rho_eps."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("bracket moments need u >= 0")
    return _out(np.sum((u[..., None] + m.nodes) ** r * m.weights, axis=-1))


def _shifted(m: Mollifier, u, v):
    u = np.asarray(u, dtype=float)[..., None, None]
    v = np.asarray(v, dtype=float)[..., None, None]
    uu = u + m.nodes[:, None]
    vv = v + m.nodes[None, :]
    ww = m.weights[:, None] * m.weights[None, :]
    return uu, vv, ww


def eval_B_eps(params: BellmanParams, m: Mollifier, u, v):
    uu, vv, ww = _shifted(m, u, v)
    return _out(np.sum(eval_B(params, uu, vv) * ww, axis=(-2, -1)))


def _mollified_derivatives(params, m, u, v, alpha=None, beta=None, with_value=False, chunk=1024):
    """Averages of B, its gradient and its Hessian form over the mollifier.

    B is C^1 and its second derivatives jump only on a null set, so the
    derivatives of the average are the averages of the branchwise derivatives.
    Samples are processed in chunks to keep the 32 x 32 temporaries small.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    u, v = np.broadcast_arrays(u, v)
    shape = u.shape
    u, v = u.ravel(), v.ravel()
    if alpha is not None:
        alpha = np.broadcast_to(np.asarray(alpha, dtype=float), shape).ravel()
        beta = np.broadcast_to(np.asarray(beta, dtype=float), shape).ravel()
    du, dv = np.empty(u.size), np.empty(u.size)
    form = np.empty(u.size) if alpha is not None else None
    value = np.empty(u.size) if with_value else None
    p, q, d = params.p, params.q, params.delta
    for lo in range(0, u.size, chunk):
        sl = slice(lo, lo + chunk)
        uu, vv, ww = _shifted(m, u[sl], v[sl])
        powers = _powers(params, uu, vv)
        g_u, g_v = _grad_branchwise(params, uu, vv, powers)
        du[sl] = np.sum(g_u * ww, axis=(-2, -1))
        dv[sl] = np.sum(g_v * ww, axis=(-2, -1))
        if with_value:
            r1, up2, vq2, v2q = powers
            up, vq = up2 * uu * uu, vq2 * vv * vv
            with np.errstate(invalid="ignore"):
                b = up + vq + np.where(r1, d * (2 / p * up + (2 / q - 1) * vq), d * uu * uu * v2q)
            value[sl] = np.sum(b * ww, axis=(-2, -1))
        if alpha is not None:
            huu, huv, hvv = _hess_branchwise(params, uu, vv, powers)
            a = alpha[sl, None, None]
            b_ = beta[sl, None, None]
            form[sl] = np.sum((huu * a**2 + 2 * huv * a * b_ + hvv * b_**2) * ww, axis=(-2, -1))
    def back(x):
        return None if x is None else x.reshape(shape)
    return back(du), back(dv), back(form), back(value)


def grad_B_eps(params: BellmanParams, m: Mollifier, u, v):
    du, dv, _, _ = _mollified_derivatives(params, m, u, v)
    return _out(du), _out(dv)


def hess_quadratic_form_eps(params: BellmanParams, m: Mollifier, u, v, alpha, beta):
    return _out(_mollified_derivatives(params, m, u, v, alpha, beta)[2])


def upper_bound_B_eps(params: BellmanParams, m: Mollifier, u, v):
    return _out(
        (1 + 2 / params.p) * np.asarray(bracket_moment(m, u, params.p))
        + 2 / params.q * np.asarray(bracket_moment(m, v, params.q))
    )


def product_lower_bound(m: Mollifier, v, alpha, beta, q: float = 2.0) -> bool:
    """Check [v]^(2-q) alpha^2 + [v]^(q-2) beta^2 >= 2 |alpha| |beta| within SLACK."""
    lhs = np.asarray(bracket_moment(m, v, 2 - q)) * np.asarray(alpha) ** 2 + np.asarray(
        bracket_moment(m, v, q - 2)
    ) * np.asarray(beta) ** 2
    rhs = 2 * np.abs(alpha) * np.abs(beta)
    return bool(np.all(lhs - rhs >= -SLACK))


# --------------------------------------------------------------------------
# randomized inequality sweep
# --------------------------------------------------------------------------


def _slack(lhs, rhs):
    """Signed gap lhs - rhs, scaled so that magnitudes above one count relatively."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return float(np.min((lhs - rhs) / scale))


def inequality_sweep(
    p: float,
    n_samples: int = 10_000,
    seed: int = 0,
    epsilons=(1e-1, 1e-3),
    log10_range=(-2.0, 2.0),
    n_mollified: int | None = None,
) -> dict[str, float]:
    """Worst scaled slack of every Bellman inequality over a seeded sample.

    Each entry is min(lhs - rhs) over the sample, so an inequality holds when
    its entry is >= -SLACK. The mollified inequalities use the first
    ``n_mollified`` samples (all by default; each costs a 32 x 32 tensor
    quadrature). A tenth of them are moved to u = 0 and a further tenth to
    v = 0; the first twentieth has u = v = 0.
    """
    params = make_params(p)
    P, Q, d = params.p, params.q, params.delta
    rng = np.random.default_rng(seed)
    lo, hi = log10_range
    u = 10 ** rng.uniform(lo, hi, n_samples)
    v = 10 ** rng.uniform(lo, hi, n_samples)
    alpha = rng.normal(size=n_samples)
    beta = rng.normal(size=n_samples)
    off = np.abs(u**P - v**Q) > 1e-6 * np.maximum(u**P, v**Q)
    uo, vo, ao, bo = u[off], v[off], alpha[off], beta[off]

    out: dict[str, float] = {}
    # branch agreement along the interface v = u^(p/q)
    ui = 10 ** rng.uniform(-1, 1, 256)
    vi = ui ** (P / Q)
    one = ui**P + vi**Q + d * (2 / P * ui**P + (2 / Q - 1) * vi**Q)
    two = ui**P + vi**Q + d * ui**2 * vi ** (2 - Q)
    out["branch_agreement"] = -float(np.max(np.abs(one - two) / np.maximum(1.0, np.abs(one))))

    out["upper_bound"] = _slack(upper_bound_B(params, u, v), eval_B(params, u, v))
    out["young"] = _slack(2 / P * u**P + (2 / Q - 1) * v**Q, u**2 * v ** (2 - Q))

    du, dv = grad_B(params, uo, vo)
    out["first_derivative_u"] = _slack(du / uo, 2 * d * vo ** (2 - Q))
    out["first_derivative_v"] = _slack(dv / vo, 2 * d * vo ** (Q - 2))
    out["derivative_upper_u"] = _slack(P * (1 + d) * uo ** (P - 1) + 2 * d * vo, du)
    out["derivative_upper_v"] = _slack((Q + d * (2 - Q)) * vo ** (Q - 1), dv)
    out["second_derivative"] = _slack(
        hess_quadratic_form(params, uo, vo, ao, bo), hess_lower_bound(params, vo, ao, bo)
    )

    # mollified versions, including the boundary u = 0 and v = 0
    k = n_samples if n_mollified is None else min(n_mollified, n_samples)
    um, vm = u[:k].copy(), v[:k].copy()
    alpha, beta = alpha[:k], beta[:k]
    um[: k // 10] = 0.0
    vm[k // 10 : k // 5] = 0.0
    vm[: k // 20] = 0.0
    for eps in epsilons:
        m = make_mollifier(eps)
        tag = f"eps={eps:g}"
        vb_plus = np.asarray(bracket_moment(m, vm, 2 - Q))
        vb_minus = np.asarray(bracket_moment(m, vm, Q - 2))
        due, dve, form, b_eps = _mollified_derivatives(params, m, um, vm, alpha, beta, with_value=True)
        out[f"first_derivative_u_mollified[{tag}]"] = _slack(due, d * um * vb_plus)
        out[f"first_derivative_v_mollified[{tag}]"] = _slack(dve, d * vm * vb_minus)
        out[f"second_derivative_mollified[{tag}]"] = _slack(
            form,
            d * (vb_plus * alpha**2 + vb_minus * beta**2),
        )
        out[f"upper_bound_mollified[{tag}]"] = _slack(
            upper_bound_B_eps(params, m, um, vm), b_eps
        )
        out[f"derivative_upper_u_mollified[{tag}]"] = _slack(
            P * (1 + d) * np.asarray(bracket_moment(m, um, P - 1))
            + 2 * d * np.asarray(bracket_moment(m, vm, 1)),
            due,
        )
        out[f"derivative_upper_v_mollified[{tag}]"] = _slack(
            (Q + d * (2 - Q)) * np.asarray(bracket_moment(m, vm, Q - 1)), dve
        )
        out[f"product_lower_bound[{tag}]"] = _slack(
            vb_plus * alpha**2 + vb_minus * beta**2, 2 * np.abs(alpha) * np.abs(beta)
        )
    return out
