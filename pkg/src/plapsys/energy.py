"""Discrete energies for the coupled local/nonlocal eigenproblem.

Four ingredients: the local p-Dirichlet energy (forward differences per
cell with the zero extension at the boundary), the Gagliardo seminorm
with its analytic exterior tail, the coupling constraint
G(u, v) = 2 * integral |u|^alpha |v|^beta, and the Rayleigh quotient

    J_p(u, v) = (local(u) + nonlocal(u, r) + local(v) + nonlocal(v, s)) / G(u, v).

All p-th-power sums are accumulated in scaled form (see powersum) so
large exponents neither overflow nor silently underflow.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .geometry import Domain, GridFunction
from .powersum import PowerSum


class DegenerateConstraint(ValueError):
    """Raised when G(u, v) = 0, i.e. u*v vanishes identically on the grid."""


def round_to_half(x: float) -> float:
    """Nearest multiple of 0.5."""
    return round(x * 2.0) / 2.0


@dataclass(frozen=True)
class ProblemParams:
    """Exponent tuple (p, r, s, alpha, beta, gamma) with alpha + beta = p.

    ``alpha``/``beta`` may be omitted and are then derived from
    ``gamma * p`` (rounded to the nearest half, clamped to keep both
    coupling exponents >= 1).  ``gamma`` defaults to alpha/p.
    """

    p: float
    r: float
    s: float
    alpha: float = None
    beta: float = None
    gamma: float = None

    def __post_init__(self):
        p = float(self.p)
        if not (p > 1.0 and math.isfinite(p)):
            raise ValueError(f"p must be finite and > 1, got {p}")
        for name in ("r", "s"):
            t = float(getattr(self, name))
            if not (0.0 < t < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {t}")
            object.__setattr__(self, name, t)
        alpha, beta, gamma = self.alpha, self.beta, self.gamma
        if alpha is None and beta is None:
            if gamma is None:
                raise ValueError("need alpha/beta or gamma to fix the coupling split")
            alpha = min(max(round_to_half(float(gamma) * p), 1.0), p - 1.0)
            beta = p - alpha
        elif alpha is None:
            alpha = p - float(beta)
            beta = float(beta)
        elif beta is None:
            alpha = float(alpha)
            beta = p - alpha
        else:
            alpha, beta = float(alpha), float(beta)
            if abs(alpha + beta - p) > 1e-9 * max(1.0, p):
                raise ValueError(
                    f"alpha + beta must equal p: alpha={alpha}, beta={beta}, p={p}")
            beta = p - alpha  # enforce the identity exactly
        if alpha < 1.0 or beta < 1.0:
            raise ValueError(f"coupling exponents must be >= 1, got {alpha}, {beta}")
        if gamma is None:
            gamma = alpha / p
        gamma = float(gamma)
        if not (0.0 < gamma < 1.0):
            raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)


@dataclass(frozen=True)
class EnergyBreakdown:
    """The four energy components, the constraint value, and their quotient."""

    local_u: float
    frac_u: float
    local_v: float
    frac_v: float
    constraint_G: float
    J: float


def _same_domain(*fns: GridFunction) -> Domain:
    dom = fns[0].domain
    for f in fns[1:]:
        if f.domain is not dom:
            raise ValueError("grid functions live on mismatched domains")
    return dom


def _padded_lattice(w: GridFunction) -> np.ndarray:
    """Node values placed on the lattice with a one-cell zero border."""
    dom = w.domain
    if dom.dim == 1:
        n = dom.node_grid.shape[0]
        padded = np.zeros(n + 2)
        padded[1:-1] = w.values
        return padded
    nx, ny = dom.node_grid.shape
    padded = np.zeros((nx + 2, ny + 2))
    li = dom.lattice_index
    padded[li[:, 0] + 1, li[:, 1] + 1] = w.values
    return padded


def _cell_gradients(w: GridFunction):
    """Forward-difference gradient components on all cells touching the domain."""
    dom = w.domain
    padded = _padded_lattice(w)
    if dom.dim == 1:
        (h,) = dom.spacings
        return (np.diff(padded) / h,)
    hx, hy = dom.spacings
    wx = (padded[1:, :-1] - padded[:-1, :-1]) / hx
    wy = (padded[:-1, 1:] - padded[:-1, :-1]) / hy
    return wx, wy


def local_p_energy_scaled(w: GridFunction, p: float) -> PowerSum:
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    dom = w.domain
    grads = _cell_gradients(w)
    if dom.dim == 1:
        mag = np.abs(grads[0])
    else:
        mag = np.hypot(*grads)
    roots = mag.ravel() * dom.cell_volume ** (1.0 / p)
    return PowerSum.from_roots(roots, p)


def local_p_energy(w: GridFunction, p: float) -> float:
    """Sum over cells of |forward-difference gradient|^p * cell volume.

    One-sided differences against the zero extension at the boundary, so
    functions that do not vanish toward the boundary pay for the jump.
    """
    return local_p_energy_scaled(w, p).value


def local_p_gradient(w: GridFunction, p: float) -> np.ndarray:
    """Nodal derivative of local_p_energy; requires p >= 2."""
    if p < 2.0:
        raise ValueError(f"gradients need p >= 2, got {p}")
    dom = w.domain
    cv = dom.cell_volume
    grads = _cell_gradients(w)
    if dom.dim == 1:
        (h,) = dom.spacings
        q = grads[0]
        a = np.abs(q) ** (p - 2.0) * q
        return p * (cv / h) * (a[:-1] - a[1:])
    hx, hy = dom.spacings
    wx, wy = grads
    g2 = wx * wx + wy * wy
    m = g2 ** ((p - 2.0) / 2.0)
    ax, ay = m * wx, m * wy
    nx, ny = dom.node_grid.shape
    gp = np.zeros((nx + 2, ny + 2))
    gp[: nx + 1, : ny + 1] -= ax / hx + ay / hy
    gp[1: nx + 2, : ny + 1] += ax / hx
    gp[: nx + 1, 1: ny + 2] += ay / hy
    li = dom.lattice_index
    return p * cv * gp[li[:, 0] + 1, li[:, 1] + 1]


def _gagliardo_root_kernel(dom: Domain, t: float, p: float) -> np.ndarray:
    key = ("gag_rk", round(t, 14), round(p, 14))
    if key not in dom._cache:
        _, _, d = dom.pair_triu()
        expo = -(dom.dim + t * p) / p
        dom._cache[key] = (2.0 * dom.cell_volume**2) ** (1.0 / p) * d**expo
    return dom._cache[key]


def _gagliardo_kernel_triu(dom: Domain, t: float, p: float) -> np.ndarray:
    key = ("gag_kt", round(t * p, 12))
    if key not in dom._cache:
        _, _, d = dom.pair_triu()
        dom._cache[key] = d ** (-(dom.dim + t * p)) * dom.cell_volume**2
    return dom._cache[key]


def _check_order(t: float, p: float):
    if not (0.0 < t < 1.0):
        raise ValueError(f"fractional order must lie in (0, 1), got {t}")
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")


def gagliardo_energy_scaled(w: GridFunction, t: float, p: float) -> PowerSum:
    _check_order(t, p)
    dom = w.domain
    iu, ju, _ = dom.pair_triu()
    diffs = np.abs(w.values[iu] - w.values[ju])
    roots_int = diffs * _gagliardo_root_kernel(dom, t, p)
    log_t = dom.exterior_tail_log(t * p)
    tail_scale = np.exp((math.log(2.0) + math.log(dom.cell_volume) + log_t) / p)
    roots_tail = np.abs(w.values) * tail_scale
    return PowerSum.from_roots(np.concatenate([roots_int, roots_tail]), p)


def gagliardo_energy(w: GridFunction, t: float, p: float) -> float:
    """Discrete Gagliardo p-seminorm of the zero extension of w.

    Interior node pairs are summed with the singular kernel
    |x_i - x_j|^(-(dim + t p)) and the diagonal excluded; the exterior
    contributes 2 * sum_i |w_i|^p * T_i * cellvol with T_i the exact
    integral of the kernel over the complement of the domain.
    """
    return gagliardo_energy_scaled(w, t, p).value


def gagliardo_gradient(w: GridFunction, t: float, p: float) -> np.ndarray:
    """Nodal derivative of gagliardo_energy; requires p >= 2."""
    _check_order(t, p)
    if p < 2.0:
        raise ValueError(f"gradients need p >= 2, got {p}")
    dom = w.domain
    n = dom.n_nodes
    iu, ju, _ = dom.pair_triu()
    k = _gagliardo_kernel_triu(dom, t, p)
    diff = w.values[iu] - w.values[ju]
    a = np.abs(diff) ** (p - 2.0) * diff * k
    row = np.bincount(iu, weights=a, minlength=n) - np.bincount(ju, weights=a, minlength=n)
    tail = np.exp(np.minimum(dom.exterior_tail_log(t * p), 700.0))
    g_tail = np.abs(w.values) ** (p - 2.0) * w.values * tail * dom.cell_volume
    return 2.0 * p * (row + g_tail)


def constraint_G_scaled(u: GridFunction, v: GridFunction,
                        alpha: float, beta: float) -> PowerSum:
    _same_domain(u, v)
    if alpha < 1.0 or beta < 1.0:
        raise ValueError("coupling exponents must be >= 1")
    p = alpha + beta
    dom = u.domain
    roots = ((2.0 * dom.cell_volume) ** (1.0 / p)
             * np.abs(u.values) ** (alpha / p) * np.abs(v.values) ** (beta / p))
    return PowerSum.from_roots(roots, p)


def constraint_G(u: GridFunction, v: GridFunction,
                 alpha: float, beta: float) -> float:
    """2 * sum_i |u_i|^alpha |v_i|^beta * cell volume."""
    return constraint_G_scaled(u, v, alpha, beta).value


def constraint_G_gradient(u: GridFunction, v: GridFunction,
                          alpha: float, beta: float):
    """Nodal derivatives of constraint_G with respect to u and v."""
    dom = _same_domain(u, v)
    cv = dom.cell_volume
    au, av = np.abs(u.values), np.abs(v.values)
    gu = 2.0 * alpha * cv * np.sign(u.values) * au ** (alpha - 1.0) * av**beta
    gv = 2.0 * beta * cv * au**alpha * np.sign(v.values) * av ** (beta - 1.0)
    return gu, gv


def scaled_energies(u: GridFunction, v: GridFunction, params: ProblemParams):
    """(I, G) as scaled power sums; I combines all four energy components."""
    _same_domain(u, v)
    p = params.p
    total = (local_p_energy_scaled(u, p)
             + gagliardo_energy_scaled(u, params.r, p)
             + local_p_energy_scaled(v, p)
             + gagliardo_energy_scaled(v, params.s, p))
    g = constraint_G_scaled(u, v, params.alpha, params.beta)
    return total, g


def rayleigh_Jp(u: GridFunction, v: GridFunction,
                params: ProblemParams) -> EnergyBreakdown:
    """Rayleigh quotient of the coupled energies over the constraint.

    Raises DegenerateConstraint when G(u, v) = 0, which happens exactly
    when u * v vanishes at every node.
    """
    _same_domain(u, v)
    p = params.p
    lu = local_p_energy_scaled(u, p)
    fu = gagliardo_energy_scaled(u, params.r, p)
    lv = local_p_energy_scaled(v, p)
    fv = gagliardo_energy_scaled(v, params.s, p)
    g = constraint_G_scaled(u, v, params.alpha, params.beta)
    if g.base == 0.0:
        raise DegenerateConstraint("constraint G(u, v) vanishes on the grid")
    total = lu + fu + lv + fv
    j = math.exp(total.log - g.log) if total.base > 0.0 else 0.0
    return EnergyBreakdown(
        local_u=lu.value, frac_u=fu.value, local_v=lv.value, frac_v=fv.value,
        constraint_G=g.value, J=j,
    )


def grad_I(u: GridFunction, v: GridFunction, params: ProblemParams):
    """First variation of the total energy I with respect to nodal values."""
    _same_domain(u, v)
    if params.p < 2.0:
        raise ValueError("grad_I requires p >= 2")
    gu = local_p_gradient(u, params.p) + gagliardo_gradient(u, params.r, params.p)
    gv = local_p_gradient(v, params.p) + gagliardo_gradient(v, params.s, params.p)
    return GridFunction(u.domain, gu), GridFunction(v.domain, gv)


def grad_G(u: GridFunction, v: GridFunction, params: ProblemParams):
    """First variation of the coupling constraint."""
    if params.p < 2.0:
        raise ValueError("grad_G requires p >= 2")
    gu, gv = constraint_G_gradient(u, v, params.alpha, params.beta)
    return GridFunction(u.domain, gu), GridFunction(v.domain, gv)
