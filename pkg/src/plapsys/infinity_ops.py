"""Pointwise sup/inf Holder quotient operators and limit-system residuals.

For a grid function extended by zero, the supremal t-Holder quotient at a
node splits into an interior max over nodes and an exact exterior part:
the exterior supremum of (phi(x) - 0)/|x - y|^t is phi(x)/d(x)^t at the
nearest boundary point when phi(x) > 0 and the limit 0 otherwise.  The
discrete p-level operators integrate the signed p-power quotients with
the same singular kernel as the nonlocal energy and converge to these
sup/inf quotients as p grows.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .geometry import Domain, GridFunction
from .powersum import PowerSum
from .asymptotics import LimitParams, lambda_infinity, sup_gradient

FLAG_OK = ""
FLAG_BOUNDARY = "boundary"
FLAG_ONESIDED = "one_sided"
FLAG_VERTEX = "vertex"


@dataclass(frozen=True)
class PointEval:
    """One node's differential data for a given Holder order."""

    location: np.ndarray
    gradient: np.ndarray
    inf_laplacian: float
    L_plus_t: float
    L_minus_t: float


def L_infinity_pm(phi: GridFunction, node: int, t: float) -> tuple[float, float]:
    """Supremal and infimal t-Holder difference quotients at a node.

    The sup/inf run over all of space: grid nodes plus the exact
    exterior extremum of the zero extension.
    """
    if not (0.0 < t < 1.0):
        raise ValueError(f"order must lie in (0, 1), got {t}")
    dom = phi.domain
    vals = phi.values
    d = dom.pair_distances()[node]
    q = (vals[node] - vals) / d**t  # diagonal entry is 0/inf = 0, harmless
    bd = dom.boundary_distance[node] ** t
    ext_sup = max(vals[node], 0.0) / bd
    ext_inf = min(vals[node], 0.0) / bd
    mask = np.arange(dom.n_nodes) != node
    return (
        float(max(np.max(q[mask]), ext_sup)),
        float(min(np.min(q[mask]), ext_inf)),
    )


def discrete_Lp_pm(phi: GridFunction, node: int, t: float,
                   p: float) -> tuple[float, float]:
    """(p-1)-th roots of the one-sided p-level quotient integrals.

    Interior part by nodal quadrature with the diagonal excluded;
    exterior part analytic (the zero extension makes it a pure kernel
    integral weighted by phi(x)^(p-1)).  Both roots are nonnegative; the
    minus root approximates the negative of the infimal quotient.
    """
    if not (0.0 < t < 1.0):
        raise ValueError(f"order must lie in (0, 1), got {t}")
    dom = phi.domain
    if t * p <= dom.dim:
        raise ValueError(f"exterior tail diverges: need t*p > dim, got {t * p}")
    q = p - 1.0
    vals = phi.values
    d = dom.pair_distances()[node]  # +inf on the diagonal excludes it
    delta = vals[node] - vals
    kern_root = (2.0 * dom.cell_volume) ** (1.0 / q) * d ** (-(dom.dim + t * p) / q)
    log_tail = dom.exterior_tail_log(t * p)[node]
    tail_root = math.exp((math.log(2.0) + log_tail) / q)
    # exterior quotient is phi(x) - 0, so the plus side carries phi(x)^+
    plus_roots = np.append(np.maximum(delta, 0.0) * kern_root,
                           max(vals[node], 0.0) * tail_root)
    minus_roots = np.append(np.maximum(-delta, 0.0) * kern_root,
                            max(-vals[node], 0.0) * tail_root)
    lp_plus = PowerSum.from_roots(plus_roots, q).root()
    lp_minus = PowerSum.from_roots(minus_roots, q).root()
    return float(lp_plus), float(lp_minus)


def _lattice_value(w: GridFunction, li: int, lj: int) -> tuple[float, bool]:
    """Value at a lattice position; (0, False) when it is not a node."""
    grid = w.domain.node_grid
    if 0 <= li < grid.shape[0] and 0 <= lj < grid.shape[1]:
        idx = grid[li, lj]
        if idx >= 0:
            return float(w.values[idx]), True
    return 0.0, False


def _axis_derivatives(w: GridFunction, node: int, axis: int):
    """(first, second) centered differences along one axis plus a flag.

    Missing neighbors on interval/rectangle grids lie exactly on the
    boundary, so the zero extension value is exact there (flagged
    "boundary"); on disk grids the stencil is shifted inward instead
    (flagged "one_sided") because the masked lattice point is not on
    the boundary circle.
    """
    dom = w.domain
    h = dom.spacings[axis]
    nl = dom.axis_neighbor(axis, -1)[node]
    nr = dom.axis_neighbor(axis, +1)[node]
    wc = w.values[node]
    if nl >= 0 and nr >= 0:
        wl, wr = w.values[nl], w.values[nr]
        return (wr - wl) / (2 * h), (wr - 2 * wc + wl) / h**2, FLAG_OK
    if dom.shape != "disk":
        wl = w.values[nl] if nl >= 0 else 0.0
        wr = w.values[nr] if nr >= 0 else 0.0
        return (wr - wl) / (2 * h), (wr - 2 * wc + wl) / h**2, FLAG_BOUNDARY
    if nl >= 0:
        nll = dom.axis_neighbor(axis, -1)[nl]
        if nll >= 0:
            w1, w2 = w.values[nl], w.values[nll]
            return (3 * wc - 4 * w1 + w2) / (2 * h), (wc - 2 * w1 + w2) / h**2, FLAG_ONESIDED
        if nl >= 0:
            return (wc - w.values[nl]) / h, 0.0, FLAG_ONESIDED
    if nr >= 0:
        nrr = dom.axis_neighbor(axis, +1)[nr]
        if nrr >= 0:
            w1, w2 = w.values[nr], w.values[nrr]
            return (-3 * wc + 4 * w1 - w2) / (2 * h), (wc - 2 * w1 + w2) / h**2, FLAG_ONESIDED
        return (w.values[nr] - wc) / h, 0.0, FLAG_ONESIDED
    return 0.0, 0.0, FLAG_ONESIDED


def _point_derivatives(w: GridFunction, node: int):
    """Gradient vector, infinity-Laplacian, and stencil flag at a node."""
    dom = w.domain
    if dom.dim == 1:
        g, sec, flag = _axis_derivatives(w, node, 0)
        return np.array([g]), g * g * sec, flag
    gx, sxx, fx = _axis_derivatives(w, node, 0)
    gy, syy, fy = _axis_derivatives(w, node, 1)
    li, lj = w.domain.lattice_index[node]
    vpp, opp = _lattice_value(w, li + 1, lj + 1)
    vpm, opm = _lattice_value(w, li + 1, lj - 1)
    vmp, omp = _lattice_value(w, li - 1, lj + 1)
    vmm, omm = _lattice_value(w, li - 1, lj - 1)
    hx, hy = dom.spacings
    sxy = (vpp - vpm - vmp + vmm) / (4 * hx * hy)
    flag = fx or fy
    if not (opp and opm and omp and omm) and not flag:
        flag = FLAG_BOUNDARY if dom.shape != "disk" else FLAG_ONESIDED
    dinf = gx * gx * sxx + 2 * gx * gy * sxy + gy * gy * syy
    return np.array([gx, gy]), dinf, flag


def infinity_laplacian(phi: GridFunction, node: int) -> float:
    """<D^2 phi grad phi, grad phi> by centered second differences.

    Falls back to shifted one-sided stencils where the centered stencil
    leaves the grid; accuracy there is first order only.
    """
    _, dinf, _ = _point_derivatives(phi, node)
    return float(dinf)


def evaluate_point(phi: GridFunction, node: int, t: float) -> PointEval:
    grad, dinf, _ = _point_derivatives(phi, node)
    lp, lm = L_infinity_pm(phi, node, t)
    return PointEval(
        location=phi.domain.coords[node].copy(),
        gradient=grad,
        inf_laplacian=dinf,
        L_plus_t=lp,
        L_minus_t=lm,
    )


def _vertex_jump(w: GridFunction, node: int) -> float:
    """Largest slope jump across the node (|second difference| * h)."""
    dom = w.domain
    worst = 0.0
    for axis in range(dom.dim):
        _, sec, flag = _axis_derivatives(w, node, axis)
        if flag == FLAG_OK or flag == FLAG_BOUNDARY:
            worst = max(worst, abs(sec) * dom.spacings[axis])
    return worst


@dataclass
class ResidualReport:
    """Pointwise limit-system residuals for the pair (u, v).

    G1/G2 follow the min-structure of the two coupled limit equations:
    the first (order r) acts on u with coupling weight u^g v^(1-g), the
    second (order s) acts on v with roles swapped.  Nodes whose stencil
    crosses the boundary or a detected slope kink carry a flag and are
    excluded from the summary extrema.
    """

    nodes: np.ndarray
    coords: np.ndarray
    G1_r: np.ndarray
    G2_r: np.ndarray
    G1_s: np.ndarray
    G2_s: np.ndarray
    flags: list
    max_abs_residual: float
    signed_max: float
    signed_min: float


def residuals_limit_system(u: GridFunction, v: GridFunction, lp: LimitParams,
                           nodes=None) -> ResidualReport:
    if u.domain is not v.domain:
        raise ValueError("grid functions live on mismatched domains")
    if np.any(u.values < 0) or np.any(v.values < 0):
        raise ValueError("residuals expect nonnegative candidates")
    dom = u.domain
    idx = np.arange(dom.n_nodes) if nodes is None else np.asarray(list(nodes), dtype=int)
    lam = lambda_infinity(lp)
    gam = lp.gamma
    slope_u = sup_gradient(u)
    slope_v = sup_gradient(v)

    def equation(w, other, t, own_slope, node):
        grad, dinf, flag = _point_derivatives(w, node)
        lplus, lminus = L_infinity_pm(w, node, t)
        gmag = float(np.linalg.norm(grad))
        coup = lam * w.values[node] ** gam * other.values[node] ** (1.0 - gam)
        g1 = min(lplus + lminus, lplus - coup, lplus - gmag)
        g2 = min(-dinf, gmag - coup, gmag + lminus, gmag - lplus)
        if flag == FLAG_OK and _vertex_jump(w, node) > 0.25 * max(own_slope, 1e-300):
            flag = FLAG_VERTEX
        return g1, g2, flag

    g1r = np.empty(idx.size)
    g2r = np.empty(idx.size)
    g1s = np.empty(idx.size)
    g2s = np.empty(idx.size)
    flags = []
    for k, node in enumerate(idx):
        g1r[k], g2r[k], fu = equation(u, v, lp.r, slope_u, int(node))
        g1s[k], g2s[k], fv = equation(v, u, lp.s, slope_v, int(node))
        flags.append(fu or fv)

    clean = np.array([f == FLAG_OK for f in flags])
    eq1 = np.maximum(g1r, g2r)
    eq2 = np.maximum(g1s, g2s)
    if clean.any():
        both = np.concatenate([eq1[clean], eq2[clean]])
        max_abs = float(np.max(np.abs(both)))
        smax, smin = float(both.max()), float(both.min())
    else:
        max_abs = math.nan
        smax = smin = math.nan
    return ResidualReport(
        nodes=idx, coords=dom.coords[idx], G1_r=g1r, G2_r=g2r,
        G1_s=g1s, G2_s=g2s, flags=flags,
        max_abs_residual=max_abs, signed_max=smax, signed_min=smin,
    )


def residual_csv_text(report: ResidualReport) -> str:
    dim = report.coords.shape[1]
    header = ("node_x,node_y" if dim == 2 else "node_x") + ",G1_r,G2_r,G1_s,G2_s,flag"
    lines = [header]
    for k in range(report.nodes.size):
        xy = ",".join(f"{c:.17g}" for c in report.coords[k])
        lines.append(
            f"{xy},{report.G1_r[k]:.17g},{report.G2_r[k]:.17g},"
            f"{report.G1_s[k]:.17g},{report.G2_s[k]:.17g},{report.flags[k]}")
    return "\n".join(lines) + "\n"
