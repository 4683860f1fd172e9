"""Large-p behaviour: the limit eigenvalue and p-sweeps toward it.

As p grows with alpha/p -> gamma, the p-th root of the first eigenvalue
approaches

    lambda_inf = max{ 1/R, R^-(gamma*r + (1-gamma)*s) },

R the inradius.  This module evaluates that formula, the limit
functional J_inf (sup-gradients and Holder seminorms over the coupling
sup), the equivalent constrained min-max characterization, and runs
solver sweeps over increasing p recording the gap per step.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .geometry import Domain, GridFunction, inradius
from .energy import ProblemParams, round_to_half
from .eig_solver import SolverOptions, solve_eigenpair


@dataclass(frozen=True)
class LimitParams:
    gamma: float
    r: float
    s: float
    R: float

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        for name in ("r", "s"):
            t = getattr(self, name)
            if not (0.0 < t < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {t}")
        if not (self.R > 0.0 and math.isfinite(self.R)):
            raise ValueError(f"inradius must be positive, got {self.R}")

    @property
    def exponent(self) -> float:
        """Convex combination gamma*r + (1-gamma)*s of the two orders."""
        return self.gamma * self.r + (1.0 - self.gamma) * self.s


@dataclass(frozen=True)
class SweepRecord:
    p: float
    alpha: float
    beta: float
    lambda_p: float
    lambda_root: float
    lambda_inf: float
    gap: float
    iterations: int
    converged: bool = True


def lambda_infinity(lp: LimitParams) -> float:
    """max{1/R, R^-(gamma r + (1-gamma) s)}."""
    return max(1.0 / lp.R, lp.R ** (-lp.exponent))


def holder_seminorm(w: GridFunction, t: float) -> float:
    """sup over distinct node pairs of |w_i - w_j| / |x_i - x_j|^t."""
    if not (0.0 < t < 1.0):
        raise ValueError(f"order must lie in (0, 1), got {t}")
    dom = w.domain
    if dom.n_nodes < 2:
        raise ValueError("need at least two nodes")
    iu, ju, d = dom.pair_triu()
    return float(np.max(np.abs(w.values[iu] - w.values[ju]) / d**t))


def sup_gradient(w: GridFunction) -> float:
    """Discrete sup-norm of the gradient of the zero extension.

    Maximum over axis-aligned neighbor differences plus, at every node,
    the one-sided quotient |w_i| / boundary_distance(x_i); without the
    boundary quotient the sup-gradient of cone-like profiles is
    underestimated near the boundary.
    """
    dom = w.domain
    best = float(np.max(np.abs(w.values) / dom.boundary_distance))
    for axis in range(dom.dim):
        nbr = dom.axis_neighbor(axis, +1)
        has = nbr >= 0
        if has.any():
            diffs = np.abs(w.values[nbr[has]] - w.values[has])
            best = max(best, float(diffs.max()) / dom.spacings[axis])
    return best


def J_infinity(w: GridFunction, z: GridFunction, lp: LimitParams) -> float:
    """Limit quotient: max of sup-gradients and Holder seminorms over the
    sup of the coupling weight w^gamma z^(1-gamma)."""
    if w.domain is not z.domain:
        raise ValueError("grid functions live on mismatched domains")
    if np.any(w.values < 0) or np.any(z.values < 0):
        raise ValueError("J_infinity expects nonnegative inputs")
    den = float(np.max(w.values**lp.gamma * z.values ** (1.0 - lp.gamma)))
    if den == 0.0:
        raise ZeroDivisionError("coupling weight w^gamma z^(1-gamma) vanishes")
    num = max(
        sup_gradient(w),
        holder_seminorm(w, lp.r),
        sup_gradient(z),
        holder_seminorm(z, lp.s),
    )
    return num / den


def _golden_min(f, lo: float, hi: float, iters: int = 90) -> tuple[float, float]:
    """Golden-section minimum of a unimodal f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def minmax_infimum(lp: LimitParams) -> float:
    """Smallest possible max{a/d, a/d^r, b/d, b/d^s} subject to
    a^gamma b^(1-gamma) = 1 and d in (0, R].

    The constraint eliminates b = a^(-gamma/(1-gamma)); the search runs a
    coarse grid over d combined with golden-section over log a (the max
    of the two one-sided branches is unimodal in log a), then refines d.
    """
    g = lp.gamma

    def objective(log_a: float, d: float) -> float:
        a = math.exp(log_a)
        b = a ** (-g / (1.0 - g))
        return max(a / d, a / d**lp.r, b / d, b / d**lp.s)

    def best_over_a(d: float) -> float:
        return _golden_min(lambda la: objective(la, d), -25.0, 25.0)[1]

    d_grid = np.geomspace(lp.R * 1e-3, lp.R, 25)
    vals = [best_over_a(float(d)) for d in d_grid]
    j = int(np.argmin(vals))
    lo = float(d_grid[max(0, j - 1)])
    hi = float(d_grid[min(len(d_grid) - 1, j + 1)])
    _, best = _golden_min(best_over_a, lo, hi, iters=60)
    return min(best, min(vals))


def alpha_beta_schedule(gamma: float, p: float) -> tuple[float, float]:
    """Coupling split for one sweep step: alpha ~ gamma*p rounded to the
    nearest half, both exponents kept >= 1."""
    alpha = min(max(round_to_half(gamma * p), 1.0), p - 1.0)
    return alpha, p - alpha


def sweep_p(domain: Domain, gamma: float, r: float, s: float,
            p_list, opts: SolverOptions = SolverOptions()) -> list[SweepRecord]:
    """One eigensolve per p on a fixed grid; rows ordered by p.

    Solver non-convergence is flagged on the row, not fatal.
    """
    ps = [float(p) for p in p_list]
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise ValueError("p_list must be strictly increasing")
    if ps and ps[0] < 2.0:
        raise ValueError("sweep requires p >= 2")
    lp = LimitParams(gamma=gamma, r=r, s=s, R=inradius(domain))
    lam_inf = lambda_infinity(lp)
    records = []
    for p in ps:
        alpha, beta = alpha_beta_schedule(gamma, p)
        params = ProblemParams(p=p, r=r, s=s, alpha=alpha, beta=beta, gamma=gamma)
        pair = solve_eigenpair(domain, params, opts)
        lam_root = math.exp(pair.log_lam / p)
        records.append(SweepRecord(
            p=p, alpha=alpha, beta=beta, lambda_p=pair.lam,
            lambda_root=lam_root, lambda_inf=lam_inf,
            gap=abs(lam_root - lam_inf), iterations=pair.iterations,
            converged=pair.converged,
        ))
    return records


SWEEP_CSV_HEADER = "p,alpha,beta,lambda_p,lambda_root,lambda_inf,gap,iters"


def sweep_csv_text(records) -> str:
    lines = [SWEEP_CSV_HEADER]
    for rec in records:
        lines.append(",".join([
            f"{rec.p:.17g}", f"{rec.alpha:.17g}", f"{rec.beta:.17g}",
            f"{rec.lambda_p:.17g}", f"{rec.lambda_root:.17g}",
            f"{rec.lambda_inf:.17g}", f"{rec.gap:.17g}", str(rec.iterations),
        ]))
    return "\n".join(lines) + "\n"
