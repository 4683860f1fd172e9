"""Numerical oracles for the algebraic inequalities the solver relies on.

Each check returns a signed margin whose sign certifies the inequality;
suites sweep exhaustive grids and seeded random corpora and report the
worst margin against the scaled tolerance 1e-10 * (1 + largest term).
"""

from __future__ import annotations

from dataclasses import dataclass
import json
import math
import time

import numpy as np

from .powersum import PowerSum

BASE_TOL = 1e-10


@dataclass(frozen=True)
class SampleBatch:
    """Seeded sampling plan for one randomized corpus."""

    count: int
    seed: int
    box: tuple  # ((lo, hi), ...) per variable
    tolerance: float = BASE_TOL

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")

    def draw(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        cols = [rng.uniform(lo, hi, self.count) for lo, hi in self.box]
        return np.stack(cols, axis=1)


def scaled_tol(*terms) -> np.ndarray:
    """1e-10 * (1 + magnitude of the largest participating term)."""
    mags = [np.abs(np.asarray(t, dtype=float)) for t in terms]
    biggest = mags[0]
    for m in mags[1:]:
        biggest = np.maximum(biggest, m)
    return BASE_TOL * (1.0 + biggest)


def _pnorm2(a, b, p):
    return (a**p + b**p) ** (1.0 / p)


def check_quadruple_triangle(x, y, w, z, p):
    """Margin of | |(x,y)|_p - |(w,z)|_p | <= |(x-w, y-z)|_p for nonnegative
    entries; returns lhs - rhs (nonpositive when the inequality holds)."""
    x, y, w, z = (np.asarray(a, dtype=float) for a in (x, y, w, z))
    if np.any(x < 0) or np.any(y < 0) or np.any(w < 0) or np.any(z < 0):
        raise ValueError("inputs must be nonnegative")
    if np.any(np.asarray(p) < 1):
        raise ValueError("p must be >= 1")
    lhs = np.abs(_pnorm2(x, y, p) - _pnorm2(w, z, p))
    rhs = _pnorm2(np.abs(x - w), np.abs(y - z), p)
    return lhs - rhs


def check_product_power(a, b, c, d, alpha, beta):
    """Margin of (a^p+b^p)^(alpha/p) (c^p+d^p)^(beta/p) >= a^alpha c^beta
    + b^alpha d^beta for positive entries, p = alpha + beta > 1.

    Returns (margin, equality_flag); the flag marks proportional pairs
    (a, c) = k (b, d), the exact equality case.
    """
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    if np.any(a <= 0) or np.any(b <= 0) or np.any(c <= 0) or np.any(d <= 0):
        raise ValueError("inputs must be strictly positive")
    alpha, beta = float(alpha), float(beta)
    if alpha <= 0 or beta <= 0 or alpha + beta <= 1:
        raise ValueError("need alpha, beta > 0 with alpha + beta > 1")
    p = alpha + beta
    lhs = (a**p + b**p) ** (alpha / p) * (c**p + d**p) ** (beta / p)
    rhs = a**alpha * c**beta + b**alpha * d**beta
    margin = lhs - rhs
    ratio_gap = np.abs(a * d - b * c)
    eq_flag = ratio_gap <= 1e-9 * (1.0 + np.abs(a * d) + np.abs(b * c))
    return margin, eq_flag


def check_hidden_convexity_pointwise(a1, a2, g1, g2, p):
    """Pointwise convexity margin of the p-mean.

    With phi = ((a1^p + a2^p)/2)^(1/p) and its chain-rule gradient
    g_phi = phi^(1-p) (a1^(p-1) g1 + a2^(p-1) g2)/2, returns
    (|g1|^p + |g2|^p)/2 - |g_phi|^p, which is nonnegative.
    """
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    if np.any(a1 <= 0) or np.any(a2 <= 0):
        raise ValueError("levels a1, a2 must be strictly positive")
    if p <= 1:
        raise ValueError("p must exceed 1")
    phi = ((a1**p + a2**p) / 2.0) ** (1.0 / p)
    coeff1 = 0.5 * phi ** (1.0 - p) * a1 ** (p - 1.0)
    coeff2 = 0.5 * phi ** (1.0 - p) * a2 ** (p - 1.0)
    gphi = coeff1[..., None] * g1 + coeff2[..., None] * g2
    n1 = np.linalg.norm(g1, axis=-1)
    n2 = np.linalg.norm(g2, axis=-1)
    nphi = np.linalg.norm(gphi, axis=-1)
    return 0.5 * (n1**p + n2**p) - nphi**p


def check_unit_cube_triangle(x, y, z, p):
    """f(x,y,z) = |(x^p+y^p)^(1/p) - (z^p+1)^(1/p)| - ((1-x)^p + |y-z|^p)^(1/p)
    on the unit cube; nonpositive everywhere for p >= 1."""
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    if np.any((x < 0) | (x > 1) | (y < 0) | (y > 1) | (z < 0) | (z > 1)):
        raise ValueError("inputs must lie in [0, 1]^3")
    if np.any(np.asarray(p) < 1):
        raise ValueError("p must be >= 1")
    lhs = np.abs(_pnorm2(x, y, p) - _pnorm2(z, np.ones_like(z), p))
    rhs = ((1.0 - x) ** p + np.abs(y - z) ** p) ** (1.0 / p)
    return lhs - rhs


# -- sup-norm limit families ------------------------------------------

_A2_FAMILIES = {}


def _register_family(name):
    def deco(fn):
        _A2_FAMILIES[name] = fn
        return fn
    return deco


@_register_family("interior_ones")
def _family_interior_ones():
    """f = 1 on (0,1), zero outside: exterior limit 0, target 1."""
    return ([(0.0, 1.0, lambda x: np.ones_like(x))], 0.0, 1.0, 0.02)


@_register_family("exterior_lump")
def _family_exterior_lump():
    """f = 1 on (0,1) plus a height-2 unit-length lump on (2,3): the lump's
    L^p norm is exactly 2 for every p, so the target is max{1, 2} = 2."""
    pieces = [(0.0, 1.0, lambda x: np.ones_like(x)),
              (2.0, 3.0, lambda x: 2.0 * np.ones_like(x))]
    return (pieces, 2.0, 2.0, 0.02)


@_register_family("interior_ramp")
def _family_interior_ramp():
    """f(x) = x on (0,1): sup-norm 1 approached from below as p grows."""
    return ([(0.0, 1.0, lambda x: x)], 0.0, 1.0, 0.03)


@dataclass(frozen=True)
class PnormLimitResult:
    family: str
    p_list: tuple
    values: tuple
    target: float
    tolerance: float

    @property
    def final_gap(self) -> float:
        return abs(self.values[-1] - self.target) / self.target


def check_pnorm_sup_limit(family_id: str, p_list) -> PnormLimitResult:
    """L^p norms over the whole line for growing p against the limit
    max{interior sup-norm, exterior norm limit}."""
    if family_id not in _A2_FAMILIES:
        raise KeyError(f"unknown sample family {family_id!r}")
    pieces, ext_limit, sup_norm, tol = _A2_FAMILIES[family_id]()
    target = max(sup_norm, ext_limit)
    m = 4001
    values = []
    for p in p_list:
        total = PowerSum.zero(float(p))
        for lo, hi, fn in pieces:
            xs = lo + (hi - lo) * (np.arange(m) + 0.5) / m
            dx = (hi - lo) / m
            roots = np.abs(fn(xs)) * dx ** (1.0 / p)
            total = total + PowerSum.from_roots(roots, float(p))
        values.append(total.root())
    return PnormLimitResult(
        family=family_id, p_list=tuple(float(p) for p in p_list),
        values=tuple(values), target=target, tolerance=tol,
    )


# -- suite runner ------------------------------------------------------

@dataclass(frozen=True)
class SuiteResult:
    suite: str
    samples: int
    worst_margin: float
    tolerance: float
    passed: bool
    seconds: float

    def json_line(self) -> str:
        return json.dumps({
            "suite": self.suite,
            "samples": self.samples,
            "worst_margin": self.worst_margin,
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
        })


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


def _suite_quadruple(seed: int) -> SuiteResult:
    t0 = time.perf_counter()
    g = _grid(0.0, 1.0, 0.05)
    xx, yy, ww, zz = (a.ravel() for a in np.meshgrid(g, g, g, g, indexing="ij"))
    worst = -math.inf
    count = 0
    ok = True
    for p in (1.0, 1.5, 2.0, 4.0, 16.0):
        m = check_quadruple_triangle(xx, yy, ww, zz, p)
        worst = max(worst, float(m.max()))
        ok = ok and bool(np.all(m <= scaled_tol(xx, yy, ww, zz)))
        count += m.size
    batch = SampleBatch(count=100_000, seed=seed, box=((0, 10),) * 4)
    pts = batch.draw()
    for p in (1.0, 2.0, 4.0, 16.0):
        m = check_quadruple_triangle(pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3], p)
        worst = max(worst, float(m.max()))
        ok = ok and bool(np.all(m <= scaled_tol(*(pts[:, k] for k in range(4)))))
        count += m.size
    return SuiteResult("quadruple_triangle", count, worst, BASE_TOL,
                       ok, time.perf_counter() - t0)


def _suite_product_power(seed: int) -> SuiteResult:
    t0 = time.perf_counter()
    worst = math.inf
    count = 0
    ok = True
    for k, p in enumerate((2.0, 3.0, 7.0)):
        batch = SampleBatch(count=100_000, seed=seed + k, box=((1e-6, 10),) * 4)
        pts = batch.draw()
        for frac in (0.3, 0.5, 0.8):
            a_exp = frac * p
            m, _ = check_product_power(pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3],
                                       a_exp, p - a_exp)
            tol = scaled_tol(pts[:, 0] ** a_exp * pts[:, 2] ** (p - a_exp),
                             pts[:, 1] ** a_exp * pts[:, 3] ** (p - a_exp))
            worst = min(worst, float(m.min()))
            ok = ok and bool(np.all(m >= -tol))
            count += m.size
    return SuiteResult("product_power", count, worst, BASE_TOL,
                       ok, time.perf_counter() - t0)


def _suite_hidden_convexity(seed: int) -> SuiteResult:
    t0 = time.perf_counter()
    worst = math.inf
    count = 0
    ok = True
    rng = np.random.default_rng(seed)
    for p in (2.0, 3.0, 8.0):
        for dim in (1, 2, 3):
            n = 100_000 // 3
            a1 = rng.uniform(1e-3, 5.0, n)
            a2 = rng.uniform(1e-3, 5.0, n)
            g1 = rng.uniform(-3.0, 3.0, (n, dim))
            g2 = rng.uniform(-3.0, 3.0, (n, dim))
            m = check_hidden_convexity_pointwise(a1, a2, g1, g2, p)
            tol = scaled_tol(np.linalg.norm(g1, axis=-1) ** p,
                             np.linalg.norm(g2, axis=-1) ** p)
            worst = min(worst, float(m.min()))
            ok = ok and bool(np.all(m >= -tol))
            count += n
    return SuiteResult("hidden_convexity", count, worst, BASE_TOL,
                       ok, time.perf_counter() - t0)


def unit_cube_case_suites() -> dict:
    """The five boundary/interior case families of the unit-cube bound."""
    g = _grid(0.0, 1.0, 0.02)
    a, b = (v.ravel() for v in np.meshgrid(g, g, indexing="ij"))
    ones, zeros = np.ones_like(a), np.zeros_like(a)
    return {
        "diagonal_y_eq_z": (a, b, b),
        "interior_random": tuple(np.random.default_rng(7).uniform(0.01, 0.99, (3, 20_000))),
        "z_faces": (np.concatenate([a, a]), np.concatenate([b, b]),
                    np.concatenate([zeros, ones])),
        "y_faces": (np.concatenate([a, a]), np.concatenate([zeros, ones]),
                    np.concatenate([b, b])),
        "x_faces": (np.concatenate([zeros, ones]), np.concatenate([a, a]),
                    np.concatenate([b, b])),
    }


def _suite_unit_cube(seed: int) -> SuiteResult:
    t0 = time.perf_counter()
    g = _grid(0.0, 1.0, 0.02)
    xx, yy, zz = (v.ravel() for v in np.meshgrid(g, g, g, indexing="ij"))
    worst = -math.inf
    count = 0
    ok = True
    cases = unit_cube_case_suites()
    for p in (1.0, 2.0, 5.0, 20.0):
        m = check_unit_cube_triangle(xx, yy, zz, p)
        worst = max(worst, float(m.max()))
        ok = ok and bool(np.all(m <= scaled_tol(xx, yy, zz, 1.0)))
        count += m.size
        for case, (cx, cy, cz) in cases.items():
            mc = check_unit_cube_triangle(cx, cy, cz, p)
            worst = max(worst, float(mc.max()))
            ok = ok and bool(np.all(mc <= scaled_tol(cx, cy, cz, 1.0)))
            count += mc.size
    batch = SampleBatch(count=100_000, seed=seed, box=((0, 1),) * 3)
    pts = batch.draw()
    for p in (1.0, 2.0, 5.0, 20.0):
        m = check_unit_cube_triangle(pts[:, 0], pts[:, 1], pts[:, 2], p)
        worst = max(worst, float(m.max()))
        ok = ok and bool(np.all(m <= scaled_tol(*(pts[:, k] for k in range(3)), 1.0)))
        count += m.size
    return SuiteResult("unit_cube_triangle", count, worst, BASE_TOL,
                       ok, time.perf_counter() - t0)


def _suite_pnorm_limit(seed: int) -> SuiteResult:
    t0 = time.perf_counter()
    p_list = (10.0, 25.0, 50.0, 100.0, 200.0)
    worst = -math.inf
    count = 0
    ok = True
    for fam in sorted(_A2_FAMILIES):
        res = check_pnorm_sup_limit(fam, p_list)
        gap = res.final_gap
        worst = max(worst, gap - res.tolerance)
        ok = ok and gap <= res.tolerance
        count += len(p_list)
    return SuiteResult("pnorm_sup_limit", count, worst, 0.0,
                       ok, time.perf_counter() - t0)


def run_all_suites(seed: int = 2024) -> list[SuiteResult]:
    """All five oracle suites; every suite must pass for a green check."""
    return [
        _suite_quadruple(seed),
        _suite_product_power(seed),
        _suite_hidden_convexity(seed),
        _suite_unit_cube(seed),
        _suite_pnorm_limit(seed),
    ]
