"""Discrete domains and grid functions.

Domains are uniform tensor grids on an interval, an axis-aligned
rectangle, or a disk obtained by masking a square grid.  Only interior
nodes carry unknowns; grid functions are implicitly extended by zero
outside the domain, which keeps the exterior part of the nonlocal
energies analytic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import ndimage


@dataclass
class Domain:
    """Uniform grid on a bounded open set.

    Attributes
    ----------
    dim : 1 or 2.
    shape : "interval", "rectangle" or "disk".
    spacings : per-axis grid spacing; ``h`` is the largest of them.
    coords : (n_nodes, dim) interior node coordinates, ordered.
    boundary_distance : exact distance of each node to the boundary.
    bbox : ((ax, bx),) or ((ax, bx), (ay, by)) bounding coordinates.
    interior_mask : boolean lattice mask of interior cells.
    lattice_index : (n_nodes, dim) integer lattice position of each node.
    node_grid : lattice array of node indices, -1 outside the domain.
    inradius : radius of the largest inscribed ball (analytic).
    ball_center : its center; ties broken by lexicographically smallest
        coordinate.
    """

    dim: int
    shape: str
    spacings: tuple[float, ...]
    coords: np.ndarray
    boundary_distance: np.ndarray
    bbox: tuple[tuple[float, float], ...]
    interior_mask: np.ndarray
    lattice_index: np.ndarray
    node_grid: np.ndarray
    inradius: float
    ball_center: np.ndarray
    center: np.ndarray | None = None  # disk only
    radius: float | None = None  # disk only
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.coords.shape[0] < 3:
            raise ValueError("domain must have at least 3 nodes")
        if np.any(self.boundary_distance <= 0):
            raise ValueError("interior nodes must have positive boundary distance")

    @property
    def h(self) -> float:
        return max(self.spacings)

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def cell_volume(self) -> float:
        vol = 1.0
        for s in self.spacings:
            vol *= s
        return vol

    # -- cached pairwise structure used by the nonlocal energies -------

    def pair_distances(self) -> np.ndarray:
        """(n, n) matrix of node distances, +inf on the diagonal."""
        if "pair_dist" not in self._cache:
            diff = self.coords[:, None, :] - self.coords[None, :, :]
            d = np.sqrt(np.sum(diff * diff, axis=-1))
            np.fill_diagonal(d, np.inf)
            self._cache["pair_dist"] = d
        return self._cache["pair_dist"]

    def pair_triu(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Upper-triangle pair indices (i, j) with i < j and their distances."""
        if "pair_triu" not in self._cache:
            n = self.n_nodes
            iu, ju = np.triu_indices(n, 1)
            self._cache["pair_triu"] = (iu, ju, self.pair_distances()[iu, ju])
        return self._cache["pair_triu"]

    def axis_neighbor(self, axis: int, side: int) -> np.ndarray:
        """Node index of the lattice neighbor along ``axis`` (+1/-1), -1 if absent."""
        key = ("nbr", axis, side)
        if key not in self._cache:
            li = self.lattice_index.copy()
            li[:, axis] += side
            dims = self.node_grid.shape
            valid = (li[:, axis] >= 0) & (li[:, axis] < dims[axis])
            out = np.full(self.n_nodes, -1, dtype=int)
            idx = tuple(li[valid].T)
            out[valid] = self.node_grid[idx]
            self._cache[key] = out
        return self._cache[key]

    def exterior_tail_log(self, tp: float) -> np.ndarray:
        """log of  T_i = integral over the exterior of |x_i - y|^(-dim - tp) dy.

        Closed form on intervals; on rectangles and disks the exterior is
        integrated radially per direction, so T_i = (1/tp) * integral of
        ell(theta)^(-tp) d theta with ell the exit length of the ray from
        x_i, evaluated on a fixed fine angular grid (deterministic).
        """
        key = ("tail", round(tp, 12))
        if key not in self._cache:
            if tp <= self.dim - 1 + 1e-12 and self.dim == 2:
                # radial integral converges only for tp > 0; the dim
                # restriction t*p > dim is enforced by callers that need it
                pass
            x = self.coords
            if self.dim == 1:
                (a, b), = self.bbox
                left = -tp * np.log(x[:, 0] - a)
                right = -tp * np.log(b - x[:, 0])
                m = np.maximum(left, right)
                logt = m + np.log(np.exp(left - m) + np.exp(right - m)) - np.log(tp)
            else:
                n_ang = 2048
                theta = (np.arange(n_ang) + 0.5) * (2.0 * np.pi / n_ang)
                dtheta = 2.0 * np.pi / n_ang
                logt = np.empty(self.n_nodes)
                chunk = max(1, 4_000_000 // n_ang)
                for lo in range(0, self.n_nodes, chunk):
                    hi = min(lo + chunk, self.n_nodes)
                    ell = self._ray_exit_lengths(x[lo:hi], theta)
                    lmin = ell.min(axis=1, keepdims=True)
                    s = np.sum((lmin / ell) ** tp, axis=1) * dtheta
                    logt[lo:hi] = -tp * np.log(lmin[:, 0]) + np.log(s) - np.log(tp)
            self._cache[key] = logt
        return self._cache[key]

    def _ray_exit_lengths(self, pts: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Distance from each point to the boundary along each direction."""
        cos, sin = np.cos(theta)[None, :], np.sin(theta)[None, :]
        if self.shape == "disk":
            d = pts - self.center[None, :]
            proj = d[:, 0:1] * cos + d[:, 1:2] * sin
            rad2 = np.sum(d * d, axis=1, keepdims=True)
            return -proj + np.sqrt(proj * proj + self.radius**2 - rad2)
        (ax, bx), (ay, by) = self.bbox
        with np.errstate(divide="ignore"):
            tx = np.where(cos > 0, (bx - pts[:, 0:1]) / cos,
                          np.where(cos < 0, (ax - pts[:, 0:1]) / cos, np.inf))
            ty = np.where(sin > 0, (by - pts[:, 1:2]) / sin,
                          np.where(sin < 0, (ay - pts[:, 1:2]) / sin, np.inf))
        return np.minimum(tx, ty)


@dataclass(frozen=True)
class GridFunction:
    """Real values on the interior nodes of a domain, zero outside."""

    domain: Domain
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.domain.n_nodes,):
            raise ValueError("value vector length must equal the node count")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, domain: Domain, fn) -> "GridFunction":
        pts = domain.coords
        vals = np.array([fn(*p) for p in pts], dtype=float)
        return cls(domain, vals)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.domain, values)

    def value_at(self, *point: float) -> float:
        """Value at a node given by coordinates (must match a node exactly)."""
        pt = np.asarray(point, dtype=float)
        d = np.sum((self.domain.coords - pt[None, :]) ** 2, axis=1)
        i = int(np.argmin(d))
        if d[i] > (1e-9 * max(self.domain.h, 1.0)) ** 2:
            raise KeyError(f"no node at {point}")
        return float(self.values[i])


def _check_count(n: int, name: str = "n") -> int:
    n = int(n)
    if n < 3:
        raise ValueError(f"{name} must be at least 3, got {n}")
    return n


def build_interval(a: float, b: float, n: int) -> Domain:
    """Uniform interior grid on (a, b): nodes a + i*h, h = (b-a)/(n+1)."""
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("interval bounds must be finite")
    if a >= b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    n = _check_count(n)
    h = (b - a) / (n + 1)
    x = a + h * np.arange(1, n + 1)
    coords = x[:, None]
    bd = np.minimum(x - a, b - x)
    return Domain(
        dim=1,
        shape="interval",
        spacings=(h,),
        coords=coords,
        boundary_distance=bd,
        bbox=((a, b),),
        interior_mask=np.ones(n, dtype=bool),
        lattice_index=np.arange(n, dtype=int)[:, None],
        node_grid=np.arange(n, dtype=int),
        inradius=(b - a) / 2.0,
        ball_center=np.array([(a + b) / 2.0]),
    )


def build_rectangle(ax: float, ay: float, bx: float, by: float,
                    nx: int, ny: int) -> Domain:
    """Tensor grid on (ax, bx) x (ay, by) with nx x ny interior nodes."""
    ax, ay, bx, by = map(float, (ax, ay, bx, by))
    if not all(map(math.isfinite, (ax, ay, bx, by))):
        raise ValueError("rectangle bounds must be finite")
    if ax >= bx or ay >= by:
        raise ValueError("rectangle extents must be positive")
    nx, ny = _check_count(nx, "nx"), _check_count(ny, "ny")
    hx = (bx - ax) / (nx + 1)
    hy = (by - ay) / (ny + 1)
    xs = ax + hx * np.arange(1, nx + 1)
    ys = ay + hy * np.arange(1, ny + 1)
    li, lj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    lattice = np.stack([li.ravel(), lj.ravel()], axis=1)
    coords = np.stack([xs[lattice[:, 0]], ys[lattice[:, 1]]], axis=1)
    bd = np.minimum.reduce([
        coords[:, 0] - ax, bx - coords[:, 0],
        coords[:, 1] - ay, by - coords[:, 1],
    ])
    rad = min(bx - ax, by - ay) / 2.0
    cx, cy = (ax + bx) / 2.0, (ay + by) / 2.0
    # tie set of largest-ball centers is a segment; lexicographic smallest
    if (bx - ax) < (by - ay):
        ball_center = np.array([cx, ay + rad])
    elif (bx - ax) > (by - ay):
        ball_center = np.array([ax + rad, cy])
    else:
        ball_center = np.array([cx, cy])
    node_grid = np.arange(nx * ny, dtype=int).reshape(nx, ny)
    return Domain(
        dim=2,
        shape="rectangle",
        spacings=(hx, hy),
        coords=coords,
        boundary_distance=bd,
        bbox=((ax, bx), (ay, by)),
        interior_mask=np.ones((nx, ny), dtype=bool),
        lattice_index=lattice,
        node_grid=node_grid,
        inradius=rad,
        ball_center=ball_center,
    )


def build_disk(center, radius: float, n_per_axis: int) -> Domain:
    """Disk as a masked square grid; boundary distance uses the exact circle."""
    c = np.asarray(center, dtype=float).reshape(2)
    radius = float(radius)
    if not (math.isfinite(radius) and radius > 0 and np.all(np.isfinite(c))):
        raise ValueError("disk needs finite center and positive radius")
    n = _check_count(n_per_axis, "n_per_axis")
    h = 2.0 * radius / (n + 1)
    xs = c[0] - radius + h * np.arange(1, n + 1)
    ys = c[1] - radius + h * np.arange(1, n + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    dist = radius - np.hypot(gx - c[0], gy - c[1])
    mask = dist > 1e-12 * radius
    if not mask.any():
        raise ValueError("disk grid has no interior nodes; increase n_per_axis")
    labels, n_comp = ndimage.label(mask, structure=np.array([[0, 1, 0],
                                                             [1, 1, 1],
                                                             [0, 1, 0]]))
    if n_comp != 1:
        raise ValueError(
            f"disk interior mask is not 4-connected at n_per_axis={n}; refine the grid")
    li, lj = np.nonzero(mask)
    node_grid = np.full((n, n), -1, dtype=int)
    node_grid[li, lj] = np.arange(li.size)
    coords = np.stack([gx[li, lj], gy[li, lj]], axis=1)
    dom = Domain(
        dim=2,
        shape="disk",
        spacings=(h, h),
        coords=coords,
        boundary_distance=dist[li, lj],
        bbox=((c[0] - radius, c[0] + radius), (c[1] - radius, c[1] + radius)),
        interior_mask=mask,
        lattice_index=np.stack([li, lj], axis=1).astype(int),
        node_grid=node_grid,
        inradius=radius,
        ball_center=c.copy(),
    )
    dom.center = c.copy()
    dom.radius = radius
    return dom


def inradius(domain: Domain) -> float:
    """Radius of the largest inscribed ball (analytic for the three shapes)."""
    if domain.n_nodes == 0:
        raise ValueError("empty domain")
    if domain.shape in ("interval", "rectangle", "disk"):
        return domain.inradius
    return float(domain.boundary_distance.max())


def normalized_cone(domain: Domain) -> GridFunction:
    """Distance to the boundary of the largest inscribed ball, scaled to peak 1.

    Vanishes outside that ball; its sup-gradient is 1/inradius.
    """
    rad = inradius(domain)
    dist = np.linalg.norm(domain.coords - domain.ball_center[None, :], axis=1)
    vals = np.maximum(0.0, 1.0 - dist / rad)
    return GridFunction(domain, vals)
