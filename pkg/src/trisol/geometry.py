"""Domains, uniform grids, and the discrete H^1_0 calculus.

The discretization is deliberately plain: a uniform Cartesian lattice over
the domain's bounding box, a boolean interior mask (a node is interior iff
its signed distance to the boundary is below -h/4), midpoint quadrature,
and the standard (2 dim + 1)-point Laplacian with zero ghost values.  The
summation-by-parts identity

    h10_norm_sq(u) == sum_i u_i (-Lap_h u)_i vol_i

holds to roundoff by construction, which is what the energy/gradient
consistency of the rest of the toolkit rests on.

Ball domains additionally support a radial reduction: fields depend on the
radius only, the Laplacian becomes (1/r^(N-1)) d/dr (r^(N-1) du/dr) in
conservative flux form, and quadrature weights are exact shell volumes.
Only radially symmetric data make sense in this mode; solutions found in
it are biased toward symmetric ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .constants import unit_ball_volume
from .errors import EmptyInteriorError, InvalidParameterError

__all__ = [
    "Ball",
    "Box",
    "Masked",
    "Grid",
    "Field",
    "inradius",
    "integrate",
    "l2_norm_sq",
    "h10_norm_sq",
    "h10_inner",
    "l2_inner",
    "l2_distance",
    "apply_neg_laplacian",
]


@dataclass(frozen=True)
class Ball:
    """Open ball {|x - center| < radius}."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise InvalidParameterError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def dim(self) -> int:
        return len(self.center)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        """Negative inside, zero on the sphere, positive outside."""
        pts = np.atleast_2d(points)
        return np.linalg.norm(pts - np.asarray(self.center), axis=-1) - self.radius

    def exact_inradius(self) -> float:
        return self.radius

    def inradius_point(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)


@dataclass(frozen=True)
class Box:
    """Axis-aligned open box {lower < x < upper} (componentwise)."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi):
            raise InvalidParameterError("box lower/upper dimensions differ")
        if not all(u > l for l, u in zip(lo, hi)):
            raise InvalidParameterError("box upper must exceed lower componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower), np.asarray(self.upper)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        # Exact inside (distance to nearest face); outside only the sign matters here.
        pts = np.atleast_2d(points)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        per_axis = np.maximum(lo - pts, pts - hi)
        return per_axis.max(axis=-1)

    def exact_inradius(self) -> float:
        lo, hi = self.bounds()
        return float(np.min(hi - lo) / 2.0)

    def inradius_point(self) -> np.ndarray:
        lo, hi = self.bounds()
        return (lo + hi) / 2.0


@dataclass(frozen=True)
class Masked:
    """Domain given by a signed-distance sampler over a bounding box.

    ``sdf`` maps an (M, dim) array of points to (M,) signed distances,
    negative inside.  The inradius is found by grid search, so it is only
    as accurate as the sampler is a true distance function.
    """

    sdf: Callable[[np.ndarray], np.ndarray]
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.lower)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.sdf(np.atleast_2d(points)), dtype=float)

    def exact_inradius(self) -> None:
        return None

    def inradius_point(self) -> None:
        return None


Domain = Ball | Box | Masked


def _lattice(domain: Domain, nodes_per_axis: int) -> tuple[list[np.ndarray], float]:
    lo, hi = domain.bounds()
    h = float(np.max(hi - lo)) / (nodes_per_axis - 1)
    axes = []
    for d in range(domain.dim):
        # ceil so the lattice always covers the bounding box
        n = int(math.ceil((hi[d] - lo[d]) / h - 1e-12)) + 1
        axes.append(lo[d] + h * np.arange(n))
    return axes, h


def inradius(domain: Domain, resolution: int = 64) -> float:
    """Largest distance from an interior point to the boundary.

    Exact for balls and boxes; grid search over ``resolution`` nodes per
    axis for masked domains (accurate to one mesh width).
    """
    exact = domain.exact_inradius()
    if exact is not None:
        return exact
    if resolution < 8:
        raise InvalidParameterError("masked inradius search needs resolution >= 8")
    axes, _ = _lattice(domain, resolution)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    sd = domain.signed_distance(pts)
    inside = sd < 0
    if not inside.any():
        raise EmptyInteriorError("no interior node found during inradius search")
    return float(-sd[inside].min())


def _inradius_point(domain: Domain, resolution: int = 64) -> np.ndarray:
    pt = domain.inradius_point()
    if pt is not None:
        return pt
    axes, _ = _lattice(domain, resolution)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    sd = domain.signed_distance(pts)
    return pts[int(np.argmin(sd))]


@dataclass(frozen=True)
class Grid:
    """Uniform discretization of a domain.

    ``kind == "cartesian"``: ``shape`` is the lattice shape, ``points``
    the (M, dim) node coordinates, ``interior`` the flat boolean mask and
    ``cell_volume`` the constant h^dim quadrature weight.

    ``kind == "radial"``: nodes are radii i*h on [0, R] of a Ball; the
    ``points`` are laid on a ray from the center so radially symmetric
    functions evaluate correctly; ``node_volumes`` are exact shell
    volumes and ``face_coeffs`` the conservative flux coefficients
    S_{N-1} r_{i+1/2}^{N-1} / h used by both the stiffness sum and the
    discrete Laplacian (which keeps summation by parts exact).
    """

    domain: Domain
    h: float
    kind: str
    shape: tuple[int, ...]
    points: np.ndarray
    interior: np.ndarray
    cell_volume: float
    node_volumes: np.ndarray | None = None
    face_coeffs: np.ndarray | None = None
    radii: np.ndarray | None = None

    @staticmethod
    def cartesian(domain: Domain, nodes_per_axis: int) -> "Grid":
        if nodes_per_axis < 4:
            raise InvalidParameterError("need at least 4 nodes per axis")
        axes, h = _lattice(domain, nodes_per_axis)
        mesh = np.meshgrid(*axes, indexing="ij")
        shape = mesh[0].shape
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        sd = domain.signed_distance(pts)
        interior = sd < -h / 4.0  # keeps ambiguous on-boundary nodes out
        if not interior.any():
            raise EmptyInteriorError(
                f"no interior node at {nodes_per_axis} nodes/axis; refine the grid"
            )
        return Grid(
            domain=domain,
            h=h,
            kind="cartesian",
            shape=shape,
            points=pts,
            interior=interior,
            cell_volume=h**domain.dim,
        )

    @staticmethod
    def radial(ball: Ball, n_cells: int) -> "Grid":
        if not isinstance(ball, Ball):
            raise InvalidParameterError("radial grids are defined for Ball domains only")
        if n_cells < 4:
            raise InvalidParameterError("need at least 4 radial cells")
        n_dim = ball.dim
        r_max = ball.radius
        h = r_max / n_cells
        radii = h * np.arange(n_cells + 1)
        interior = radii < r_max - h / 4.0
        vn = unit_ball_volume(n_dim)
        inner = np.clip(radii - h / 2.0, 0.0, r_max)
        outer = np.clip(radii + h / 2.0, 0.0, r_max)
        node_volumes = vn * (outer**n_dim - inner**n_dim)
        surf = n_dim * vn  # area of the unit sphere S^(N-1)
        face_r = radii[:-1] + h / 2.0
        face_coeffs = surf * face_r ** (n_dim - 1) / h
        center = np.asarray(ball.center)
        pts = np.tile(center, (n_cells + 1, 1)).astype(float)
        pts[:, 0] += radii
        return Grid(
            domain=ball,
            h=h,
            kind="radial",
            shape=(n_cells + 1,),
            points=pts,
            interior=interior,
            cell_volume=h**n_dim,
            node_volumes=node_volumes,
            face_coeffs=face_coeffs,
            radii=radii,
        )

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def n_nodes(self) -> int:
        return self.points.shape[0]

    def volumes(self) -> np.ndarray:
        """Per-node quadrature weights (zero weight implied off-interior)."""
        if self.kind == "radial":
            return self.node_volumes
        return np.full(self.n_nodes, self.cell_volume)


@dataclass
class Field:
    """Nodal scalar function on a grid, identically zero off the interior mask."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float).ravel()
        if vals.size != self.grid.n_nodes:
            raise InvalidParameterError(
                f"field has {vals.size} values for a grid of {self.grid.n_nodes} nodes"
            )
        self.values = np.where(self.grid.interior, vals, 0.0)

    @staticmethod
    def zeros(grid: Grid) -> "Field":
        return Field(grid, np.zeros(grid.n_nodes))

    @staticmethod
    def from_function(grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "Field":
        """Sample ``fn`` (mapping (M, dim) points to (M,) values) at the nodes."""
        return Field(grid, np.asarray(fn(grid.points), dtype=float))

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def interior_values(self) -> np.ndarray:
        return self.values[self.grid.interior]


def integrate(f: Field) -> float:
    """Midpoint-rule integral: sum of nodal values times cell volumes."""
    g = f.grid
    if g.kind == "radial":
        return float(np.dot(f.values, g.node_volumes * g.interior))
    return float(f.values[g.interior].sum() * g.cell_volume)


def _integrate_values(grid: Grid, vals: np.ndarray) -> float:
    if grid.kind == "radial":
        return float(np.dot(vals, grid.node_volumes * grid.interior))
    return float(vals[grid.interior].sum() * grid.cell_volume)


def l2_norm_sq(f: Field) -> float:
    return _integrate_values(f.grid, f.values**2)


def l2_inner(u: Field, v: Field) -> float:
    return _integrate_values(u.grid, u.values * v.values)


def l2_distance(u: Field, v: Field) -> float:
    return math.sqrt(max(_integrate_values(u.grid, (u.values - v.values) ** 2), 0.0))


def _padded(grid: Grid, vals: np.ndarray) -> np.ndarray:
    return np.pad(vals.reshape(grid.shape), 1)


def h10_norm_sq(f: Field) -> float:
    """Squared gradient norm: sum over lattice links of the squared difference
    quotient, with the zero extension beyond the interior mask."""
    g = f.grid
    if g.kind == "radial":
        diffs = np.diff(f.values)
        return float(np.dot(g.face_coeffs, diffs**2))
    u = _padded(g, f.values)
    total = 0.0
    for axis in range(g.dim):
        d = np.diff(u, axis=axis)
        total += float((d * d).sum())
    return total * g.h ** (g.dim - 2)


def h10_inner(u: Field, v: Field) -> float:
    """Gradient inner product via link differences (not via the stencil)."""
    g = u.grid
    if g.kind == "radial":
        return float(np.dot(g.face_coeffs, np.diff(u.values) * np.diff(v.values)))
    up = _padded(g, u.values)
    vp = _padded(g, v.values)
    total = 0.0
    for axis in range(g.dim):
        total += float((np.diff(up, axis=axis) * np.diff(vp, axis=axis)).sum())
    return total * g.h ** (g.dim - 2)


def apply_neg_laplacian(f: Field) -> Field:
    """Discrete -Laplacian with homogeneous Dirichlet (zero ghost) values.

    Cartesian grids use the (2 dim + 1)-point stencil; radial grids the
    conservative flux form divided by the exact shell volume, so that
    <-Lap_h u, u> integrated equals h10_norm_sq(u) to roundoff.
    """
    g = f.grid
    if g.kind == "radial":
        vals = f.values
        flux = g.face_coeffs * np.diff(vals)  # flux through face i+1/2
        out = np.zeros_like(vals)
        out[:-1] -= flux
        out[1:] += flux
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(g.interior, out / g.node_volumes, 0.0)
        return Field(g, out)
    u = _padded(g, f.values)
    core = (slice(1, -1),) * g.dim
    acc = 2.0 * g.dim * u[core]
    for axis in range(g.dim):
        lo = tuple(slice(0, -2) if a == axis else slice(1, -1) for a in range(g.dim))
        hi = tuple(slice(2, None) if a == axis else slice(1, -1) for a in range(g.dim))
        acc = acc - u[lo] - u[hi]
    out = (acc / g.h**2).ravel()
    return Field(g, np.where(g.interior, out, 0.0))
