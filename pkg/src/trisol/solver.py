"""Critical-point search for the frozen-time energy.

The underlying theorem is nonconstructive, so the search is heuristic:

* ``descend``       -- monotone gradient descent with Armijo backtracking
                       (sufficient decrease 1e-4, backtrack factor 0.5) and
                       Barzilai-Borwein trial steps.  The descent direction
                       is the Sobolev gradient (-Lap_h + I)^{-1} r rather
                       than the raw residual r: the energy's stiffness makes
                       plain L2 descent under a monotone line search creep at
                       O(1/h^2) rates, while the H1 metric keeps the
                       effective conditioning mesh-independent.  Energies are
                       non-increasing across accepted steps; termination is
                       on the L2 norm of the residual field.
* ``mountain_pass`` -- discretized-path (string) method between two
                       minimizers: descend the maximal-energy interior
                       path point a damped step, re-equidistribute the
                       path by L2 arclength, repeat until the max point
                       is critical.
* ``find_three``    -- multi-start descent, L2 deduplication, then a
                       mountain pass between the two lowest distinct
                       minima.  Finding fewer than three points is a
                       warning, never an error: the theorem guarantees
                       existence, not findability by descent.

Every returned point is re-verified against the weak form with random
smooth test functions, a route independent of the gradient stencil.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import InvalidParameterError, NumericalError, PathCollapseError
from .functionals import ProblemSpec, big_f_values, f_tilde_values, gradient
from .geometry import (
    Field,
    Grid,
    h10_inner,
    h10_norm_sq,
    integrate,
    l2_distance,
    l2_inner,
    l2_norm_sq,
)
from .testfn import build_u_beta

__all__ = [
    "CriticalPoint",
    "SolutionSet",
    "descend",
    "mountain_pass",
    "find_three",
    "verify_weak_form",
    "default_starts",
    "smoothed_noise",
    "check_gradient_consistency",
]

ARMIJO_C1 = 1e-4
BACKTRACK = 0.5
STALL_STEP = 1e-14
MAX_STEP = 1e10


@dataclass
class CriticalPoint:
    u: Field
    energy: float
    grad_norm: float
    kind: str  # "minimizer" | "mountain-pass" | "unknown"
    t: float
    iterations: int
    start_label: str
    status: str  # "converged" | "max-iters" | "line-search-stall"
    history: list = dc_field(default_factory=list)  # (iter, energy, grad_norm, step)
    weak_residual: float | None = None

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "start": self.start_label,
            "status": self.status,
            "t": self.t,
            "energy": self.energy,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "weak_residual": self.weak_residual,
        }


@dataclass
class SolutionSet:
    points: list[CriticalPoint]
    pairwise_l2_distances: np.ndarray
    distinctness_threshold: float
    t: float
    warnings: list[str] = dc_field(default_factory=list)
    discarded: list[CriticalPoint] = dc_field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "count": len(self.points),
            "points": [p.to_json() for p in self.points],
            "pairwise_l2_distances": self.pairwise_l2_distances.tolist(),
            "distinctness_threshold": self.distinctness_threshold,
            "warnings": self.warnings,
            "discarded": [p.to_json() for p in self.discarded],
        }


def _energy_value(spec: ProblemSpec, vals: np.ndarray, t: float) -> float:
    # I_mu in expanded form, without the gradient evaluation energy() does.
    grid = spec.grid
    u = Field(grid, vals)
    int_ft = integrate(Field(grid, f_tilde_values(spec, t, u)))
    return (
        0.5 * h10_norm_sq(u)
        - spec.mu * int_ft
        + 0.5 * l2_norm_sq(u)
        - integrate(Field(grid, spec.g.values * u.values))
        + integrate(Field(grid, spec.lap_g.values * u.values))
    )


def _line_search(spec, t, u, e, direction, slope, sigma0, gn, weighted):
    """Backtracking Armijo search along ``direction``.

    Once the predicted decrease falls below the roundoff resolution of the
    energy, sufficient decrease is undecidable in floating point; the step
    is then accepted on gradient-norm decrease instead (costing one extra
    gradient evaluation), which is what lets the tail iterations reach
    tolerances near the energy's noise floor.

    Returns (accepted, sigma, e_new, rv_new_or_None, gn_new_or_None).
    """
    noise = 4.0 * np.finfo(float).eps * max(1.0, abs(e))
    sigma = sigma0
    while sigma >= STALL_STEP:
        trial = u + sigma * direction
        e_trial = _energy_value(spec, trial, t)
        if e_trial <= e - ARMIJO_C1 * sigma * slope:
            return True, sigma, e_trial, None, None
        if ARMIJO_C1 * sigma * slope <= noise and e_trial <= e + noise:
            rv_trial = gradient(spec, Field(spec.grid, trial), t).values
            gn_trial = math.sqrt(max(weighted(rv_trial, rv_trial), 0.0))
            if gn_trial < gn:
                return True, sigma, min(e_trial, e), rv_trial, gn_trial
        sigma *= BACKTRACK
    return False, sigma, e, None, None


class SobolevPreconditioner:
    """Riesz map of the H1 inner product: applies (-Lap_h + I)^{-1} on the
    interior nodes.  Factorized once per grid and reused across descents."""

    def __init__(self, grid: Grid):
        self.grid = grid
        idx = np.flatnonzero(grid.interior)
        self.idx = idx
        loc = -np.ones(grid.n_nodes, dtype=np.int64)
        loc[idx] = np.arange(idx.size)
        rows, cols, vals = [], [], []
        if grid.kind == "radial":
            n = grid.n_nodes
            c = grid.face_coeffs  # face i+1/2 between nodes i and i+1
            m = grid.node_volumes
            for i in idx:
                diag = 1.0
                if i > 0:
                    diag += c[i - 1] / m[i]
                    if loc[i - 1] >= 0:
                        rows.append(loc[i])
                        cols.append(loc[i - 1])
                        vals.append(-c[i - 1] / m[i])
                if i < n - 1:
                    diag += c[i] / m[i]
                    if loc[i + 1] >= 0:
                        rows.append(loc[i])
                        cols.append(loc[i + 1])
                        vals.append(-c[i] / m[i])
                rows.append(loc[i])
                cols.append(loc[i])
                vals.append(diag)
        else:
            h2 = grid.h**2
            strides = np.array(
                [int(np.prod(grid.shape[a + 1 :], dtype=np.int64)) for a in range(grid.dim)]
            )
            shape = grid.shape
            multi = np.array(np.unravel_index(idx, shape)).T
            for k, i in enumerate(idx):
                rows.append(k)
                cols.append(k)
                vals.append(2.0 * grid.dim / h2 + 1.0)
                for a in range(grid.dim):
                    for sgn in (-1, 1):
                        ca = multi[k, a] + sgn
                        if 0 <= ca < shape[a]:
                            j = i + sgn * strides[a]
                            if loc[j] >= 0:
                                rows.append(k)
                                cols.append(loc[j])
                                vals.append(-1.0 / h2)
        mat = sp.csc_matrix(
            (vals, (rows, cols)), shape=(idx.size, idx.size)
        )
        self._lu = splu(mat)

    def apply(self, residual: np.ndarray) -> np.ndarray:
        out = np.zeros_like(residual)
        out[self.idx] = self._lu.solve(residual[self.idx])
        return out


def descend(
    spec: ProblemSpec,
    t: float,
    u0: Field,
    max_iters: int = 20000,
    tol: float = 1e-8,
    start_label: str = "custom",
    precond: SobolevPreconditioner | None = None,
) -> CriticalPoint:
    """Monotone Armijo descent from u0; see module docstring.

    Non-convergence is a status, not an exception; a line search that
    stalls below 1e-14 is reported distinctly from hitting max_iters.
    """
    if tol <= 0:
        raise InvalidParameterError("tol must be positive")
    grid = spec.grid
    if precond is None:
        precond = SobolevPreconditioner(grid)
    vols = grid.volumes() * grid.interior

    def weighted(a, b):
        return float(np.dot(a * vols, b))

    u = u0.values.copy()
    rv = gradient(spec, Field(grid, u), t).values
    gn = math.sqrt(max(weighted(rv, rv), 0.0))
    e = _energy_value(spec, u, t)
    history = [(0, e, gn, 0.0)]
    status = "max-iters"
    step = 1.0
    iters = 0
    prev_rv = None
    prev_du = None
    prev_slope_step = None  # sigma^2 * slope of the accepted move (= |du|_A^2)
    for k in range(1, max_iters + 1):
        if gn < tol:
            status = "converged"
            break
        direction = -precond.apply(rv)
        slope = -weighted(rv, direction)  # <r, P r>, positive since P is SPD
        if slope <= 0:
            status = "line-search-stall"
            iters = k
            history.append((k, e, gn, 0.0))
            break
        # Barzilai-Borwein trial step from the last accepted move, with the
        # H1-metric quotient |du|_A^2 / <du, dgrad>.
        if prev_du is not None and prev_slope_step is not None:
            sy = weighted(prev_du, rv - prev_rv)
            if sy > 0:
                step = min(max(prev_slope_step / sy, 1e-12), MAX_STEP)
            else:
                step = min(step * 2.0, MAX_STEP)
        accepted, sigma, e_new, rv_new, gn_new = _line_search(
            spec, t, u, e, direction, slope, step, gn, weighted
        )
        if not accepted:
            status = "line-search-stall"
            iters = k
            history.append((k, e, gn, sigma))
            break
        du = sigma * direction
        u = u + du
        prev_rv = rv
        prev_du = du
        prev_slope_step = sigma * sigma * slope
        if rv_new is None:
            rv_new = gradient(spec, Field(grid, u), t).values
            gn_new = math.sqrt(max(weighted(rv_new, rv_new), 0.0))
        rv, gn = rv_new, gn_new
        e = e_new
        step = sigma
        iters = k
        history.append((k, e, gn, sigma))
    else:
        iters = max_iters
    if gn < tol:
        status = "converged"
    # a start that was already critical carries no descent evidence
    kind = "minimizer" if iters > 0 else "unknown"
    return CriticalPoint(
        u=Field(grid, u),
        energy=e,
        grad_norm=gn,
        kind=kind,
        t=t,
        iterations=iters,
        start_label=start_label,
        status=status,
        history=history,
    )


def _redistribute(path: np.ndarray, grid: Grid, anchor: int | None = None) -> np.ndarray:
    """Re-space the path nodes equally by cumulative L2 arclength.

    ``anchor`` pins one interior node (the current maximum) so that the
    saddle candidate is not re-interpolated away between iterations; the
    two sub-paths on either side are redistributed independently.
    """
    if anchor is not None and 0 < anchor < path.shape[0] - 1:
        left = _redistribute(path[: anchor + 1], grid)
        right = _redistribute(path[anchor:], grid)
        return np.concatenate([left, right[1:]], axis=0)
    vols = grid.volumes() * grid.interior
    seg = np.sqrt(np.maximum(((np.diff(path, axis=0) ** 2) * vols).sum(axis=1), 0.0))
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    if arc[-1] <= 0:
        return path
    targets = np.linspace(0.0, arc[-1], path.shape[0])
    out = np.empty_like(path)
    out[0], out[-1] = path[0], path[-1]
    j = 0
    for i in range(1, path.shape[0] - 1):
        s = targets[i]
        while j + 1 < len(arc) - 1 and arc[j + 1] < s:
            j += 1
        span = arc[j + 1] - arc[j]
        w = 0.0 if span <= 0 else (s - arc[j]) / span
        out[i] = (1.0 - w) * path[j] + w * path[j + 1]
    return out


def mountain_pass(
    spec: ProblemSpec,
    t: float,
    u_low: Field,
    u_high: Field,
    path_points: int = 13,
    max_iters: int = 2000,
    tol: float = 1e-8,
    distinctness_threshold: float = 1e-3,
    precond: SobolevPreconditioner | None = None,
) -> CriticalPoint:
    """Saddle search along a discretized path joining two minimizers.

    The damped step on the maximal point is the climbing-image projection:
    descend the energy transverse to the path but ascend along the local
    path tangent (a plain descent step would slide the point off the ridge
    and its gradient could never vanish).  The moved point is anchored
    during the arclength redistribution for the same reason.

    Raises PathCollapseError when no interior path point ever rises above
    the endpoint energies (no separating ridge, e.g. a convex energy).
    """
    grid = spec.grid
    sep = l2_distance(u_low, u_high)
    if sep <= distinctness_threshold:
        raise InvalidParameterError(
            f"endpoints are not distinct (L2 distance {sep:.3g} <= "
            f"threshold {distinctness_threshold:.3g})"
        )
    if precond is None:
        precond = SobolevPreconditioner(grid)
    vols = grid.volumes() * grid.interior

    def weighted(a, b):
        return float(np.dot(a * vols, b))

    taus = np.linspace(0.0, 1.0, path_points)
    path = np.array([(1.0 - w) * u_low.values + w * u_high.values for w in taus])
    e_ends = max(_energy_value(spec, path[0], t), _energy_value(spec, path[-1], t))
    ridge_tol = tol * max(1.0, abs(e_ends))
    history = []
    sigma_warm = 1.0
    spacing = sep / (path_points - 1)
    gn = math.inf
    kmax = 1
    for k in range(1, max_iters + 1):
        energies = np.array([_energy_value(spec, p, t) for p in path])
        kmax = 1 + int(np.argmax(energies[1:-1]))
        e_max = float(energies[kmax])
        if e_max < e_ends + ridge_tol:
            raise PathCollapseError(
                f"path maximum {e_max:.6g} fell below the endpoint level "
                f"{e_ends:.6g}; no separating ridge detected"
            )
        rv = gradient(spec, Field(grid, path[kmax]), t).values
        gn = math.sqrt(max(weighted(rv, rv), 0.0))
        history.append((k, e_max, gn, sigma_warm))
        if gn < tol:
            return CriticalPoint(
                u=Field(grid, path[kmax]),
                energy=e_max,
                grad_norm=gn,
                kind="mountain-pass",
                t=t,
                iterations=k,
                start_label="mountain-pass",
                status="converged",
                history=history,
            )
        # climbing-image force: reverse the tangential gradient component
        tau = path[kmax + 1] - path[kmax - 1]
        tn = math.sqrt(max(weighted(tau, tau), 0.0))
        if tn > 0:
            tau = tau / tn
            force = -(rv - 2.0 * weighted(rv, tau) * tau)
        else:
            force = -rv
        direction = precond.apply(force)
        dn = math.sqrt(max(weighted(direction, direction), 0.0))
        sigma = min(sigma_warm * 2.0, 0.5 * spacing / max(dn, 1e-300))
        # residual-based damping: accept when the full gradient norm drops
        while sigma >= STALL_STEP:
            trial = path[kmax] + sigma * direction
            rv_trial = gradient(spec, Field(grid, trial), t).values
            gn_trial = math.sqrt(max(weighted(rv_trial, rv_trial), 0.0))
            if gn_trial < gn:
                path[kmax] = trial
                sigma_warm = sigma
                break
            sigma *= BACKTRACK
        path = _redistribute(path, grid, anchor=kmax)
    energies = np.array([_energy_value(spec, p, t) for p in path])
    kmax = 1 + int(np.argmax(energies[1:-1]))
    rv = gradient(spec, Field(grid, path[kmax]), t).values
    gn = math.sqrt(max(weighted(rv, rv), 0.0))
    return CriticalPoint(
        u=Field(grid, path[kmax]),
        energy=float(energies[kmax]),
        grad_norm=gn,
        kind="mountain-pass",
        t=t,
        iterations=max_iters,
        start_label="mountain-pass",
        status="max-iters",
        history=history,
    )


def smoothed_noise(grid: Grid, rng: np.random.Generator, scale: float = 1.0) -> Field:
    """White noise on the interior, three Jacobi smoothing passes."""
    vals = np.where(grid.interior, rng.standard_normal(grid.n_nodes), 0.0)
    f = Field(grid, vals)
    for _ in range(3):
        f = _jacobi_smooth(f)
    m = np.max(np.abs(f.values))
    if m > 0:
        f = Field(grid, f.values * (scale / m))
    return f


def _jacobi_smooth(f: Field) -> Field:
    """Neighbor averaging with zero ghosts (one Jacobi sweep on Lap u = 0)."""
    g = f.grid
    if g.kind == "radial":
        v = f.values
        padded = np.concatenate([[v[1] if len(v) > 1 else 0.0], v, [0.0]])
        avg = 0.5 * (padded[:-2] + padded[2:])
        return Field(g, np.where(g.interior, avg, 0.0))
    u = np.pad(f.values.reshape(g.shape), 1)
    acc = np.zeros_like(u[(slice(1, -1),) * g.dim])
    for axis in range(g.dim):
        lo = tuple(slice(0, -2) if a == axis else slice(1, -1) for a in range(g.dim))
        hi = tuple(slice(2, None) if a == axis else slice(1, -1) for a in range(g.dim))
        acc = acc + u[lo] + u[hi]
    return Field(g, np.where(g.interior, (acc / (2.0 * g.dim)).ravel(), 0.0))


def verify_weak_form(
    spec: ProblemSpec, t: float, u: Field, trials: int = 20, seed: int = 42
) -> float:
    """Max over random smooth test fields v of the weak-form residual

        |<grad u, grad v> - mu I[F(.,t,u) v] + I[u v] - I[g v] + I[lap_g v]|
        normalized by ||v||_{H1_0}.

    Assembled from the link-difference inner product and midpoint
    quadrature, independently of the gradient stencil.
    """
    grid = spec.grid
    rng = np.random.default_rng(seed)
    fv = big_f_values(spec, t, u)
    worst = 0.0
    for _ in range(trials):
        v = smoothed_noise(grid, rng)
        vn = math.sqrt(max(h10_norm_sq(v), 0.0))
        if vn == 0.0:
            continue
        resid = (
            h10_inner(u, v)
            - spec.mu * integrate(Field(grid, fv * v.values))
            + l2_inner(u, v)
            - l2_inner(spec.g, v)
            + l2_inner(spec.lap_g, v)
        )
        worst = max(worst, abs(resid) / vn)
    return worst


def check_gradient_consistency(
    spec: ProblemSpec, t: float, n_fields: int = 10, eps: float = 1e-5, seed: int = 7
) -> float:
    """Max relative error of <grad, v> against central finite differences."""
    grid = spec.grid
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_fields):
        u = smoothed_noise(grid, rng)
        v = smoothed_noise(grid, rng)
        r = gradient(spec, u, t)
        pred = l2_inner(r, v)
        up = Field(grid, u.values + eps * v.values)
        um = Field(grid, u.values - eps * v.values)
        fd = (_energy_value(spec, up.values, t) - _energy_value(spec, um.values, t)) / (2 * eps)
        denom = max(abs(pred), abs(fd), 1e-12)
        worst = max(worst, abs(pred - fd) / denom)
    return worst


def default_starts(spec: ProblemSpec, seed: int = 42) -> list[tuple[str, Field]]:
    """The preset start list: zero, +/- the cone, three seeded random fields."""
    grid = spec.grid
    beta = spec.beta if spec.beta is not None else 1.0
    starts: list[tuple[str, Field]] = [("zero", Field.zeros(grid))]
    try:
        from .geometry import inradius as _inr

        d = _inr(grid.domain)
        x0 = grid.domain.inradius_point()
        if x0 is None:
            sd = grid.domain.signed_distance(grid.points)
            x0 = grid.points[int(np.argmin(sd))]
        cone = build_u_beta(grid, np.asarray(x0), d, beta)
        starts.append(("+cone", cone))
        starts.append(("-cone", Field(grid, -cone.values)))
    except Exception:
        # domains with no representable inscribed ball still get random starts
        pass
    rng = np.random.default_rng(seed)
    for i in range(3):
        starts.append((f"random-{i}", smoothed_noise(grid, rng, scale=beta)))
    return starts


def find_three(
    spec: ProblemSpec,
    t: float,
    starts: list[tuple[str, Field]] | None = None,
    tol: float = 1e-8,
    max_iters: int = 20000,
    seed: int = 42,
    path_points: int = 13,
    mp_max_iters: int = 2000,
    residual_trials: int = 20,
    consistency_check: bool = True,
    hypothesis_report=None,
) -> SolutionSet:
    """Multi-start search for distinct critical points at one frozen time.

    ``hypothesis_report`` is advisory: a failed certification only adds a
    warning (the theorem's guarantee is then unavailable, but the search
    itself is well defined either way).
    """
    grid = spec.grid
    advisory_warnings: list[str] = []
    if hypothesis_report is not None and not hypothesis_report.all_passed:
        advisory_warnings.append(
            "hypothesis certification did not pass; the three-solutions "
            "guarantee does not apply to this configuration"
        )
    if consistency_check:
        err = check_gradient_consistency(spec, t)
        if err > 1e-4:
            raise NumericalError(
                f"gradient/energy consistency check failed (rel err {err:.3g})"
            )
    if starts is None:
        starts = default_starts(spec, seed=seed)
    precond = SobolevPreconditioner(grid)
    warnings: list[str] = list(advisory_warnings)
    found: list[CriticalPoint] = []
    discarded: list[CriticalPoint] = []
    for label, u0 in starts:
        cp = descend(
            spec, t, u0, max_iters=max_iters, tol=tol, start_label=label, precond=precond
        )
        (found if cp.converged else discarded).append(cp)
        if not cp.converged:
            warnings.append(f"start {label!r} did not converge ({cp.status})")
    max_norm = max((math.sqrt(max(l2_norm_sq(p.u), 0.0)) for p in found), default=0.0)
    threshold = 1e-3 * (1.0 + max_norm)
    distinct = _dedup(found, threshold)
    # runs merged away by deduplication keep their logs among the discarded
    discarded.extend(p for p in found if not any(p is q for q in distinct))

    minima = sorted(distinct, key=lambda p: p.energy)
    if len(minima) >= 2:
        lo, hi = minima[0], minima[1]
        try:
            mp = mountain_pass(
                spec,
                t,
                lo.u,
                hi.u,
                path_points=path_points,
                max_iters=mp_max_iters,
                tol=tol,
                distinctness_threshold=threshold,
                precond=precond,
            )
            if mp.converged:
                if mp.energy < max(lo.energy, hi.energy) - tol:
                    warnings.append(
                        "mountain-pass energy below endpoint energies; discarded"
                    )
                    discarded.append(mp)
                else:
                    distinct = _dedup(distinct + [mp], threshold)
                    if not any(mp is q for q in distinct):
                        # merged with an existing point; keep its path log
                        discarded.append(mp)
            else:
                warnings.append(f"mountain pass did not converge ({mp.status})")
                discarded.append(mp)
        except PathCollapseError as exc:
            warnings.append(f"mountain pass: {exc}")

    for p in distinct:
        p.weak_residual = verify_weak_form(spec, t, p.u, trials=residual_trials, seed=seed)
    distinct.sort(key=lambda p: (p.energy, p.start_label))
    if len(distinct) < 3:
        warnings.append(
            f"found {len(distinct)} distinct critical point(s), fewer than the "
            "three the theorem guarantees; the search is heuristic"
        )
    m = len(distinct)
    dist = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            dist[i, j] = dist[j, i] = l2_distance(distinct[i].u, distinct[j].u)
    return SolutionSet(
        points=distinct,
        pairwise_l2_distances=dist,
        distinctness_threshold=threshold,
        t=t,
        warnings=warnings,
        discarded=discarded,
    )


def _dedup(points: list[CriticalPoint], threshold: float) -> list[CriticalPoint]:
    """Keep one representative per L2 cluster, preferring lower residual norm."""
    kept: list[CriticalPoint] = []
    for p in sorted(points, key=lambda p: (p.grad_norm, p.start_label)):
        if all(l2_distance(p.u, q.u) > threshold for q in kept):
            kept.append(p)
    return kept
