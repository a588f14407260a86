"""The cone test function and its energy bounds.

The witness for the energy-gap condition is the radially symmetric cone
with a plateau: height beta on B(x0, D/2), linear ramp with slope 2 beta/D
on the annulus B(x0, D) \\ B(x0, D/2), zero outside.  Its exact gradient
energy is

    phi(u_beta) = 1/2 (2 beta / D)^2 * V_N * (D^N - (D/2)^N),

V_N the unit-ball volume.  Dividing the vartheta lower bound (an infimum
over the domain times the volume of the plateau ball) by phi(u_beta)
gives the ratio bound

    ratio >= D^2 / (2 (2^N - 1)) * inf_x(...) / beta^2,

which the gap condition compares against the sublevel bound

    chi(r) <= sqrt(2/r) c1 m1 + (2^(q/2) c_q^q m2 / q) r^(q/2 - 1)

evaluated at r = alpha^2.  By the K1/K2 definitions, chi(alpha^2) equals
D^2/(2(2^N-1)) * (m1 K1/alpha + m2 K2 alpha^(q-2)) identically, so the
gap chain holds automatically whenever hypothesis (4) does; the toolkit
asserts that algebra instead of assuming it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import ConstantsReport, unit_ball_volume
from .errors import BallNotContainedError, InvalidParameterError
from .functionals import ProblemSpec, f_tilde_values
from .geometry import Field, Grid, h10_norm_sq

__all__ = [
    "TestFunctionReport",
    "build_u_beta",
    "phi_u_beta_closed",
    "chi_upper_bound",
    "inf_quotient",
    "vartheta_u_beta_lower",
    "make_report",
]


def build_u_beta(grid: Grid, x0: np.ndarray, d: float, beta: float) -> Field:
    """Sample the plateau cone of height beta supported in B(x0, d).

    Requires B(x0, d) to lie inside the domain (within a metric-scaled
    roundoff slack); values on non-interior nodes are clipped to zero,
    which keeps the sample in the discrete H^1_0 space.
    """
    if beta <= 0:
        raise InvalidParameterError(f"beta must be positive, got {beta}")
    x0 = np.asarray(x0, dtype=float)
    sd = float(grid.domain.signed_distance(x0[None, :])[0])
    if sd > -d + 1e-9 * (1.0 + d):
        raise BallNotContainedError(
            f"B(x0, {d}) is not contained in the domain (signed distance "
            f"at x0 is {sd:.6g}, need <= {-d:.6g})"
        )
    rho = np.linalg.norm(grid.points - x0, axis=-1)
    ramp = (2.0 * beta / d) * (d - rho)
    vals = np.where(rho <= d / 2.0, beta, np.where(rho < d, ramp, 0.0))
    return Field(grid, vals)


def phi_u_beta_closed(d: float, n: int, beta: float) -> float:
    """Exact gradient energy of the cone: the ramp annulus carries it all."""
    if d <= 0 or n < 1:
        raise InvalidParameterError("need d > 0 and n >= 1")
    return 0.5 * (2.0 * beta / d) ** 2 * unit_ball_volume(n) * (d**n - (d / 2.0) ** n)


def chi_upper_bound(r: float, m1: float, m2: float, q: float, c1: float, cq: float) -> float:
    """Upper bound for the sublevel quotient chi(r) at level r > 0."""
    if r <= 0:
        raise InvalidParameterError(f"level r must be positive, got {r}")
    return math.sqrt(2.0 / r) * c1 * m1 + (2.0 ** (q / 2.0) * cq**q * m2 / q) * r ** (q / 2.0 - 1.0)


def inf_quotient(spec: ProblemSpec, t: float) -> tuple[float, np.ndarray]:
    """min over interior nodes of
    [Ftilde(x, t, beta) - (1/mu)(beta^2/2 - beta g + beta lap_g)] / beta^2.

    Returns (value, witness point).  This is the grid approximation of
    the hypothesis-(4) infimum; the minimum is taken in node order, so
    ties break at the lowest node index.
    """
    if spec.beta is None:
        raise InvalidParameterError("spec.beta is required for the infimum quotient")
    beta = spec.beta
    grid = spec.grid
    const_beta = Field(grid, np.full(grid.n_nodes, beta))
    ft = f_tilde_values(spec, t, const_beta)
    group = (0.5 * beta**2 - beta * spec.g.values + beta * spec.lap_g.values) / spec.mu
    vals = (ft - group) / beta**2
    interior_idx = np.flatnonzero(grid.interior)
    local = vals[interior_idx]
    k = int(np.argmin(local))
    return float(local[k]), grid.points[interior_idx[k]]


def vartheta_u_beta_lower(spec: ProblemSpec, t: float, constants: ConstantsReport) -> float:
    """Lower bound for vartheta(u_beta): infimum times the plateau volume."""
    quot, _ = inf_quotient(spec, t)
    n = constants.n
    plateau_vol = unit_ball_volume(n) * constants.d**n / 2.0**n
    return quot * spec.beta**2 * plateau_vol


@dataclass(frozen=True)
class TestFunctionReport:
    """Closed-form vs discrete energies of the cone plus the gap-chain bounds."""

    x0: tuple[float, ...]
    beta: float
    phi_closed: float
    phi_discrete: float
    vartheta_lower: float
    ratio_lower: float
    chi_alpha2_upper: float
    alpha: float

    def to_json(self) -> dict:
        return {
            "x0": list(self.x0),
            "beta": self.beta,
            "phi_closed": self.phi_closed,
            "phi_discrete": self.phi_discrete,
            "vartheta_lower": self.vartheta_lower,
            "ratio_lower": self.ratio_lower,
            "chi_alpha2_upper": self.chi_alpha2_upper,
            "alpha": self.alpha,
        }


def make_report(
    spec: ProblemSpec,
    constants: ConstantsReport,
    t: float,
    x0: np.ndarray | None = None,
) -> TestFunctionReport:
    """Build the cone on the spec's grid and assemble all of its numbers."""
    if spec.alpha is None or spec.beta is None:
        raise InvalidParameterError("alpha and beta are required for the report")
    grid = spec.grid
    if x0 is None:
        x0 = grid.domain.inradius_point()
        if x0 is None:
            sd = grid.domain.signed_distance(grid.points)
            x0 = grid.points[int(np.argmin(sd))]
    u_b = build_u_beta(grid, x0, constants.d, spec.beta)
    phi_c = phi_u_beta_closed(constants.d, constants.n, spec.beta)
    phi_d = 0.5 * h10_norm_sq(u_b)
    v_low = vartheta_u_beta_lower(spec, t, constants)
    chi_up = chi_upper_bound(
        spec.alpha**2, spec.m1 or 0.0, spec.m2 or 0.0, constants.q, constants.c1, constants.cq
    )
    return TestFunctionReport(
        x0=tuple(float(c) for c in np.atleast_1d(x0)),
        beta=spec.beta,
        phi_closed=phi_c,
        phi_discrete=phi_d,
        vartheta_lower=v_low,
        ratio_lower=v_low / phi_c,
        chi_alpha2_upper=chi_up,
        alpha=spec.alpha,
    )
