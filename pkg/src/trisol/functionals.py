"""Energy functionals and the discrete weak-form gradient.

At a frozen time t the problem is the semilinear elliptic equation

    -Lap u = mu F(x, t, u) - u + g - Lap g,    u = 0 on the boundary,

whose weak solutions are exactly the critical points of

    I_mu(u) = 1/2 ||grad u||^2 - mu I[Ftilde(x,t,u)] + 1/2 I[u^2]
              - I[g u] + I[(Lap g) u],

where I[.] denotes the domain integral and Ftilde is the s-primitive of
F.  The functional pair (phi, vartheta) with I_mu = phi - mu*vartheta is
reported as well, but I_mu itself is always evaluated in the expanded
form above so that the mu * (1/mu) products cancel analytically instead
of numerically.

F may be given directly or produced from a pointwise source f(x, t, s) by
adaptive quadrature in t.  Sources singular at t = 0 are integrated from
a cutoff eps0 = 1e-8 upward; if shrinking the cutoff by two decades moves
the estimate by more than 1%, the integral is declared non-integrable
rather than silently wrong.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import InvalidParameterError, SingularIntegralError
from .geometry import (
    Field,
    Grid,
    apply_neg_laplacian,
    h10_norm_sq,
    integrate,
    l2_norm_sq,
)

__all__ = [
    "Nonlinearity",
    "ProblemSpec",
    "EnergyBreakdown",
    "big_f",
    "f_tilde",
    "big_f_values",
    "f_tilde_values",
    "energy",
    "gradient",
    "NONLINEARITIES",
    "make_nonlinearity",
]

QUAD_CUTOFF = 1e-8
QUAD_DRIFT_TOL = 1e-2


@dataclass(frozen=True)
class Nonlinearity:
    """Source term bundle (f, F, Ftilde).

    Each callable takes (x, t, s) where x is an (..., dim) coordinate
    array (None when unused), t a scalar time and s an array broadcastable
    against x[..., 0]; it must return the broadcast result.  Any of the
    three may be omitted: F falls back to quadrature of f over (0, t],
    Ftilde to quadrature of F over [0, s].
    """

    name: str
    f: Callable | None = None
    F: Callable | None = None
    F_tilde: Callable | None = None

    def __post_init__(self) -> None:
        if self.f is None and self.F is None:
            raise InvalidParameterError(f"nonlinearity {self.name!r} needs f or F")


def _quad_from_cutoff(fn: Callable[[float], float], lo: float, hi: float) -> float:
    # tight enough that the documented 1e-9 * (1 + |result|) guarantee holds
    val, _ = quad(fn, lo, hi, limit=200, epsabs=1e-12, epsrel=1e-10)
    return val


def big_f(spec: "ProblemSpec", x: np.ndarray | None, t: float, s) -> float | np.ndarray:
    """Time-integrated source F(x, t, s).

    Uses the closed form when the nonlinearity provides one; otherwise
    integrates f(x, ., s) over [eps0, t] and verifies the cutoff has
    converged (two-decade drift below 1%).
    """
    nl = spec.nonlinearity
    if nl.F is not None:
        return nl.F(x, t, s)
    if t < QUAD_CUTOFF:
        raise InvalidParameterError(f"t={t} below the quadrature cutoff {QUAD_CUTOFF}")
    s_arr = np.asarray(s, dtype=float)
    out = np.empty(s_arr.shape)
    for idx in np.ndindex(s_arr.shape or (1,)):
        sv = float(s_arr[idx]) if s_arr.shape else float(s_arr)
        integrand = lambda tau: nl.f(x, tau, sv)
        coarse = _quad_from_cutoff(integrand, QUAD_CUTOFF, t)
        fine = _quad_from_cutoff(integrand, QUAD_CUTOFF / 100.0, t)
        if abs(fine - coarse) > QUAD_DRIFT_TOL * (1.0 + abs(fine)):
            raise SingularIntegralError(
                f"source integral for {nl.name!r} drifts by "
                f"{abs(fine - coarse):.3g} as the t=0 cutoff shrinks; "
                "supply F directly"
            )
        if s_arr.shape:
            out[idx] = fine
        else:
            return fine
    return out


def f_tilde(spec: "ProblemSpec", x: np.ndarray | None, t: float, eta) -> float | np.ndarray:
    """Primitive Ftilde(x, t, eta) = integral of F(x, t, .) over [0, eta]."""
    nl = spec.nonlinearity
    if nl.F_tilde is not None:
        return nl.F_tilde(x, t, eta)
    eta_arr = np.asarray(eta, dtype=float)
    out = np.empty(eta_arr.shape)
    for idx in np.ndindex(eta_arr.shape or (1,)):
        ev = float(eta_arr[idx]) if eta_arr.shape else float(eta_arr)
        val, _ = quad(
            lambda sv: float(big_f(spec, x, t, sv)),
            0.0,
            ev,
            limit=200,
            epsabs=1e-12,
            epsrel=1e-10,
        )
        if eta_arr.shape:
            out[idx] = val
        else:
            return val
    return out


def big_f_values(spec: "ProblemSpec", t: float, u: Field) -> np.ndarray:
    """F(x_i, t, u_i) over all nodes, vectorized when a closed form exists."""
    nl = spec.nonlinearity
    if nl.F is not None:
        return np.asarray(nl.F(u.grid.points, t, u.values), dtype=float)
    vals = np.zeros(u.grid.n_nodes)
    idx = np.flatnonzero(u.grid.interior)
    for i in idx:
        vals[i] = big_f(spec, u.grid.points[i], t, float(u.values[i]))
    return vals


def f_tilde_values(spec: "ProblemSpec", t: float, u: Field) -> np.ndarray:
    nl = spec.nonlinearity
    if nl.F_tilde is not None:
        return np.asarray(nl.F_tilde(u.grid.points, t, u.values), dtype=float)
    vals = np.zeros(u.grid.n_nodes)
    idx = np.flatnonzero(u.grid.interior)
    for i in idx:
        vals[i] = f_tilde(spec, u.grid.points[i], t, float(u.values[i]))
    return vals


@dataclass
class ProblemSpec:
    """One problem instance: nonlinearity, datum, and theorem parameters.

    ``g`` is the initial datum (a Field vanishing on the boundary mask),
    ``lap_g`` its Laplacian; if omitted it is computed discretely as
    -apply_neg_laplacian(g).  ``b`` must satisfy b < 2 (the coercivity
    hypothesis); violations are rejected at construction.  q, m1, m2, a,
    b, alpha, beta are optional so solver-only runs in low dimension can
    skip the certification machinery.
    """

    nonlinearity: Nonlinearity
    g: Field
    lap_g: Field | None = None
    mu: float = 1.0
    q: float | None = None
    m1: float | None = None
    m2: float | None = None
    a: float | None = None
    b: float | None = None
    alpha: float | None = None
    beta: float | None = None
    t_grid: tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise InvalidParameterError(f"mu must be positive, got {self.mu}")
        if self.lap_g is None:
            neg = apply_neg_laplacian(self.g)
            self.lap_g = Field(self.g.grid, -neg.values)
        if self.lap_g.grid is not self.g.grid:
            raise InvalidParameterError("g and lap_g must share one grid")
        if self.b is not None:
            if self.b >= 2:
                raise InvalidParameterError(
                    f"growth exponent b={self.b} violates the coercivity "
                    "hypothesis b < 2"
                )
            if self.b <= 0 or self.a is None or self.a <= 0:
                raise InvalidParameterError("growth bound needs a > 0 and 0 < b < 2")
        for name in ("m1", "m2"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise InvalidParameterError(f"{name} must be non-negative")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise InvalidParameterError(f"{name} must be positive")
        self.t_grid = tuple(float(t) for t in self.t_grid)
        if not self.t_grid or min(self.t_grid) <= 0:
            raise InvalidParameterError("t_grid must be a nonempty list of times > 0")

    @property
    def grid(self) -> Grid:
        return self.g.grid

    def validate_against_constants(self, constants) -> None:
        """Check the cone-height condition beta > alpha * kappa."""
        if self.alpha is None or self.beta is None:
            raise InvalidParameterError("alpha and beta are required for this check")
        if self.beta <= self.alpha * constants.kappa:
            raise InvalidParameterError(
                f"beta={self.beta} must exceed alpha*kappa="
                f"{self.alpha * constants.kappa:.6g}"
            )


@dataclass(frozen=True)
class EnergyBreakdown:
    """phi, vartheta, I_mu and the gradient norm of one state at one time."""

    phi: float
    vartheta: float
    i_mu: float
    grad_norm: float
    t: float

    def to_json(self) -> dict:
        return {
            "phi": self.phi,
            "vartheta": self.vartheta,
            "i_mu": self.i_mu,
            "grad_norm": self.grad_norm,
            "t": self.t,
        }


def energy(spec: ProblemSpec, u: Field, t: float) -> EnergyBreakdown:
    """Evaluate phi, vartheta and I_mu at u.

    I_mu is assembled in the expanded form (see module docstring); the
    reported vartheta keeps its literal 1/mu dependence, so
    i_mu == phi - mu*vartheta holds to roundoff but is not how i_mu is
    computed.
    """
    grid = u.grid
    phi = 0.5 * h10_norm_sq(u)
    ft = Field(grid, f_tilde_values(spec, t, u))
    int_ft = integrate(ft)
    int_u2 = l2_norm_sq(u)
    int_gu = integrate(Field(grid, spec.g.values * u.values))
    int_lgu = integrate(Field(grid, spec.lap_g.values * u.values))
    vartheta = int_ft - int_u2 / (2.0 * spec.mu) + (int_gu - int_lgu) / spec.mu
    i_mu = phi - spec.mu * int_ft + 0.5 * int_u2 - int_gu + int_lgu
    gnorm = math.sqrt(max(l2_norm_sq(gradient(spec, u, t)), 0.0))
    return EnergyBreakdown(phi=phi, vartheta=vartheta, i_mu=i_mu, grad_norm=gnorm, t=t)


def gradient(spec: ProblemSpec, u: Field, t: float) -> Field:
    """Discrete residual field r of I_mu at u.

    r_i = (-Lap_h u)_i - mu F(x_i, t, u_i) + u_i - g_i + (Lap g)_i on
    interior nodes, zero elsewhere.  Paired against a direction v by the
    cell-volume-weighted inner product (geometry.l2_inner), <r, v> equals
    the directional derivative of I_mu at u in direction v.
    """
    neg_lap = apply_neg_laplacian(u)
    fv = big_f_values(spec, t, u)
    vals = neg_lap.values - spec.mu * fv + u.values - spec.g.values + spec.lap_g.values
    return Field(u.grid, np.where(u.grid.interior, vals, 0.0))


# ---------------------------------------------------------------------------
# Built-in nonlinearities.  Custom pairs are registered by adding an entry
# (the compile-time extension point): each factory takes the problem
# parameters it needs and returns a Nonlinearity.
# ---------------------------------------------------------------------------


def _singular_example() -> Nonlinearity:
    """The ball benchmark source: f ~ 1/t at the origin, F given in closed form.

    f(x,t,s)  = (99/(100 t)) (1 + e^-t / 99) (8 + 100 s + s^2)
    F(x,t,s)  = (99/100) (1 + e^-t / 99) (8 + 100 s + s^2)
    Ft(x,t,e) = (99/100) (1 + e^-t / 99) (8 e + 50 e^2 + e^3 / 3)

    Note the stated F is NOT the t-integral of f (that integral diverges
    at t = 0); F is taken as the authoritative input and the quadrature
    route is expected to raise SingularIntegralError.
    """

    def f(x, t, s):
        return 99.0 / (100.0 * t) * (1.0 + np.exp(-t) / 99.0) * (8.0 + 100.0 * s + s * s)

    def F(x, t, s):
        return 0.99 * (1.0 + np.exp(-t) / 99.0) * (8.0 + 100.0 * s + s * s)

    def F_tilde(x, t, e):
        return 0.99 * (1.0 + np.exp(-t) / 99.0) * (8.0 * e + 50.0 * e * e + e**3 / 3.0)

    return Nonlinearity("singular-ball-example", f=f, F=F, F_tilde=F_tilde)


def _cubic_logistic(mu: float) -> Nonlinearity:
    """F chosen so the elliptic equation reduces to -Lap u = mu u (1 - u^2)."""
    c = 1.0 + 1.0 / mu

    def F(x, t, s):
        return c * s - s**3

    def F_tilde(x, t, e):
        return c * e * e / 2.0 - e**4 / 4.0

    return Nonlinearity("cubic-logistic", F=F, F_tilde=F_tilde)


def _capped_quadratic(mu: float, m2: float, s_cap: float) -> Nonlinearity:
    """F = s/mu + w(s) with w = m2 * clamp(s, 0, s_cap)^2.

    The quadratic part of F cancels the 1/mu group exactly, w is
    non-negative and capped, so this instance genuinely satisfies all
    four theorem hypotheses (with m1 = 0, q = 3, linear growth bound).
    The elliptic equation reduces to -Lap u = mu w(u).
    """

    def w(s):
        return m2 * np.clip(s, 0.0, s_cap) ** 2

    def W(e):
        e = np.asarray(e, dtype=float)
        below = np.clip(e, 0.0, s_cap)
        tail = np.clip(e - s_cap, 0.0, None)
        return m2 * (below**3 / 3.0 + s_cap**2 * tail)

    def F(x, t, s):
        return s / mu + w(s)

    def F_tilde(x, t, e):
        e = np.asarray(e, dtype=float)
        return e * e / (2.0 * mu) + W(e)

    return Nonlinearity("capped-quadratic", F=F, F_tilde=F_tilde)


def _zero() -> Nonlinearity:
    """F = 0: the equation is the linear problem -Lap u + u = g - Lap g."""
    return Nonlinearity("zero", F=lambda x, t, s: np.zeros_like(np.asarray(s, dtype=float)))


def _identity() -> Nonlinearity:
    """F(s) = s, with primitive s^2/2 (linear-limit checks)."""
    return Nonlinearity(
        "identity",
        F=lambda x, t, s: np.asarray(s, dtype=float),
        F_tilde=lambda x, t, e: np.asarray(e, dtype=float) ** 2 / 2.0,
    )


def _polynomial(coeffs) -> Nonlinearity:
    """F(s) = sum_k coeffs[k] s^k, with the exact polynomial primitive."""
    c = np.asarray(list(coeffs), dtype=float)
    if c.size == 0:
        raise InvalidParameterError("polynomial nonlinearity needs coefficients")
    prim = np.concatenate([[0.0], c / np.arange(1.0, c.size + 1.0)])

    def F(x, t, s):
        return np.polynomial.polynomial.polyval(np.asarray(s, dtype=float), c)

    def F_tilde(x, t, e):
        return np.polynomial.polynomial.polyval(np.asarray(e, dtype=float), prim)

    return Nonlinearity("polynomial", F=F, F_tilde=F_tilde)


NONLINEARITIES: dict[str, Callable[..., Nonlinearity]] = {
    "singular-ball-example": _singular_example,
    "cubic-logistic": _cubic_logistic,
    "capped-quadratic": _capped_quadratic,
    "zero": _zero,
    "identity": _identity,
    "polynomial": _polynomial,
}


def make_nonlinearity(name: str, **params) -> Nonlinearity:
    """Instantiate a built-in nonlinearity by name."""
    try:
        factory = NONLINEARITIES[name]
    except KeyError:
        raise InvalidParameterError(
            f"unknown nonlinearity {name!r}; known: {sorted(NONLINEARITIES)}"
        ) from None
    return factory(**params)
