"""Sampled verification of the four theorem hypotheses.

Each hypothesis is an inequality over (x, t, s); the checker evaluates it
on a finite sample box and reports the worst margin together with the
sample at which it is attained.  Margins are signed so that >= 0 means
the inequality holds at that sample:

  (1)  margin = m1 + m2 |s|^(q-1) + (s - g + lap_g)/mu  -  F(x,t,s)
  (2)  margin = Ftilde(x,t,s)  -  (s^2/2 - s g + s lap_g)/mu
  (3)  margin = a (1 + |s|^b) + (s^2/2 - s g + s lap_g)/mu  -  Ftilde(x,t,s)
  (4)  margin = inf-quotient  -  (m1 K1/alpha + m2 K2 alpha^(q-2))

Strictness is graded with a relative tolerance of 1e-9: samples within
tolerance of equality count as a boundary pass.  Dense sampling is not a
proof; margins can only shrink under refinement, never grow.

The admissible parameter interval is reported in both conventions in
circulation: the bare ]1/lhs, 1/rhs[ and the same interval scaled by
2 (2^N - 1)/D^2.  They disagree; the toolkit privileges neither.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .constants import ConstantsReport
from .errors import EmptyIntervalError, InvalidParameterError
from .functionals import ProblemSpec
from .testfn import inf_quotient

__all__ = [
    "SampleSet",
    "AssumptionReport",
    "AdmissibleInterval",
    "HypothesisReport",
    "check_assumption_1",
    "check_assumption_2",
    "check_assumption_3",
    "check_assumption_4",
    "admissible_interval",
    "check_all",
]

STRICT_REL_TOL = 1e-9


@dataclass(frozen=True)
class SampleSet:
    """Sample points for the (x, t, s) boxes.

    x points come from the run grid's interior nodes (optionally strided),
    t values are log-spaced (sources may be singular at t = 0), s values
    uniform over a symmetric range that must reach at least 2 beta.
    """

    x_points: np.ndarray   # (M, dim)
    g_vals: np.ndarray     # (M,)
    lap_g_vals: np.ndarray
    t_samples: np.ndarray
    s_samples: np.ndarray

    @staticmethod
    def from_spec(
        spec: ProblemSpec,
        t_count: int = 17,
        t_min: float = 1e-3,
        t_max: float = 1e3,
        s_count: int = 201,
        s_span: float | None = None,
        x_stride: int = 1,
    ) -> "SampleSet":
        if t_min <= 0 or t_max < t_min:
            raise InvalidParameterError("need 0 < t_min <= t_max")
        grid = spec.grid
        idx = np.flatnonzero(grid.interior)[::x_stride]
        if s_span is None:
            s_span = 2.0 * (spec.beta or 1.0)
        if spec.beta is not None and s_span < 2.0 * spec.beta:
            raise InvalidParameterError(
                f"s range [-{s_span}, {s_span}] must span at least 2*beta = {2 * spec.beta}"
            )
        return SampleSet(
            x_points=grid.points[idx],
            g_vals=spec.g.values[idx],
            lap_g_vals=spec.lap_g.values[idx],
            t_samples=np.geomspace(t_min, t_max, t_count),
            s_samples=np.linspace(-s_span, s_span, s_count),
        )

    def counts(self) -> dict:
        return {
            "x": int(self.x_points.shape[0]),
            "t": int(self.t_samples.size),
            "s": int(self.s_samples.size),
        }


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of one sampled hypothesis check."""

    index: int
    passed: bool
    boundary: bool
    worst_margin: float
    witness: tuple  # (x, t, s); s is None for hypothesis (4)
    sample_counts: dict
    s_range: tuple[float, float] | None
    t_range: tuple[float, float]

    def to_json(self) -> dict:
        x, t, s = self.witness
        return {
            "assumption": self.index,
            "pass": self.passed,
            "boundary": self.boundary,
            "worst_margin": self.worst_margin,
            "witness": {"x": list(x), "t": t, "s": s},
            "sample_counts": self.sample_counts,
            "s_range": list(self.s_range) if self.s_range else None,
            "t_range": list(self.t_range),
        }


def _finish(index: int, margins_by_t, samples: SampleSet, scales_by_t) -> AssumptionReport:
    """Fold per-t margin matrices into the worst sample, first-index ties."""
    worst = math.inf
    worst_scale = 1.0
    witness = None
    for ti, t in enumerate(samples.t_samples):
        margins = margins_by_t[ti]
        k = int(np.argmin(margins))
        m = float(margins.flat[k])
        if m < worst:
            worst = m
            worst_scale = float(scales_by_t[ti].flat[k])
            xi, si = np.unravel_index(k, margins.shape)
            witness = (tuple(samples.x_points[xi]), float(t), float(samples.s_samples[si]))
    tol = STRICT_REL_TOL * worst_scale
    passed = worst >= -tol
    boundary = passed and worst <= tol
    return AssumptionReport(
        index=index,
        passed=passed,
        boundary=boundary,
        worst_margin=worst,
        witness=witness,
        sample_counts=samples.counts(),
        s_range=(float(samples.s_samples[0]), float(samples.s_samples[-1]))
        if index != 4
        else None,
        t_range=(float(samples.t_samples[0]), float(samples.t_samples[-1])),
    )


def _group(samples: SampleSet, s: np.ndarray, mu: float) -> np.ndarray:
    """(s^2/2 - s g + s lap_g)/mu on the (x, s) product grid."""
    g = samples.g_vals[:, None]
    lg = samples.lap_g_vals[:, None]
    return (0.5 * s**2 - s * g + s * lg) / mu


def _margins_at_t(spec: ProblemSpec, samples: SampleSet, index: int, t: float):
    """(margins, scales) over the (x, s) grid for hypothesis ``index`` at time t."""
    s = samples.s_samples[None, :]
    x = samples.x_points[:, None, :]
    if index == 1:
        rhs = (
            spec.m1
            + spec.m2 * np.abs(s) ** (spec.q - 1.0)
            + (s - samples.g_vals[:, None] + samples.lap_g_vals[:, None]) / spec.mu
        )
        lhs = np.broadcast_to(spec.nonlinearity.F(x, float(t), s), rhs.shape)
        margins = rhs - lhs
    elif index == 2:
        rhs = _group(samples, s, spec.mu)
        lhs = np.broadcast_to(spec.nonlinearity.F_tilde(x, float(t), s), rhs.shape)
        margins = lhs - rhs
    elif index == 3:
        rhs = spec.a * (1.0 + np.abs(s) ** spec.b) + _group(samples, s, spec.mu)
        lhs = np.broadcast_to(spec.nonlinearity.F_tilde(x, float(t), s), rhs.shape)
        margins = rhs - lhs
    else:
        raise InvalidParameterError(f"no sampled margin grid for hypothesis {index}")
    scales = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)
    return margins, scales


def margin_curve(spec: ProblemSpec, samples: SampleSet, index: int) -> np.ndarray:
    """Worst margin over (x, t) as a function of the s sample (for plots)."""
    worst = None
    for t in samples.t_samples:
        margins, _ = _margins_at_t(spec, samples, index, float(t))
        per_s = margins.min(axis=0)
        worst = per_s if worst is None else np.minimum(worst, per_s)
    return worst


def check_assumption_1(spec: ProblemSpec, samples: SampleSet) -> AssumptionReport:
    """F(x,t,s) <= m1 + m2 |s|^(q-1) + (s - g(x) + lap_g(x)) / mu."""
    if spec.q is None or spec.m1 is None or spec.m2 is None:
        raise InvalidParameterError("assumption (1) needs q, m1, m2")
    pairs = [_margins_at_t(spec, samples, 1, float(t)) for t in samples.t_samples]
    return _finish(1, [p[0] for p in pairs], samples, [p[1] for p in pairs])


def check_assumption_2(spec: ProblemSpec, samples: SampleSet) -> AssumptionReport:
    """Ftilde(x,t,s) >= (s^2/2 - s g + s lap_g) / mu."""
    pairs = [_margins_at_t(spec, samples, 2, float(t)) for t in samples.t_samples]
    return _finish(2, [p[0] for p in pairs], samples, [p[1] for p in pairs])


def check_assumption_3(spec: ProblemSpec, samples: SampleSet) -> AssumptionReport:
    """Ftilde(x,t,s) <= a (1 + |s|^b) + (s^2/2 - s g + s lap_g) / mu, b < 2."""
    if spec.a is None or spec.b is None:
        raise InvalidParameterError("assumption (3) needs the growth pair (a, b)")
    pairs = [_margins_at_t(spec, samples, 3, float(t)) for t in samples.t_samples]
    return _finish(3, [p[0] for p in pairs], samples, [p[1] for p in pairs])


def check_assumption_4(
    spec: ProblemSpec, constants: ConstantsReport, samples: SampleSet
) -> tuple[AssumptionReport, float, float]:
    """inf-quotient > m1 K1/alpha + m2 K2 alpha^(q-2), with beta > alpha kappa.

    Returns (report, lhs, rhs); lhs is the minimum of the quotient over
    the sampled t values (the x minimum is taken inside inf_quotient).
    """
    if spec.alpha is None or spec.beta is None:
        raise InvalidParameterError("assumption (4) needs alpha and beta")
    spec.validate_against_constants(constants)
    rhs = (spec.m1 or 0.0) * constants.k1 / spec.alpha + (
        spec.m2 or 0.0
    ) * constants.k2 * spec.alpha ** (constants.q - 2.0)
    lhs = math.inf
    witness_x = None
    witness_t = None
    for t in samples.t_samples:
        val, x = inf_quotient(spec, float(t))
        if val < lhs:
            lhs, witness_x, witness_t = val, x, float(t)
    margin = lhs - rhs
    scale = max(abs(lhs), abs(rhs), 1.0)
    tol = STRICT_REL_TOL * scale
    passed = margin >= -tol
    report = AssumptionReport(
        index=4,
        passed=passed,
        boundary=passed and abs(margin) <= tol,
        worst_margin=margin,
        witness=(tuple(witness_x), witness_t, None),
        sample_counts=samples.counts(),
        s_range=None,
        t_range=(float(samples.t_samples[0]), float(samples.t_samples[-1])),
    )
    return report, lhs, rhs


@dataclass(frozen=True)
class AdmissibleInterval:
    """The parameter interval in both published conventions.

    delta1_inv is the hypothesis-(4) infimum quotient (the large number),
    delta2_inv the bound m1 K1/alpha + m2 K2 alpha^(q-2).  The example
    convention is the bare ]1/delta1_inv, 1/delta2_inv[; the theorem
    convention multiplies both endpoints by 2 (2^N - 1) / D^2.
    """

    delta1_inv: float
    delta2_inv: float
    scale_factor: float
    mu: float

    def __post_init__(self) -> None:
        if self.delta1_inv <= self.delta2_inv:
            raise EmptyIntervalError(
                f"interval empty: lhs {self.delta1_inv:.6g} <= rhs {self.delta2_inv:.6g}"
            )

    @property
    def example_interval(self) -> tuple[float, float]:
        return 1.0 / self.delta1_inv, 1.0 / self.delta2_inv

    @property
    def theorem_interval(self) -> tuple[float, float]:
        lo, hi = self.example_interval
        return self.scale_factor * lo, self.scale_factor * hi

    @property
    def mu_in_example(self) -> bool:
        lo, hi = self.example_interval
        return lo < self.mu < hi

    @property
    def mu_in_theorem(self) -> bool:
        lo, hi = self.theorem_interval
        return lo < self.mu < hi

    def to_json(self) -> dict:
        return {
            "delta1_inv": self.delta1_inv,
            "delta2_inv": self.delta2_inv,
            "interval_example_convention": list(self.example_interval),
            "interval_theorem_convention": list(self.theorem_interval),
            "scale_factor": self.scale_factor,
            "mu": self.mu,
            "mu_in_example": self.mu_in_example,
            "mu_in_theorem": self.mu_in_theorem,
        }


def admissible_interval(
    spec: ProblemSpec, constants: ConstantsReport, lhs: float, rhs: float
) -> AdmissibleInterval:
    """Assemble both interval conventions from the hypothesis-(4) numbers."""
    if rhs <= 0:
        raise EmptyIntervalError(f"rhs bound must be positive, got {rhs}")
    scale = 2.0 * (2.0**constants.n - 1.0) / constants.d**2
    return AdmissibleInterval(
        delta1_inv=lhs, delta2_inv=rhs, scale_factor=scale, mu=spec.mu
    )


@dataclass
class HypothesisReport:
    """All four assumption checks plus the interval (when (4) passes)."""

    assumptions: dict[int, AssumptionReport | None]
    rejected: dict[int, str] = dc_field(default_factory=dict)
    lhs: float | None = None
    rhs: float | None = None
    interval: AdmissibleInterval | None = None

    @property
    def all_passed(self) -> bool:
        return all(
            r is not None and r.passed for r in self.assumptions.values()
        ) and not self.rejected

    def to_json(self) -> dict:
        return {
            "assumptions": {
                str(k): (r.to_json() if r is not None else None)
                for k, r in sorted(self.assumptions.items())
            },
            "rejected": {str(k): v for k, v in sorted(self.rejected.items())},
            "lhs_inf_quotient": self.lhs,
            "rhs_bound": self.rhs,
            "interval": self.interval.to_json() if self.interval else None,
            "all_passed": self.all_passed,
        }

    def summary_lines(self) -> list[str]:
        rows = [f"{'assumption':<12}{'pass':<8}{'worst margin':<16}witness (x, t, s)"]
        for k in sorted(self.assumptions):
            if k in self.rejected:
                rows.append(f"({k})         {'reject':<8}{'-':<16}{self.rejected[k]}")
                continue
            r = self.assumptions[k]
            x, t, s = r.witness
            xs = "(" + ", ".join(f"{c:.4g}" for c in x) + ")"
            tag = "pass" if r.passed else "FAIL"
            if r.boundary:
                tag = "pass="
            wit = f"x={xs} t={t:.4g}" + (f" s={s:.6g}" if s is not None else "")
            rows.append(f"({k})         {tag:<8}{r.worst_margin:<16.6g}{wit}")
        if self.lhs is not None:
            rows.append(f"lhs inf-quotient = {self.lhs:.6f}, rhs bound = {self.rhs:.6f}")
        if self.interval is not None:
            lo, hi = self.interval.example_interval
            tlo, thi = self.interval.theorem_interval
            rows.append(
                f"mu = {self.interval.mu:g}: example interval ]{lo:.6g}, {hi:.6g}[ "
                f"(member: {self.interval.mu_in_example}), theorem interval "
                f"]{tlo:.6g}, {thi:.6g}[ (member: {self.interval.mu_in_theorem})"
            )
        return rows


def check_all(
    spec: ProblemSpec,
    constants: ConstantsReport | None,
    samples: SampleSet,
    rejected: dict[int, str] | None = None,
) -> HypothesisReport:
    """Run every checkable assumption; (3) is skipped when (a, b) was
    rejected at configuration time, (4) when no constants are available."""
    rejected = dict(rejected or {})
    report = HypothesisReport(assumptions={}, rejected=rejected)
    report.assumptions[1] = check_assumption_1(spec, samples)
    report.assumptions[2] = check_assumption_2(spec, samples)
    if 3 in rejected or spec.a is None or spec.b is None:
        report.assumptions[3] = None
        rejected.setdefault(3, "growth pair (a, b) missing or rejected (b < 2 required)")
    else:
        report.assumptions[3] = check_assumption_3(spec, samples)
    if constants is None:
        report.assumptions[4] = None
        rejected.setdefault(4, "no constants report (dimension < 3?)")
    else:
        rep4, lhs, rhs = check_assumption_4(spec, constants, samples)
        report.assumptions[4] = rep4
        report.lhs, report.rhs = lhs, rhs
        if lhs > rhs:
            report.interval = admissible_interval(spec, constants, lhs, rhs)
    return report
