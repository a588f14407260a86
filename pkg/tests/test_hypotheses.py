"""Sampled hypothesis checks and the admissible interval."""

import math

import numpy as np
import pytest

from trisol.errors import EmptyIntervalError, InvalidParameterError
from trisol.functionals import Nonlinearity, ProblemSpec, make_nonlinearity
from trisol.geometry import Ball, Box, Field, Grid
from trisol.hypotheses import (
    AdmissibleInterval,
    SampleSet,
    admissible_interval,
    check_all,
    check_assumption_1,
    check_assumption_2,
    check_assumption_3,
    check_assumption_4,
)

RHS_PUBLISHED = 86.0932
LHS_PUBLISHED = 162.872


def spec_1d(nl, mu=1.0, **kw):
    grid = Grid.cartesian(Box((0.0,), (1.0,)), 17)
    return ProblemSpec(nonlinearity=nl, g=Field.zeros(grid), mu=mu, **kw)


def samples_for(spec, **kw):
    defaults = dict(t_count=5, t_min=1e-3, t_max=10.0, s_count=101)
    defaults.update(kw)
    return SampleSet.from_spec(spec, **defaults)


# ---------------------------------------------------------------- hypothesis 1

def test_a1_zero_source_fails_for_negative_s():
    # F = 0, m1 = m2 = 0, g = 0: margin(s) = s/mu, negative for s < 0
    spec = spec_1d(make_nonlinearity("zero"), q=3.0, m1=0.0, m2=0.0, beta=1.0)
    rep = check_assumption_1(spec, samples_for(spec))
    assert not rep.passed
    assert rep.witness[2] == -2.0  # worst sample is the most negative s
    assert rep.worst_margin == pytest.approx(-2.0, rel=1e-12)


def test_a1_square_growth_hand_inequality():
    # F = s^2 vs m1=0, m2=1, q=3, mu=1: margin = s, fails at negative s
    nl = Nonlinearity("square", F=lambda x, t, s: np.asarray(s, float) ** 2)
    spec = spec_1d(nl, q=3.0, m1=0.0, m2=1.0, beta=0.5)
    rep = check_assumption_1(spec, samples_for(spec, s_span=1.0, s_count=201))
    assert not rep.passed
    assert rep.worst_margin == pytest.approx(-1.0, rel=1e-12)
    assert rep.witness[2] == -1.0


def test_a1_benchmark_fails_beyond_small_t(benchmark_spec_radial):
    # The published claim is pass for all t; direct evaluation disproves it
    # beyond t ~ 0.0162 with witness near the dip bottom s = -50.
    spec = benchmark_spec_radial
    rep = check_assumption_1(spec, SampleSet.from_spec(spec, x_stride=8))
    assert not rep.passed
    assert rep.witness[2] == pytest.approx(-50.0, abs=10.0)
    assert rep.witness[1] > 0.016
    assert rep.worst_margin == pytest.approx(-24.52, abs=0.2)


def test_a1_benchmark_passes_below_crossover_t(benchmark_spec_radial):
    spec = benchmark_spec_radial
    samples = SampleSet.from_spec(spec, t_count=9, t_min=1e-4, t_max=0.015, x_stride=8)
    rep = check_assumption_1(spec, samples)
    assert rep.passed
    assert rep.worst_margin > 0


# ---------------------------------------------------------------- hypothesis 2

def test_a2_boundary_pass_at_zero():
    # Ftilde exactly the group: margin identically zero
    nl = Nonlinearity(
        "group",
        F=lambda x, t, s: np.asarray(s, float) / 0.5,
        F_tilde=lambda x, t, e: np.asarray(e, float) ** 2,
    )
    spec = spec_1d(nl, mu=0.5, beta=1.0)
    rep = check_assumption_2(spec, samples_for(spec))
    assert rep.passed
    assert rep.boundary
    assert rep.worst_margin == pytest.approx(0.0, abs=1e-15)


def test_a2_benchmark_fails_for_negative_eta(benchmark_spec_radial):
    spec = benchmark_spec_radial
    rep = check_assumption_2(spec, SampleSet.from_spec(spec, x_stride=8))
    assert not rep.passed
    assert rep.witness[2] < 0


def test_a2_benchmark_passes_on_nonnegative_eta(benchmark_spec_radial):
    # restricted to eta >= 0 the inequality does hold (the published check)
    spec = benchmark_spec_radial
    base = SampleSet.from_spec(spec, x_stride=8)
    nonneg = SampleSet(
        x_points=base.x_points,
        g_vals=base.g_vals,
        lap_g_vals=base.lap_g_vals,
        t_samples=base.t_samples,
        s_samples=np.linspace(0.0, 1000.0, 201),
    )
    rep = check_assumption_2(spec, nonneg)
    assert rep.passed


# ---------------------------------------------------------------- hypothesis 3

def test_a3_quartic_growth_fails_near_range_edge():
    nl = Nonlinearity(
        "quartic",
        F=lambda x, t, s: 4.0 * np.asarray(s, float) ** 3,
        F_tilde=lambda x, t, e: np.asarray(e, float) ** 4,
    )
    spec = spec_1d(nl, mu=1.0, a=1.0, b=1.0, beta=2.0)
    rep = check_assumption_3(spec, samples_for(spec))
    assert not rep.passed
    assert abs(rep.witness[2]) == pytest.approx(4.0, abs=1e-9)  # range edge


def test_a3_passes_on_compliant_problem(capped_spec):
    rep = check_assumption_3(capped_spec, SampleSet.from_spec(capped_spec, x_stride=4))
    assert rep.passed


# ---------------------------------------------------------------- hypothesis 4

def test_a4_benchmark_numbers(benchmark_spec_radial, benchmark_constants):
    spec, c = benchmark_spec_radial, benchmark_constants
    samples = SampleSet.from_spec(spec, x_stride=1)
    rep, lhs, rhs = check_assumption_4(spec, c, samples)
    assert rep.passed
    assert rhs == pytest.approx(RHS_PUBLISHED, abs=1e-3)
    assert rhs == pytest.approx(9.0 * c.k1 + c.k2, rel=1e-12)
    assert abs(lhs - LHS_PUBLISHED) / LHS_PUBLISHED < 0.02  # recomputed ~164.5, flagged
    assert lhs == pytest.approx(164.517, abs=0.01)
    assert lhs > rhs


def test_a4_huge_growth_constants_fail(benchmark_spec_radial, benchmark_constants):
    spec = benchmark_spec_radial
    bad = ProblemSpec(
        nonlinearity=spec.nonlinearity,
        g=spec.g,
        lap_g=spec.lap_g,
        mu=spec.mu,
        q=spec.q,
        m1=1e6,
        m2=1e6,
        alpha=spec.alpha,
        beta=spec.beta,
        t_grid=spec.t_grid,
    )
    samples = SampleSet.from_spec(bad, x_stride=16)
    rep, lhs, rhs = check_assumption_4(bad, benchmark_constants, samples)
    assert not rep.passed
    assert rhs > lhs


def test_a4_requires_beta_above_alpha_kappa(benchmark_spec_radial, benchmark_constants):
    spec = benchmark_spec_radial
    bad = ProblemSpec(
        nonlinearity=spec.nonlinearity,
        g=spec.g,
        lap_g=spec.lap_g,
        mu=spec.mu,
        q=spec.q,
        m1=spec.m1,
        m2=spec.m2,
        alpha=1000.0,
        beta=spec.beta,
        t_grid=spec.t_grid,
    )
    with pytest.raises(InvalidParameterError):
        check_assumption_4(bad, benchmark_constants, SampleSet.from_spec(bad, s_span=2e3, x_stride=16))


# ------------------------------------------------------------------- interval

def test_interval_benchmark_membership(benchmark_spec_radial, benchmark_constants):
    spec = benchmark_spec_radial
    samples = SampleSet.from_spec(spec, x_stride=4)
    _, lhs, rhs = check_assumption_4(spec, benchmark_constants, samples)
    interval = admissible_interval(spec, benchmark_constants, lhs, rhs)
    lo, hi = interval.example_interval
    assert lo < 0.01 < hi
    assert interval.mu_in_example
    # the theorem-convention interval is the same numbers scaled by 1400
    tlo, thi = interval.theorem_interval
    scale = 2.0 * 7.0 / 0.1**2
    assert tlo == pytest.approx(scale * lo, rel=1e-12)
    assert thi == pytest.approx(scale * hi, rel=1e-12)
    assert not interval.mu_in_theorem


def test_interval_degenerate_gap_raises():
    with pytest.raises(EmptyIntervalError):
        AdmissibleInterval(delta1_inv=100.0, delta2_inv=100.0, scale_factor=1.0, mu=0.01)


def test_interval_hand_scaled():
    iv = AdmissibleInterval(delta1_inv=200.0, delta2_inv=100.0, scale_factor=1400.0, mu=0.01)
    assert iv.theorem_interval == (pytest.approx(7.0), pytest.approx(14.0))


def test_interval_membership_consistency(capped_spec, capped_constants):
    samples = SampleSet.from_spec(capped_spec, x_stride=2)
    _, lhs, rhs = check_assumption_4(capped_spec, capped_constants, samples)
    iv = admissible_interval(capped_spec, capped_constants, lhs, rhs)
    lo, hi = iv.example_interval
    # computed twice: from stored endpoints and from the raw lhs/rhs
    assert iv.mu_in_example == (1.0 / lhs < capped_spec.mu < 1.0 / rhs)
    assert iv.mu_in_example


# --------------------------------------------------------------- whole bundle

def test_compliant_problem_passes_all_four(capped_spec, capped_constants):
    samples = SampleSet.from_spec(capped_spec, x_stride=2)
    report = check_all(capped_spec, capped_constants, samples)
    assert report.all_passed
    assert report.interval is not None
    assert report.interval.mu_in_example
    payload = report.to_json()
    assert payload["all_passed"] is True
    assert set(payload["assumptions"]) == {"1", "2", "3", "4"}
    assert any("lhs" in line for line in report.summary_lines())


def test_monotone_refinement_never_flips_fail_to_pass(benchmark_spec_radial):
    spec = benchmark_spec_radial
    coarse_s = np.linspace(-1000.0, 1000.0, 26)
    fine_s = np.linspace(-1000.0, 1000.0, 51)  # nested: every coarse s appears
    base = SampleSet.from_spec(spec, t_count=3, t_min=1e-3, t_max=10.0, x_stride=16)
    coarse = SampleSet(base.x_points, base.g_vals, base.lap_g_vals, base.t_samples, coarse_s)
    fine = SampleSet(base.x_points, base.g_vals, base.lap_g_vals, base.t_samples, fine_s)
    for checker in (check_assumption_1, check_assumption_2):
        rc, rf = checker(spec, coarse), checker(spec, fine)
        assert rf.worst_margin <= rc.worst_margin + 1e-12
        if not rc.passed:
            assert not rf.passed


def test_integrated_inequality_follows_assumption_1(capped_spec):
    # whenever (1) holds on a covering s-grid, the integrated form
    # Ftilde <= group + m1 |eta| + m2 |eta|^q / q must hold pointwise
    spec = capped_spec
    samples = SampleSet.from_spec(spec, x_stride=4)
    assert check_assumption_1(spec, samples).passed
    etas = np.linspace(-2 * spec.beta, 2 * spec.beta, 81)
    g = samples.g_vals[:, None]
    lg = samples.lap_g_vals[:, None]
    for t in samples.t_samples:
        ft = spec.nonlinearity.F_tilde(samples.x_points[:, None, :], float(t), etas[None, :])
        group = (0.5 * etas**2 - etas * g + etas * lg) / spec.mu
        bound = group + spec.m1 * np.abs(etas) + spec.m2 * np.abs(etas) ** spec.q / spec.q
        assert np.all(ft <= bound + 1e-9 * np.maximum(np.abs(bound), 1.0))


def test_sample_set_validations(benchmark_spec_radial):
    with pytest.raises(InvalidParameterError):
        SampleSet.from_spec(benchmark_spec_radial, s_span=10.0)  # < 2 beta
    with pytest.raises(InvalidParameterError):
        SampleSet.from_spec(benchmark_spec_radial, t_min=0.0)
