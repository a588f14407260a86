"""Cone test function: nodal values, energies, and the bound chain."""

import math

import numpy as np
import pytest

from trisol.constants import unit_ball_volume
from trisol.errors import BallNotContainedError
from trisol.geometry import Ball, Box, Field, Grid, h10_norm_sq
from trisol.testfn import (
    build_u_beta,
    chi_upper_bound,
    inf_quotient,
    make_report,
    phi_u_beta_closed,
    vartheta_u_beta_lower,
)

PUBLISHED_LHS = 162.872
RECOMPUTED_LHS = 164.517040  # analytic value at large t; see test below


def cone_grid(nodes=129):
    return Grid.cartesian(Ball((0.0, 0.0), 1.0), nodes)


def test_u_beta_nodal_values():
    grid = cone_grid()
    beta, d = 2.0, 1.0
    u = build_u_beta(grid, np.zeros(2), d, beta)
    pts = grid.points
    rho = np.linalg.norm(pts, axis=1)
    interior = grid.interior
    plateau = interior & (rho <= d / 2)
    assert np.allclose(u.values[plateau], beta)
    # ramp midpoint: the nearest interior node to radius 3D/4 on the x-axis
    on_axis = interior & (np.abs(pts[:, 1]) < 1e-12) & (pts[:, 0] > 0)
    k = np.argmin(np.abs(pts[on_axis][:, 0] - 0.75))
    x_mid = pts[on_axis][k]
    expect = (2 * beta / d) * (d - np.linalg.norm(x_mid))
    assert u.values[np.flatnonzero(on_axis)[k]] == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(beta / 2, abs=2 * beta * grid.h)
    outside = rho >= d
    assert np.all(u.values[outside] == 0.0)


def test_u_beta_requires_contained_ball():
    grid = cone_grid(33)
    with pytest.raises(BallNotContainedError):
        build_u_beta(grid, np.array([0.5, 0.0]), 1.0, 1.0)


def test_u_beta_respects_dirichlet_mask():
    grid = cone_grid(65)
    u = build_u_beta(grid, np.zeros(2), 1.0, 3.0)
    assert np.all(u.values[~grid.interior] == 0.0)


def test_phi_closed_zero_height():
    assert phi_u_beta_closed(1.0, 2, 0.0) == 0.0


def test_phi_closed_hand_value_2d():
    # 1/2 * 4 * pi * (1 - 1/4) = 3 pi / 2
    assert phi_u_beta_closed(1.0, 2, 1.0) == pytest.approx(1.5 * math.pi, rel=1e-12)


def test_phi_discrete_converges_to_closed_form():
    beta, d = 1.0, 1.0
    closed = phi_u_beta_closed(d, 2, beta)
    errs = []
    for nodes in (129, 257):  # h = 1/64 then 1/128
        grid = cone_grid(nodes)
        u = build_u_beta(grid, np.zeros(2), d, beta)
        errs.append(abs(0.5 * h10_norm_sq(u) - closed) / closed)
    assert errs[1] < 0.02
    assert errs[0] / errs[1] >= 1.5


def test_chi_bound_vanishing_constants():
    assert chi_upper_bound(1.0, 0.0, 0.0, 3.0, 0.5, 0.5) == 0.0


def test_chi_bound_direct_formula_and_k_identity(benchmark_constants):
    c = benchmark_constants
    m1, m2 = 9.0, 1.0
    direct = math.sqrt(2.0) * c.c1 * m1 + 2.0**1.5 * c.cq**3 * m2 / 3.0
    assert chi_upper_bound(1.0, m1, m2, 3.0, c.c1, c.cq) == pytest.approx(direct, rel=1e-12)
    # same number through the K1/K2 route (the bound-chain identity)
    via_k = c.d**2 / (2.0 * (2.0**c.n - 1.0)) * (m1 * c.k1 / 1.0 + m2 * c.k2 * 1.0)
    assert chi_upper_bound(1.0, m1, m2, 3.0, c.c1, c.cq) == pytest.approx(via_k, rel=1e-12)


def test_chi_bound_decays_for_subquadratic_q():
    vals = [chi_upper_bound(r, 1.0, 1.0, 1.5, 0.3, 0.3) for r in (1e2, 1e4, 1e6)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-2


def test_inf_quotient_matches_analytic(benchmark_spec_radial):
    # analytic infimum: g -> 0 at the boundary, factor minimal at large t
    spec = benchmark_spec_radial
    beta, mu = spec.beta, spec.mu

    def analytic(t):
        ft = 0.99 * (1 + math.exp(-t) / 99) * (8 * beta + 50 * beta**2 + beta**3 / 3)
        return (ft - (0.5 * beta**2 + beta * (-0.006)) / mu) / beta**2

    for t in (1.0, 1000.0):
        got, witness = inf_quotient(spec, t)
        assert got == pytest.approx(analytic(t), rel=1e-6)
        # witness sits where g is smallest: next to the boundary
        assert np.linalg.norm(witness) == pytest.approx(0.1, abs=2 * spec.grid.h)
    assert analytic(1000.0) == pytest.approx(RECOMPUTED_LHS, abs=1e-5)
    # within the 2% reproduction band of the published 162.872, and flagged
    assert abs(analytic(1000.0) - PUBLISHED_LHS) / PUBLISHED_LHS < 0.02


def test_inf_quotient_trivial_equality_case():
    # Ftilde exactly equal to the subtracted group -> infimum 0
    from trisol.functionals import Nonlinearity, ProblemSpec

    grid = Grid.cartesian(Box((0.0,), (1.0,)), 33)
    nl = Nonlinearity(
        "group-only",
        F=lambda x, t, s: np.asarray(s) / 0.5,
        F_tilde=lambda x, t, e: np.asarray(e) ** 2 / (2 * 0.5),
    )
    spec = ProblemSpec(nonlinearity=nl, g=Field.zeros(grid), mu=0.5, beta=2.0)
    got, _ = inf_quotient(spec, 1.0)
    assert got == pytest.approx(0.0, abs=1e-14)


def test_inf_quotient_1d_toy_hand_value():
    # Ftilde = eta^2, g = 0, mu = 1: quotient = 1 - 1/2, x-free
    from trisol.functionals import Nonlinearity, ProblemSpec

    grid = Grid.cartesian(Box((0.0,), (1.0,)), 33)
    nl = Nonlinearity(
        "square-primitive",
        F=lambda x, t, s: 2.0 * np.asarray(s),
        F_tilde=lambda x, t, e: np.asarray(e) ** 2,
    )
    spec = ProblemSpec(nonlinearity=nl, g=Field.zeros(grid), mu=1.0, beta=3.0)
    got, _ = inf_quotient(spec, 1.0)
    assert got == pytest.approx(0.5, rel=1e-12)


def test_vartheta_lower_is_quotient_times_plateau_volume(benchmark_spec_radial, benchmark_constants):
    spec, c = benchmark_spec_radial, benchmark_constants
    quot, _ = inf_quotient(spec, 1.0)
    lower = vartheta_u_beta_lower(spec, 1.0, c)
    plateau = unit_ball_volume(3) * c.d**3 / 8.0
    assert lower == pytest.approx(quot * spec.beta**2 * plateau, rel=1e-12)


def test_report_ratio_identity_and_gap_chain(benchmark_spec_radial, benchmark_constants):
    spec, c = benchmark_spec_radial, benchmark_constants
    rep = make_report(spec, c, t=1.0)
    quot, _ = inf_quotient(spec, 1.0)
    expected_ratio = c.d**2 / (2.0 * (2.0**c.n - 1.0)) * quot
    assert rep.ratio_lower == pytest.approx(expected_ratio, rel=1e-12)
    # hypothesis (4) holds here, so the bound chain must close
    assert rep.chi_alpha2_upper < rep.ratio_lower
    # alpha^2 < phi(u_beta) whenever beta > alpha kappa
    assert spec.beta > spec.alpha * c.kappa
    assert spec.alpha**2 < rep.phi_closed


def test_report_discrete_energy_tracks_closed_form(benchmark_spec_radial, benchmark_constants):
    rep = make_report(benchmark_spec_radial, benchmark_constants, t=1.0)
    assert rep.phi_discrete == pytest.approx(rep.phi_closed, rel=0.02)


def test_report_json_roundtrip(benchmark_spec_radial, benchmark_constants):
    rep = make_report(benchmark_spec_radial, benchmark_constants, t=1.0)
    payload = rep.to_json()
    assert set(payload) == {
        "x0",
        "beta",
        "phi_closed",
        "phi_discrete",
        "vartheta_lower",
        "ratio_lower",
        "chi_alpha2_upper",
        "alpha",
    }
