"""Closed-form constants: published golden values, dual-coded oracles, monotonicity."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma as sp_gamma

from trisol.constants import (
    ConstantsReport,
    compute_report,
    embedding_bound,
    k1_k2,
    kappa,
    two_star,
    unit_ball_volume,
)
from trisol.errors import DimensionTooSmallError, ExponentOutOfRangeError, InvalidParameterError

# Benchmark configuration: 3D ball of radius 0.1, q = 3.
BALL_MEASURE = 4.0 / 3.0 * math.pi * 0.1**3
PUBLISHED = {"c1": 0.00445759, "cq": 0.171543, "kappa": 1.16798, "k1": 8.82557, "k2": 6.66307}
GOLDEN_RTOL = 0.02  # published values carry limited precision


# -- independent second implementations (direct gamma, different factoring) --

def embedding_oracle(q, n, meas):
    ts = 2 * n / (n - 2)
    return meas ** ((ts - q) / (ts * q)) * (
        math.factorial(n) / (2 * sp_gamma(n / 2 + 1))
    ) ** (1 / n) / math.sqrt(n * (n - 2) * math.pi)


def kappa_oracle(d, n):
    return d * math.sqrt(2) / (2 * math.pi ** (n / 4)) * (
        sp_gamma(n / 2 + 1) / (d**n - (d / 2) ** n)
    ) ** 0.5


def k1_oracle(d, n, c1):
    return 2 * math.sqrt(2) * c1 * (2**n - 1) / d**2


def k2_oracle(d, n, q, cq):
    return 2 ** ((q + 2) / 2) * cq**q * (2**n - 1) / (q * d**2)


def test_embedding_matches_published_c1():
    c1 = embedding_bound(1.0, 3, BALL_MEASURE)
    assert c1 == pytest.approx(PUBLISHED["c1"], rel=GOLDEN_RTOL)
    assert c1 == pytest.approx(embedding_oracle(1.0, 3, BALL_MEASURE), rel=1e-12)


def test_embedding_matches_published_cq():
    cq = embedding_bound(3.0, 3, BALL_MEASURE)
    assert cq == pytest.approx(PUBLISHED["cq"], rel=GOLDEN_RTOL)
    assert cq == pytest.approx(embedding_oracle(3.0, 3, BALL_MEASURE), rel=1e-12)


def test_embedding_zero_measure_vanishes():
    assert embedding_bound(1.0, 3, 0.0) == 0.0


def test_embedding_rejects_low_dimension():
    with pytest.raises(DimensionTooSmallError):
        embedding_bound(1.0, 2, 1.0)


@pytest.mark.parametrize("q", [0.5, 6.0, 7.0])
def test_embedding_rejects_bad_exponent(q):
    with pytest.raises(ExponentOutOfRangeError):
        embedding_bound(q, 3, 1.0)


@given(
    st.floats(min_value=1e-6, max_value=1e3),
    st.floats(min_value=1e-6, max_value=1e3),
    st.integers(min_value=3, max_value=8),
    st.floats(min_value=1.0, max_value=2.0),
)
@settings(max_examples=200, deadline=None)
def test_embedding_increasing_in_measure(m_small, m_big, n, frac):
    # q strictly below the critical exponent
    q = 1.0 + (two_star(n) - 1.0) * 0.9 * (frac - 1.0)
    lo, hi = sorted((m_small, m_big))
    assert embedding_bound(max(q, 1.0), n, lo) <= embedding_bound(max(q, 1.0), n, hi) * (1 + 1e-12)


def test_kappa_matches_published():
    k = kappa(0.1, 3)
    assert k == pytest.approx(PUBLISHED["kappa"], rel=GOLDEN_RTOL)
    assert k == pytest.approx(kappa_oracle(0.1, 3), rel=1e-12)


def test_kappa_dual_coded_at_d1():
    assert kappa(1.0, 3) == pytest.approx(kappa_oracle(1.0, 3), rel=1e-12)


@given(
    st.floats(min_value=1e-3, max_value=1e3),
    st.floats(min_value=1e-3, max_value=1e3),
    st.integers(min_value=1, max_value=10),
)
@settings(max_examples=200, deadline=None)
def test_kappa_homogeneity(d1, d2, n):
    # kappa(D, N) * sqrt(D^N - (D/2)^N) / D does not depend on D
    def invariant(d):
        return kappa(d, n) * math.sqrt(d**n - (d / 2.0) ** n) / d

    assert invariant(d1) == pytest.approx(invariant(d2), rel=1e-9)


def test_k1_k2_matches_published():
    k1, k2 = k1_k2(0.1, 3, 3.0, PUBLISHED["c1"], PUBLISHED["cq"])
    assert k1 == pytest.approx(PUBLISHED["k1"], rel=GOLDEN_RTOL)
    assert k2 == pytest.approx(PUBLISHED["k2"], rel=GOLDEN_RTOL)
    assert k1 == pytest.approx(k1_oracle(0.1, 3, PUBLISHED["c1"]), rel=1e-12)
    assert k2 == pytest.approx(k2_oracle(0.1, 3, 3.0, PUBLISHED["cq"]), rel=1e-12)


def test_k1_k2_zero_embedding_constants():
    assert k1_k2(1.0, 1, 2.0, 0.0, 0.0) == (0.0, 0.0)


def test_k1_k2_hand_evaluated():
    k1, k2 = k1_k2(0.5, 3, 2.0, 1.0, 1.0)
    assert k1 == pytest.approx(2 * math.sqrt(2) * 7 / 0.25, rel=1e-14)
    assert k2 == pytest.approx(4 * 7 / (2 * 0.25), rel=1e-14)


@given(
    st.floats(min_value=1e-2, max_value=10.0),
    st.floats(min_value=1e-2, max_value=10.0),
    st.floats(min_value=1.1, max_value=5.0),
    st.floats(min_value=1e-3, max_value=10.0),
)
@settings(max_examples=200, deadline=None)
def test_k1_k2_monotone(d_small, d_big, q, c):
    lo, hi = sorted((d_small, d_big))
    k1_lo, k2_lo = k1_k2(lo, 3, q, c, c)
    k1_hi, k2_hi = k1_k2(hi, 3, q, c, c)
    assert k1_lo >= k1_hi * (1 - 1e-12)
    assert k2_lo >= k2_hi * (1 - 1e-12)
    # increasing in the embedding constants
    k1_c, k2_c = k1_k2(lo, 3, q, 2 * c, 2 * c)
    assert k1_c >= k1_lo
    assert k2_c >= k2_lo


def test_report_invariants_and_json():
    rep = compute_report(3, BALL_MEASURE, 0.1, 3.0)
    assert rep.two_star == 2 * 3 / (3 - 2)
    assert 1 < rep.q < rep.two_star
    # stored K values satisfy the defining formulas to machine precision
    k1, k2 = k1_k2(rep.d, rep.n, rep.q, rep.c1, rep.cq)
    assert rep.k1 == pytest.approx(k1, rel=1e-14)
    assert rep.k2 == pytest.approx(k2, rel=1e-14)
    payload = rep.to_json()
    assert list(payload) == ["n", "measure", "two_star", "d", "c1", "cq", "kappa", "k1", "k2", "q"]
    assert all(v > 0 for v in payload.values())


def test_report_rejects_bad_inputs():
    with pytest.raises(DimensionTooSmallError):
        ConstantsReport(2, 1, 4, 1, 1, 1, 1, 1, 1, 2)
    with pytest.raises(ExponentOutOfRangeError):
        compute_report(3, 1.0, 1.0, 6.5)
    with pytest.raises(InvalidParameterError):
        kappa(-1.0, 3)


def test_unit_ball_volume():
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-14)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-14)
