"""Stationary law: frozen reference values, quadrature oracles, and
property-based identities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from mlsrbm import (
    ConjectureUnstable,
    InvalidProfile,
    LevelSpec,
    PositiveTheta,
    SegmentKind,
    Unstable,
    WrongK,
    ZeroDriftPresent,
    build_model,
    cdf_at,
    conjectured_density_general,
    density_at,
    density_closed_form,
    mgf_segment,
    sample_stationary,
    segment_weights,
    stability_integral,
    stationary_law,
    stationary_mean,
    step_profile,
    weights_k2_reference,
)

from conftest import make_stable_spec

# Reference values for M1 (l1 = 1, sigma = (1, 1), b = (1, -1)), derived
# independently from the two-level closed forms: with beta1 = 2, beta2 = -2,
# d1 = (e^2 - 1) / (2 e^2 - 1), h(0) = 2 / (2 e^2 - 1), h(1) = 2 e^2 / (2 e^2 - 1).
D1_M1 = 0.4637105582521231
H0_M1 = 0.14515776699150765
H1_M1 = 1.0725788834957537
MEAN_M1 = 1.1088683252436307
EY_M1 = 0.07257888349575382

# Three-level reference (l = (1, 2), sigma = (1, 2, 1), b = (1, 1, -1)):
# unnormalized masses T1 = e^2 - 1, T2 = e^2 (e^0.5 - 1), T3 = e^2.5.
K3_WEIGHTS = (0.27344572658978405, 0.20515473313731472, 0.5213995402729014)


QUAD_OPTS = dict(limit=200, epsabs=1e-12, epsrel=1e-12)


def quad_pieces(law, fn=lambda x: 1.0):
    """Quadrature of fn(x) h(x) over each segment, top one truncated far out."""
    model = law.model
    edges = [0.0, *model.boundaries]
    hi_tail = edges[-1] + 60.0 / -model.betas[-1]
    out = []
    for j in range(model.k):
        lo = edges[j]
        hi = edges[j + 1] if j + 1 < len(edges) else hi_tail
        val, err = quad(lambda x: fn(x) * density_at(law, x), lo, hi, **QUAD_OPTS)
        out.append(val)
    return np.array(out)


def test_m1_frozen_values(law_m1):
    assert density_at(law_m1, 0.0) == pytest.approx(H0_M1, rel=1e-14)
    assert density_at(law_m1, 1.0) == pytest.approx(H1_M1, rel=1e-14)
    assert cdf_at(law_m1, 1.0) == pytest.approx(D1_M1, rel=1e-14)
    assert stationary_mean(law_m1) == pytest.approx(MEAN_M1, rel=1e-13)
    assert 0.5 / stability_integral(law_m1) == pytest.approx(EY_M1, rel=1e-13)
    # the independent closed forms, written out
    e2 = math.exp(2.0)
    assert D1_M1 == pytest.approx((e2 - 1.0) / (2.0 * e2 - 1.0), rel=1e-15)
    assert H0_M1 == pytest.approx(2.0 / (2.0 * e2 - 1.0), rel=1e-15)
    assert H1_M1 == pytest.approx(2.0 * e2 / (2.0 * e2 - 1.0), rel=1e-15)


def test_k3_frozen_weights(k3):
    w = segment_weights(k3)
    assert w == pytest.approx(K3_WEIGHTS, rel=1e-13)
    e = math.e
    t = np.array([e**2 - 1.0, e**2 * (math.exp(0.5) - 1.0), math.exp(2.5)])
    assert w == pytest.approx(t / t.sum(), rel=1e-13)


def test_weights_match_k2_reference_path(m1):
    d1, d2 = weights_k2_reference(m1)
    w = segment_weights(m1)
    assert d1 == pytest.approx(D1_M1, rel=1e-15)
    assert w[0] == pytest.approx(d1, rel=1e-13)
    assert w[1] == pytest.approx(d2, rel=1e-13)


def test_weights_k2_reference_rejects_other_k(k3, mflat):
    with pytest.raises(WrongK):
        weights_k2_reference(k3)
    with pytest.raises(WrongK):
        weights_k2_reference(mflat)


def test_unstable_models_refused():
    transient = build_model(LevelSpec((1.0,), (1.0, 1.0), (1.0, 0.5)))
    critical = build_model(LevelSpec((1.0,), (1.0, 1.0), (1.0, 0.0)))
    for m in (transient, critical):
        with pytest.raises(Unstable):
            stationary_law(m)
        with pytest.raises(Unstable):
            segment_weights(m)


def test_single_level_is_exponential(mflat):
    # reflected BM with b < 0: Z ~ Exp(-beta), beta = 2b/sigma^2
    law = stationary_law(mflat)
    assert law.weights == pytest.approx([1.0], abs=1e-15)
    xs = np.linspace(0.0, 5.0, 64)
    assert density_at(law, xs) == pytest.approx(2.0 * np.exp(-2.0 * xs), rel=1e-13)
    assert cdf_at(law, xs) == pytest.approx(1.0 - np.exp(-2.0 * xs), abs=1e-14)
    assert stationary_mean(law) == pytest.approx(0.5, rel=1e-13)


def test_uniform_zero_drift_segment(m_zero_drift):
    law = stationary_law(m_zero_drift)
    assert law.segment_kind[0] is SegmentKind.UNIFORM
    assert law.segment_kind[1] is SegmentKind.EXPONENTIAL
    # flat piece below l1
    xs = np.linspace(0.0, 0.999, 11)
    dens = density_at(law, xs)
    assert np.all(np.abs(dens - dens[0]) < 1e-14)
    # weight of the flat piece: 2 |b2| l1 / (sigma1^2 + 2 |b2| l1)
    assert law.weights[0] == pytest.approx(2.0 / 3.0, rel=1e-13)
    assert quad_pieces(law).sum() == pytest.approx(1.0, abs=1e-10)


def test_collapse_to_single_level():
    # identical coefficients on every level: the law must not see the cuts
    m = build_model(LevelSpec((0.7, 1.9), (1.3, 1.3, 1.3), (-0.8, -0.8, -0.8)))
    law = stationary_law(m)
    beta = 2.0 * -0.8 / 1.3**2
    xs = np.linspace(0.0, 6.0, 101)
    assert density_at(law, xs) == pytest.approx(-beta * np.exp(beta * xs), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 5))
def test_density_normalizes_and_matches_cdf(seed, k):
    rng = np.random.default_rng(seed)
    zeros = tuple(j for j in range(k - 1) if rng.random() < 0.25)
    law = stationary_law(build_model(make_stable_spec(rng, k, zero_drift_at=zeros)))
    assert quad_pieces(law).sum() == pytest.approx(1.0, abs=1e-10)
    # per-segment quadrature reproduces the mixture weights
    assert quad_pieces(law) == pytest.approx(law.weights, abs=1e-10)
    # cdf at the interior boundaries telescopes the weights
    cums = np.cumsum(law.weights)[: k - 1]
    bnd = np.array(law.model.boundaries)
    if k > 1:
        assert cdf_at(law, bnd) == pytest.approx(cums, rel=1e-12)
    far = (bnd[-1] if k > 1 else 0.0) + 80.0 / -law.model.betas[-1]
    assert cdf_at(law, far) == pytest.approx(1.0, abs=1e-12)
    assert cdf_at(law, 0.0) == 0.0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(2, 5))
def test_closed_form_equals_general_density(seed, k):
    rng = np.random.default_rng(seed)
    m = build_model(make_stable_spec(rng, k))
    law = stationary_law(m)
    hi = m.boundaries[-1] + 10.0 / -m.betas[-1]
    xs = np.linspace(0.0, hi, 257)
    a = density_at(law, xs)
    b = density_closed_form(m, xs)
    assert b == pytest.approx(a, rel=1e-10, abs=1e-12)


def test_closed_form_requires_no_zero_drift(m_zero_drift):
    with pytest.raises(ZeroDriftPresent):
        density_closed_form(m_zero_drift, 0.5)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(2, 4))
def test_zero_drift_is_continuous_limit(seed, k):
    rng = np.random.default_rng(seed)
    spec = make_stable_spec(rng, k)
    j = int(rng.integers(0, k - 1))
    drifts_eps = list(spec.drifts)
    drifts_eps[j] = 1e-8
    drifts_zero = list(spec.drifts)
    drifts_zero[j] = 0.0
    w_eps = segment_weights(
        build_model(LevelSpec(spec.boundaries, spec.sigmas, tuple(drifts_eps)))
    )
    w_zero = segment_weights(
        build_model(LevelSpec(spec.boundaries, spec.sigmas, tuple(drifts_zero)))
    )
    assert np.max(np.abs(w_eps - w_zero)) < 1e-6


def test_density_is_cdf_derivative(law_m1, k3):
    for law in (law_m1, stationary_law(k3)):
        for x in (0.3, 0.77, 1.4, 2.6):
            h = 1e-6
            fd = (cdf_at(law, x + h) - cdf_at(law, x - h)) / (2.0 * h)
            assert fd == pytest.approx(density_at(law, x), rel=1e-6)


def test_sigma_squared_density_continuous_at_boundaries(k3):
    # sigma^2 h is continuous across each boundary even though h jumps
    law = stationary_law(k3)
    for j, a in enumerate(k3.boundaries):
        below = k3.sigmas[j] ** 2 * density_at(law, a - 1e-12)
        above = k3.sigmas[j + 1] ** 2 * density_at(law, a)
        assert below == pytest.approx(above, rel=1e-9)


def test_mgf_matches_quadrature(law_m1, k3):
    for law in (law_m1, stationary_law(k3)):
        model = law.model
        edges = [0.0, *model.boundaries]
        for theta in (-3.0, -1.0, -0.25):
            for j in range(1, model.k + 1):
                got = mgf_segment(law, j, theta).value
                lo = edges[j - 1]
                hi = (
                    edges[j]
                    if j < model.k
                    else edges[-1] + 80.0 / -(model.betas[-1] + theta)
                )
                val, _ = quad(
                    lambda x: math.exp(theta * x) * density_at(law, x), lo, hi,
                    **QUAD_OPTS,
                )
                # normalized within-segment transform
                assert got == pytest.approx(val / law.weights[j - 1], rel=1e-8)


def test_mgf_special_points(law_m1, m_zero_drift):
    assert mgf_segment(law_m1, 1, 0.0).value == 1.0
    assert mgf_segment(law_m1, 1, 0.0).removable_singularity
    # theta = -beta_1 is the removable point on segment 1 of M1
    v = mgf_segment(law_m1, 1, -2.0)
    assert v.removable_singularity
    val, _ = quad(
        lambda x: math.exp(-2.0 * x) * density_at(law_m1, x) / law_m1.weights[0],
        0.0, 1.0, **QUAD_OPTS,
    )
    assert v.value == pytest.approx(val, rel=1e-9)
    # uniform segment around theta = 0 stays smooth
    law_u = stationary_law(m_zero_drift)
    left = mgf_segment(law_u, 1, -1e-7).value
    right = mgf_segment(law_u, 1, 1e-7).value
    assert left == pytest.approx(right, rel=1e-6)
    with pytest.raises(PositiveTheta):
        mgf_segment(law_m1, 2, 0.5)
    with pytest.raises(IndexError):
        mgf_segment(law_m1, 3, -1.0)


def test_mgf_positive_theta_on_bounded_segment(law_m1):
    got = mgf_segment(law_m1, 1, 1.5).value
    val, _ = quad(
        lambda x: math.exp(1.5 * x) * density_at(law_m1, x) / law_m1.weights[0],
        0.0, 1.0, **QUAD_OPTS,
    )
    assert got == pytest.approx(val, rel=1e-9)


def test_sampler_reproducible_and_correct(law_m1):
    s1 = sample_stationary(law_m1, 2024, 50_000)
    s2 = sample_stationary(law_m1, 2024, 50_000)
    assert np.array_equal(s1, s2)
    s3 = sample_stationary(law_m1, 2025, 50_000)
    assert not np.array_equal(s1, s3)
    assert np.all(s1 >= 0.0)
    # empirical CDF against the analytic CDF
    xs = np.sort(s1)
    ecdf_hi = np.arange(1, xs.size + 1) / xs.size
    gap = np.max(np.abs(ecdf_hi - cdf_at(law_m1, xs)))
    assert gap < 0.01
    assert np.mean(s1) == pytest.approx(MEAN_M1, abs=0.02)


def test_sampler_input_validation(law_m1):
    with pytest.raises(ValueError):
        sample_stationary(law_m1, 1, 0)


def test_stationary_mean_matches_quadrature(k3):
    law = stationary_law(k3)
    total = quad_pieces(law, fn=lambda x: x).sum()
    assert stationary_mean(law) == pytest.approx(total, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 4))
def test_stability_integral_consistent_with_weights(seed, k):
    # C = sum of unnormalized masses; the integral form equals C / 2, so
    # the density value h(0) = 2 / (C sigma_1^2) ties them together.
    rng = np.random.default_rng(seed)
    law = stationary_law(build_model(make_stable_spec(rng, k)))
    c_half = stability_integral(law)
    h0 = density_at(law, 0.0)
    assert h0 == pytest.approx(1.0 / (c_half * law.model.sigmas[0] ** 2), rel=1e-10)


def test_step_profile_eval_and_validation():
    f = step_profile((1.0, 2.0), (10.0, 20.0, 30.0))
    assert f(0.0) == 10.0
    assert f(0.999) == 10.0
    assert f(1.0) == 20.0
    assert f(2.0) == 30.0
    assert f(100.0) == 30.0
    with pytest.raises(InvalidProfile):
        step_profile((2.0, 1.0), (1.0, 2.0, 3.0))
    with pytest.raises(InvalidProfile):
        step_profile((1.0,), (1.0, 2.0, 3.0))


def test_conjecture_reproduces_true_two_level_law(m1, law_m1):
    sig = step_profile((1.0,), (1.0, 1.0))
    dri = step_profile((1.0,), (1.0, -1.0))
    law_c = conjectured_density_general(sig, dri, 2.0, 50)
    xs = np.linspace(0.0, 3.0, 301)
    assert density_at(law_c, xs) == pytest.approx(density_at(law_m1, xs), abs=1e-12)


def test_conjecture_rejects_unstable_tail():
    with pytest.raises(ConjectureUnstable):
        conjectured_density_general(lambda x: 1.0, lambda x: 0.5, 2.0, 20)


def test_conjecture_accepts_tabulated_arrays():
    law = conjectured_density_general(
        [1.0] * 20, [v for v in np.linspace(1.0, -1.0, 20)], 2.0, 20
    )
    assert quad_pieces(law).sum() == pytest.approx(1.0, abs=1e-9)
