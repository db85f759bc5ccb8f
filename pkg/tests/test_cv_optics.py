import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.stats import poisson

from povm_purify import (
    CVState,
    Efficiency,
    FockDistribution,
    GainParams,
    GridCoverageError,
    ResourceLimitError,
    TailMassError,
    ValidationError,
    amplify_photon_number,
    bernoulli_convolve,
    coherent_state,
    fock_state,
    heterodyne_pdf,
    homodyne_pdf,
    photo_added_noise,
)


# --- state catalog -------------------------------------------------------------

def test_fock_distribution_validation():
    with pytest.raises(ValidationError):
        FockDistribution(rho_nn=np.array([0.5, -0.1, 0.6]), cutoff=2)
    with pytest.raises(TailMassError):
        FockDistribution(rho_nn=np.array([0.9]), cutoff=0, tail_mass=0.1)
    with pytest.raises(ValidationError):
        FockDistribution(rho_nn=np.array([0.5, 0.4]), cutoff=1)


def test_state_constructors_and_moments():
    f = fock_state(5)
    assert f.mean_photon() == 5.0
    assert f.photon_variance() == 0.0
    c = coherent_state(4.0)
    assert c.mean_photon() == pytest.approx(4.0, abs=1e-12)
    assert c.photon_variance() == pytest.approx(4.0, abs=1e-10)
    assert c.tail_mass < 1e-10
    with pytest.raises(TailMassError):
        coherent_state(100.0, cutoff=80)


def test_gain_params_invariants():
    with pytest.raises(ValidationError):
        GainParams(g=0)
    with pytest.raises(ValidationError):
        GainParams(r=-1.0)
    with pytest.raises(ValidationError):
        GainParams(G=0.5)
    with pytest.raises(ValidationError):
        Efficiency(0.0)


def test_quadrature_pdf_normalization_and_variance():
    x = np.linspace(-12, 12, 6001)
    for state, var in (
        (CVState.fock(0), 0.25),
        (CVState.fock(3), 7.0 / 4.0),
        (CVState.coherent(1.5), 0.25),
    ):
        pdf = state.quadrature_pdf(x)
        assert trapezoid(pdf, x) == pytest.approx(1.0, abs=1e-10)
        mean = trapezoid(x * pdf, x)
        assert mean == pytest.approx(state.quadrature_mean(), abs=1e-10)
        assert trapezoid(x * x * pdf, x) - mean**2 == pytest.approx(var, abs=1e-9)
        assert state.quadrature_var() == pytest.approx(var, abs=1e-15)


def test_husimi_normalization_and_axis_variance():
    x = np.linspace(-10, 10, 801)
    for state in (CVState.fock(2), CVState.coherent(1.0 + 0.5j)):
        q = state.husimi(x, x)
        mass = trapezoid(trapezoid(q, x, axis=1), x)
        assert mass == pytest.approx(1.0, abs=1e-9)
        marg = trapezoid(q, x, axis=1)
        mean = trapezoid(x * marg, x)
        var = trapezoid(x * x * marg, x) - mean**2
        assert var == pytest.approx(state.q_axis_var(), abs=1e-9)
        assert state.q_axis_var() == pytest.approx(state.quadrature_var() + 0.25, abs=1e-15)


# --- photon counting ------------------------------------------------------------

def test_unit_efficiency_is_identity():
    state = coherent_state(3.0)
    out = bernoulli_convolve(state, Efficiency(1.0))
    np.testing.assert_array_equal(out.rho_nn, state.rho_nn)


def test_fock_two_half_efficiency():
    out = bernoulli_convolve(fock_state(2), Efficiency(0.5))
    np.testing.assert_allclose(out.rho_nn, [0.25, 0.5, 0.25], atol=1e-14)


def test_thinned_poisson_stays_poisson():
    # brute-force the convolution sum independently at cutoff 60
    eta, nbar = 0.5, 4.0
    cutoff = 60
    rho = poisson.pmf(np.arange(cutoff + 1), nbar)
    brute = np.zeros(cutoff + 1)
    for n in range(cutoff + 1):
        for m in range(n + 1):
            brute[m] += rho[n] * math.comb(n, m) * eta**m * (1 - eta) ** (n - m)
    out = bernoulli_convolve(coherent_state(nbar), Efficiency(eta))
    np.testing.assert_allclose(out.rho_nn[: cutoff + 1], brute, atol=1e-12)
    np.testing.assert_allclose(
        out.rho_nn[:40], poisson.pmf(np.arange(40), eta * nbar), atol=1e-12
    )


def test_amplification_moves_mass():
    state = fock_state(3)
    assert amplify_photon_number(state, 1) is state
    amp = amplify_photon_number(state, 4)
    assert amp.rho_nn[12] == 1.0
    assert amp.rho_nn.sum() == 1.0
    mixed = coherent_state(2.0)
    amp5 = amplify_photon_number(mixed, 5)
    assert amp5.mean_photon() == pytest.approx(5.0 * mixed.mean_photon(), rel=1e-12)
    with pytest.raises(ResourceLimitError):
        amplify_photon_number(coherent_state(4.0), 10**6)


def test_photo_noise_hand_values():
    f5 = fock_state(5)
    report = photo_added_noise(f5, Efficiency(0.5), 1)
    assert report.estimator_mean == pytest.approx(5.0, abs=1e-9)
    assert report.estimator_variance == pytest.approx(5.0, abs=1e-9)
    report10 = photo_added_noise(f5, Efficiency(0.5), 10)
    assert report10.added_noise == pytest.approx(0.5, abs=1e-9)


def test_photo_noise_grid_and_unbiasedness():
    for state in (fock_state(5), coherent_state(4.0)):
        mean_in = state.mean_photon()
        var_in = state.photon_variance()
        for eta in (0.3, 0.5, 0.9):
            previous = None
            for g in (1, 2, 4, 10):
                report = photo_added_noise(state, Efficiency(eta), g)
                assert report.estimator_mean == pytest.approx(mean_in, abs=1e-9)
                want = var_in + (1 - eta) / (g * eta) * mean_in
                assert report.estimator_variance == pytest.approx(want, abs=1e-9)
                if previous is not None and eta < 1.0:
                    assert report.added_noise < previous
                previous = report.added_noise


def test_photo_noise_purification_limit():
    for state in (fock_state(5), coherent_state(4.0)):
        base = photo_added_noise(state, Efficiency(0.5), 1).added_noise
        tiny = photo_added_noise(state, Efficiency(0.5), 1000).added_noise
        assert tiny <= 1e-3 * base + 1e-12


# --- homodyne -------------------------------------------------------------------

def test_homodyne_ideal_detector():
    res = homodyne_pdf(CVState.coherent(2.0), Efficiency(1.0), r=0.0)
    assert res.variance == pytest.approx(0.25, abs=1e-9)
    assert res.mean == pytest.approx(2.0, abs=1e-9)
    assert res.added_noise == pytest.approx(0.0, abs=1e-9)
    assert trapezoid(res.pdf, res.x) == pytest.approx(1.0, abs=1e-9)


def test_homodyne_added_noise_values():
    res = homodyne_pdf(CVState.coherent(2.0), Efficiency(0.5), r=0.0)
    assert res.added_noise == pytest.approx(0.25, abs=1e-8)
    res = homodyne_pdf(CVState.fock(3), Efficiency(0.5), r=math.log(10.0))
    assert res.added_noise == pytest.approx(0.0025, abs=1e-8)
    assert res.variance == pytest.approx(7.0 / 4.0 + 0.0025, abs=1e-7)


def test_homodyne_raw_statistics():
    r = 0.8
    res = homodyne_pdf(CVState.coherent(1.0), Efficiency(0.5), r=r, rescaled=False)
    # raw outcomes see the stretched signal plus the unscaled blur
    assert res.mean == pytest.approx(math.exp(r) * 1.0, abs=1e-8)
    assert res.variance == pytest.approx(math.exp(2 * r) * 0.25 + 0.25, abs=1e-7)
    assert res.added_noise == pytest.approx(0.25, abs=1e-7)


def test_homodyne_added_noise_decreases_in_squeeze():
    values = [
        homodyne_pdf(CVState.coherent(1.0), Efficiency(0.5), r=r).added_noise
        for r in (0.0, 0.5, 1.0, 2.0, 3.0)
    ]
    assert all(b < a for a, b in zip(values, values[1:]))
    # attenuation at r=3 is exactly e^{-6} ~ 2.5e-3 of the unsqueezed value
    assert values[-1] == pytest.approx(math.exp(-6.0) * values[0], rel=1e-5)


def test_homodyne_grid_coverage_error():
    grid = np.linspace(-0.5, 0.5, 64)
    with pytest.raises(GridCoverageError):
        homodyne_pdf(CVState.coherent(2.0), Efficiency(0.5), r=0.0, x_grid=grid)


def test_homodyne_phase_selects_quadrature():
    state = CVState.coherent(2.0)
    res = homodyne_pdf(state, Efficiency(1.0), r=0.0, phi=math.pi / 2)
    assert res.mean == pytest.approx(0.0, abs=1e-9)


# --- heterodyne ------------------------------------------------------------------

def test_heterodyne_ideal_coherent():
    res = heterodyne_pdf(CVState.coherent(2.0 + 1.0j), Efficiency(1.0), G=1.0)
    assert res.mean.real == pytest.approx(2.0, abs=1e-8)
    assert res.mean.imag == pytest.approx(1.0, abs=1e-8)
    # intrinsic 1/4 plus the 1/4 joint-measurement penalty
    assert res.variance_x == pytest.approx(0.5, abs=1e-8)
    assert res.variance_y == pytest.approx(0.5, abs=1e-8)


def test_heterodyne_excess_values():
    res = heterodyne_pdf(CVState.coherent(2.0), Efficiency(0.5), G=1.0)
    assert res.excess_x == pytest.approx(0.25, abs=1e-8)
    res = heterodyne_pdf(CVState.fock(3), Efficiency(0.5), G=100.0)
    assert res.excess_x == pytest.approx(0.0025, abs=1e-8)
    assert res.variance_x == pytest.approx(7.0 / 4.0 + 0.25 + 0.0025, abs=1e-7)


def test_heterodyne_excess_decreases_in_gain():
    values = [
        heterodyne_pdf(CVState.coherent(1.0), Efficiency(0.5), G=G).excess_x
        for G in (1.0, 10.0, 100.0, 1000.0)
    ]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] <= 1e-3 * values[0] + 1e-9


def test_heterodyne_grid_coverage_error():
    grid = np.linspace(-0.5, 0.5, 64)
    with pytest.raises((GridCoverageError, ValidationError)):
        heterodyne_pdf(CVState.coherent(2.0), Efficiency(0.5), G=1.0, x_grid=grid, y_grid=grid)
