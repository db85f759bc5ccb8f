import math
from fractions import Fraction

import numpy as np
import pytest

from povm_purify import (
    CloneCount,
    CountDistribution,
    IsotropicNoise,
    QubitParam,
    QuditNoise,
    ValidationError,
    conditional_prob,
    conditional_prob_theta,
    count_distribution,
    qudit_conditional_prob,
    sample_counts,
)
from povm_purify.measurement import count_probs

BETA_GRID = [0.0, 0.1, 0.25, 0.4, 0.5]
A_GRID = [0.0, 0.25, 0.5, 0.75, 1.0]
M_GRID = [1, 2, 3, 5, 10, 17, 30]


def exact_prob(beta, a, M, M1):
    """Rational-arithmetic oracle for the count probability."""
    b = Fraction(beta).limit_denominator(10**6)
    a = Fraction(a).limit_denominator(10**6)
    M0 = M - M1
    u = (1 - b) ** M0 * b**M1
    v = (1 - b) ** M1 * b**M0
    return float(math.comb(M, M1) * (a * u + (1 - a) * v))


def test_ideal_noise_concentrates_on_endpoints():
    noise = IsotropicNoise(0.0)
    for M in (1, 4, 9):
        assert conditional_prob(noise, 0.3, CloneCount(M, 0)) == pytest.approx(0.3, abs=1e-15)
        assert conditional_prob(noise, 0.3, CloneCount(M, M)) == pytest.approx(0.7, abs=1e-15)
        for M1 in range(1, M):
            assert conditional_prob(noise, 0.3, CloneCount(M, M1)) == 0.0


def test_pure_noise_is_a_fair_binomial():
    noise = IsotropicNoise(0.5)
    for a in (0.0, 0.33, 1.0):
        for M1 in range(6):
            expected = math.comb(5, M1) * 0.5**5
            assert conditional_prob(noise, a, CloneCount(5, M1)) == pytest.approx(expected, abs=1e-15)


def test_hand_example_quarter_noise():
    noise = IsotropicNoise(0.25)
    assert conditional_prob(noise, 0.75, CloneCount(1, 0)) == pytest.approx(0.625, abs=1e-15)
    assert conditional_prob(noise, 0.75, CloneCount(1, 1)) == pytest.approx(0.375, abs=1e-15)


def test_domain_errors():
    noise = IsotropicNoise(0.25)
    with pytest.raises(ValidationError):
        conditional_prob(noise, 1.2, CloneCount(3, 1))
    with pytest.raises(ValidationError):
        CloneCount(3, 4)
    with pytest.raises(ValidationError):
        IsotropicNoise(0.7)
    with pytest.raises(ValidationError):
        IsotropicNoise(-0.1)


def test_theta_parametrization_matches_population():
    noise = IsotropicNoise(0.25)
    count = CloneCount(4, 1)
    assert conditional_prob_theta(noise, 0.0, count) == conditional_prob(noise, 1.0, count)
    assert conditional_prob_theta(noise, math.pi / 2, count) == pytest.approx(
        conditional_prob(noise, 0.5, count), abs=1e-15
    )
    assert conditional_prob_theta(noise, math.pi / 2, CloneCount(2, 1)) == pytest.approx(
        0.375, abs=1e-15
    )
    with pytest.raises(ValidationError):
        conditional_prob_theta(noise, -0.1, count)


def test_count_distribution_examples():
    d = count_distribution(IsotropicNoise(0.0), 0.75, 3)
    np.testing.assert_allclose(d.probs, [0.75, 0.0, 0.0, 0.25], atol=1e-15)
    d = count_distribution(IsotropicNoise(0.5), 0.123, 2)
    np.testing.assert_allclose(d.probs, [0.25, 0.5, 0.25], atol=1e-15)


@pytest.mark.parametrize("beta", BETA_GRID)
@pytest.mark.parametrize("M", M_GRID)
def test_normalization_on_grid(beta, M):
    noise = IsotropicNoise(beta)
    for a in A_GRID:
        assert abs(count_distribution(noise, a, M).probs.sum() - 1.0) < 1e-12


@pytest.mark.parametrize("beta", [0.1, 0.25, 0.4])
@pytest.mark.parametrize("M", [1, 5, 12])
def test_probability_is_affine_in_a(beta, M):
    noise = IsotropicNoise(beta)
    h = 0.125
    for a in (0.25, 0.5, 0.625):
        lo = count_probs(noise, a - h, M)
        mid = count_probs(noise, a, M)
        hi = count_probs(noise, a + h, M)
        assert np.abs(hi - 2 * mid + lo).max() < 1e-12


@pytest.mark.parametrize("beta", [0.1, 0.25, 0.4])
@pytest.mark.parametrize("M", [1, 4, 11])
def test_mirror_symmetry(beta, M):
    noise = IsotropicNoise(beta)
    for a in A_GRID:
        left = count_probs(noise, a, M)
        right = count_probs(noise, 1.0 - a, M)[::-1]
        np.testing.assert_allclose(left, right, atol=1e-14)


def test_matches_rational_oracle():
    for beta in (0.1, 0.25):
        for M in (3, 7):
            for M1 in range(M + 1):
                got = conditional_prob(IsotropicNoise(beta), 0.6, CloneCount(M, M1))
                assert got == pytest.approx(exact_prob(beta, 0.6, M, M1), rel=1e-12)


def test_log_domain_branch_agrees_with_exact_integers():
    # above the exact-integer threshold the lgamma path takes over
    M = 80
    noise = IsotropicNoise(0.25)
    probs = count_probs(noise, 0.7, M)
    assert abs(probs.sum() - 1.0) < 1e-12
    for M1 in (0, 10, 40, 79):
        direct = math.comb(M, M1) * (
            0.7 * 0.75 ** (M - M1) * 0.25**M1 + 0.3 * 0.75**M1 * 0.25 ** (M - M1)
        )
        assert probs[M1] == pytest.approx(direct, rel=1e-10)


def test_qubit_param_links_population_and_angle():
    q = QubitParam.from_population(0.75)
    assert q.theta == pytest.approx(math.pi / 3, abs=1e-12)
    q2 = QubitParam.from_angles(math.pi / 2, phi=1.0)
    assert q2.a == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValidationError):
        QubitParam(a=0.9, theta=math.pi / 2)


def test_sampler_degenerate_distribution():
    dist = CountDistribution(M=3, probs=np.array([1.0, 0.0, 0.0, 0.0]))
    assert np.all(sample_counts(dist, 100, seed=5) == 0)


def test_sampler_is_deterministic_and_stream_split():
    dist = count_distribution(IsotropicNoise(0.25), 0.75, 10)
    first = sample_counts(dist, 1000, seed=11)
    second = sample_counts(dist, 1000, seed=11)
    np.testing.assert_array_equal(first, second)
    other_stream = sample_counts(dist, 1000, seed=11, stream=1)
    assert not np.array_equal(first, other_stream)


def test_sampler_frequencies_match_distribution():
    dist = count_distribution(IsotropicNoise(0.25), 0.75, 6)
    n = 10**6
    samples = sample_counts(dist, n, seed=7)
    freqs = np.bincount(samples, minlength=7) / n
    tol = 4.0 * np.sqrt(dist.probs * (1.0 - dist.probs) / n)
    assert np.all(np.abs(freqs - dist.probs) <= tol + 1e-12)


def test_qudit_reduces_to_qubit_at_poles():
    # d=2 with alpha = 1 - 2*beta is the two-outcome model at a in {0, 1}
    for beta in (0.1, 0.25, 0.4):
        noise2 = QuditNoise(d=2, alpha=1.0 - 2.0 * beta)
        qubit = IsotropicNoise(beta)
        for M in (1, 4, 9):
            for M1 in range(M + 1):
                # letter 1 plays the role of outcome 0, so its count is M0
                got = qudit_conditional_prob(noise2, 1, [M - M1, M1])
                want = conditional_prob(qubit, 1.0, CloneCount(M, M1))
                assert got == pytest.approx(want, rel=1e-12, abs=1e-300)
                got = qudit_conditional_prob(noise2, 2, [M - M1, M1])
                want = conditional_prob(qubit, 0.0, CloneCount(M, M1))
                assert got == pytest.approx(want, rel=1e-12, abs=1e-300)


def test_qudit_alpha_zero_is_uniform():
    noise = QuditNoise(d=3, alpha=0.0)
    for counts in ([4, 0, 0], [2, 1, 1], [0, 2, 2]):
        base = qudit_conditional_prob(noise, 1, counts)
        for j in (2, 3):
            assert qudit_conditional_prob(noise, j, counts) == pytest.approx(base, rel=1e-14)


def test_qudit_enumeration_normalizes():
    from itertools import combinations

    noise = QuditNoise(d=3, alpha=0.5)
    M = 4
    total = 0.0
    for bars in combinations(range(M + 2), 2):
        counts = np.diff((-1,) + bars + (M + 2,)) - 1
        total += qudit_conditional_prob(noise, 2, counts)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_qudit_malformed_counts():
    noise = QuditNoise(d=3, alpha=0.5)
    with pytest.raises(ValidationError):
        qudit_conditional_prob(noise, 1, [1, 2])
    with pytest.raises(ValidationError):
        qudit_conditional_prob(noise, 4, [1, 2, 1])
    with pytest.raises(ValidationError):
        qudit_conditional_prob(noise, 1, [1, -1, 2])
