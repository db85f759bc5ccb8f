"""Outcome statistics for repeated noisy projective measurements on a cloned qubit.

A single qubit diagonal ``diag(a, 1-a)`` is cloned onto M systems in the
measurement basis and each copy is measured with a depolarized two-outcome
POVM ``P'_i = (1 - 2*beta)|i><i| + beta*I``.  The count ``M1`` of outcome-1
results is a sufficient statistic; this module provides its exact
distribution, a deterministic sampler, and the d-level multinomial
generalization.

Because every noisy POVM element is diagonal in the cloning basis, a
coherence-preserving cloning map (one that also copies the off-diagonal
entries onto the M systems) produces exactly the same count statistics; the
cloner is therefore treated purely as the probability map above, and the
off-diagonal entry of the input state never enters any formula here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "IsotropicNoise",
    "QubitParam",
    "CloneCount",
    "CountDistribution",
    "QuditNoise",
    "conditional_prob",
    "conditional_prob_theta",
    "count_distribution",
    "sample_counts",
    "qudit_conditional_prob",
]

# Binomial/multinomial coefficients are kept as exact integers up to this
# number of POVM uses; beyond it everything moves to log space.
EXACT_COMB_MAX = 64


@dataclass(frozen=True)
class IsotropicNoise:
    """Depolarizing strength ``beta`` of a two-outcome qubit POVM.

    The noisy element is ``(1 - 2*beta)|i><i| + beta*I``; ``beta = 0`` is the
    ideal projective measurement and ``beta = 1/2`` is pure noise.
    """

    beta: float

    def __post_init__(self):
        if not 0.0 <= self.beta <= 0.5:
            raise ValidationError(
                f"beta={self.beta!r} violates 0 <= beta <= 1/2"
            )

    @property
    def alpha(self) -> float:
        """Weight 1 - 2*beta of the projective part; lies in [0, 1]."""
        return 1.0 - 2.0 * self.beta


@dataclass(frozen=True)
class QubitParam:
    """Qubit state description: population ``a`` of |0>, Bloch angles, coherence.

    ``a`` and ``theta`` are linked by ``a = cos^2(theta/2)``.  The off-diagonal
    element ``b`` is carried for completeness but never enters any outcome
    probability (cloning in the measurement basis destroys it).
    """

    a: float
    theta: float
    phi: float = 0.0
    b: complex = 0.0

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValidationError(f"a={self.a!r} violates 0 <= a <= 1")
        if not 0.0 <= self.theta <= math.pi:
            raise ValidationError(f"theta={self.theta!r} violates 0 <= theta <= pi")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValidationError(f"phi={self.phi!r} violates 0 <= phi < 2*pi")
        if abs(self.a - math.cos(self.theta / 2.0) ** 2) > 1e-9:
            raise ValidationError(
                f"a={self.a!r} and theta={self.theta!r} violate a = cos^2(theta/2)"
            )

    @classmethod
    def from_population(cls, a: float, phi: float = 0.0, b: complex = 0.0) -> "QubitParam":
        if not 0.0 <= a <= 1.0:
            raise ValidationError(f"a={a!r} violates 0 <= a <= 1")
        return cls(a=a, theta=2.0 * math.acos(math.sqrt(a)), phi=phi, b=b)

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0, b: complex = 0.0) -> "QubitParam":
        if not 0.0 <= theta <= math.pi:
            raise ValidationError(f"theta={theta!r} violates 0 <= theta <= pi")
        return cls(a=math.cos(theta / 2.0) ** 2, theta=theta, phi=phi, b=b)


@dataclass(frozen=True)
class CloneCount:
    """Number of POVM uses ``M`` and observed count ``M1`` of outcome 1."""

    M: int
    M1: int

    def __post_init__(self):
        if self.M < 1:
            raise ValidationError(f"M={self.M!r} violates M >= 1")
        if not 0 <= self.M1 <= self.M:
            raise ValidationError(f"M1={self.M1!r} violates 0 <= M1 <= M={self.M}")

    @property
    def M0(self) -> int:
        return self.M - self.M1


@dataclass(frozen=True)
class CountDistribution:
    """Probability vector over the count M1 = 0..M."""

    M: int
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (self.M + 1,):
            raise ValidationError(
                f"probs has shape {probs.shape}, expected ({self.M + 1},)"
            )
        if np.any(probs < -1e-15) or np.any(probs > 1.0 + 1e-12):
            raise ValidationError("probabilities must lie in [0, 1]")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"probabilities sum to {total!r}, not 1 within 1e-12")


@dataclass(frozen=True)
class QuditNoise:
    """Depolarizing strength for a d-outcome POVM: ``alpha|i><i| + (1-alpha)/d I``."""

    d: int
    alpha: float

    def __post_init__(self):
        if self.d < 2:
            raise ValidationError(f"d={self.d!r} violates d >= 2")
        # Positivity allows alpha down to -1/(d-1); only the purifiable
        # branch 0 <= alpha <= 1 is supported here.
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha={self.alpha!r} violates 0 <= alpha <= 1")


def _log_binom(M: int, k: int) -> float:
    return math.lgamma(M + 1) - math.lgamma(k + 1) - math.lgamma(M - k + 1)


def binom_coefficients(M: int) -> np.ndarray:
    """Row of binomial coefficients C(M, 0..M) as floats.

    Exact integer arithmetic up to ``EXACT_COMB_MAX`` uses, log-domain
    exponentials beyond.
    """
    if M <= EXACT_COMB_MAX:
        return np.array([float(math.comb(M, k)) for k in range(M + 1)])
    ks = np.arange(M + 1)
    return np.exp([_log_binom(M, int(k)) for k in ks])


def signal_weights(beta: float, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-count weights u, v with u[M1] = (1-beta)^M0 beta^M1 and v its mirror.

    The count distribution is ``C(M, M1) * (a*u + (1-a)*v)`` and the score
    with respect to ``a`` only involves the ratio (u-v)/(a*u + (1-a)*v).
    """
    m1 = np.arange(M + 1, dtype=float)
    m0 = M - m1
    if M <= EXACT_COMB_MAX:
        u = (1.0 - beta) ** m0 * beta ** m1
        return u, u[::-1].copy()
    log_b = math.log(beta) if beta > 0.0 else -np.inf
    log_1b = math.log1p(-beta)
    with np.errstate(invalid="ignore"):
        log_u = m0 * log_1b + m1 * log_b
    log_u[m1 == 0] = m0[m1 == 0] * log_1b  # 0*log(0) := 0 at the endpoint
    u = np.exp(log_u)
    return u, u[::-1].copy()


def count_probs(noise: IsotropicNoise, a, M: int) -> np.ndarray:
    """Count distribution rows for one or many populations ``a``.

    Returns shape (M+1,) for scalar ``a`` and (len(a), M+1) otherwise.
    """
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr < 0.0) or np.any(a_arr > 1.0):
        raise ValidationError("a violates 0 <= a <= 1")
    comb = binom_coefficients(M)
    u, v = signal_weights(noise.beta, M)
    # a*u + (1-a)*v, never the cancellation-prone a*(u-v) + v
    p = comb * (a_arr[..., None] * u + (1.0 - a_arr)[..., None] * v)
    if M > EXACT_COMB_MAX:
        # exp(lgamma) carries ~1e-13 relative error; renormalize the row sum
        p /= p.sum(axis=-1, keepdims=True)
    return p


def conditional_prob(noise: IsotropicNoise, a: float, count: CloneCount) -> float:
    """Probability of observing ``count.M1`` ones in M noisy measurements.

    Parameters
    ----------
    noise : IsotropicNoise
        POVM noise strength.
    a : float
        Population of |0> in the input qubit, 0 <= a <= 1.
    count : CloneCount
        Number of uses M and the outcome count M1.

    Returns
    -------
    float
        C(M, M1) * [a*((1-b)^M0 b^M1 - (1-b)^M1 b^M0) + (1-b)^M1 b^M0].
    """
    if not 0.0 <= a <= 1.0:
        raise ValidationError(f"a={a!r} violates 0 <= a <= 1")
    M, M1, M0 = count.M, count.M1, count.M0
    beta = noise.beta
    if M <= EXACT_COMB_MAX:
        comb = float(math.comb(M, M1))
        u = (1.0 - beta) ** M0 * beta ** M1
        v = (1.0 - beta) ** M1 * beta ** M0
        return comb * (a * u + (1.0 - a) * v)
    return float(count_probs(noise, a, M)[M1])


def conditional_prob_theta(noise: IsotropicNoise, theta: float, count: CloneCount) -> float:
    """Same as :func:`conditional_prob` with ``a = cos^2(theta/2)``."""
    if not 0.0 <= theta <= math.pi:
        raise ValidationError(f"theta={theta!r} violates 0 <= theta <= pi")
    return conditional_prob(noise, math.cos(theta / 2.0) ** 2, count)


def count_distribution(noise: IsotropicNoise, a: float, M: int) -> CountDistribution:
    """Exact distribution of the count M1 over 0..M for population ``a``."""
    if M < 1:
        raise ValidationError(f"M={M!r} violates M >= 1")
    if not 0.0 <= a <= 1.0:
        raise ValidationError(f"a={a!r} violates 0 <= a <= 1")
    return CountDistribution(M=M, probs=count_probs(noise, a, M))


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for (seed, stream); distinct streams never overlap.

    Parallel workers must take distinct stream indices rather than sharing
    one generator.
    """
    if not 0 <= seed < 2**64:
        raise ValidationError(f"seed={seed!r} violates 0 <= seed < 2**64")
    if not 0 <= stream < 2**64:
        raise ValidationError(f"stream={stream!r} violates 0 <= stream < 2**64")
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_counts(dist: CountDistribution, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """Draw ``n`` i.i.d. counts from ``dist`` by inverse CDF.

    Identical (dist, n, seed, stream) always reproduces the same vector.
    """
    if n < 1:
        raise ValidationError(f"n={n!r} violates n >= 1")
    rng = rng_stream(seed, stream)
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0  # guard against cumulative rounding at the top bin
    uniforms = rng.random(n)
    return np.searchsorted(cdf, uniforms, side="right").astype(np.int64)


def _log_multinom(counts: np.ndarray) -> float:
    M = int(counts.sum())
    return math.lgamma(M + 1) - sum(math.lgamma(int(c) + 1) for c in counts)


def qudit_conditional_prob(noise: QuditNoise, j: int, counts) -> float:
    """Multinomial probability of an outcome count vector given input letter ``j``.

    Parameters
    ----------
    noise : QuditNoise
        Dimension d and depolarizing weight alpha.
    j : int
        Input letter, 1-based in 1..d.
    counts : sequence of int
        Outcome counts (M_1, ..., M_d), one entry per letter, summing to M.

    Returns
    -------
    float
        M!/(M_1! ... M_d!) * [(d-1)*alpha + 1]^{M_j} * (1-alpha)^{M-M_j} / d^M.
    """
    counts = np.asarray(counts, dtype=np.int64)
    d = noise.d
    if counts.shape != (d,):
        raise ValidationError(f"counts has shape {counts.shape}, expected ({d},)")
    if np.any(counts < 0):
        raise ValidationError("counts must be nonnegative")
    if not 1 <= j <= d:
        raise ValidationError(f"j={j!r} violates 1 <= j <= d={d}")
    M = int(counts.sum())
    if M < 1:
        raise ValidationError("counts must sum to M >= 1")
    mj = int(counts[j - 1])
    hit = (d - 1) * noise.alpha + 1.0
    miss = 1.0 - noise.alpha
    if M <= EXACT_COMB_MAX:
        multinom = math.factorial(M)
        for c in counts:
            multinom //= math.factorial(int(c))
        return float(multinom) * hit**mj * miss ** (M - mj) / d**M
    log_miss = math.log(miss) if miss > 0.0 else -np.inf
    log_p = (
        _log_multinom(counts)
        + mj * math.log(hit)
        + ((M - mj) * log_miss if M > mj else 0.0)
        - M * math.log(d)
    )
    return float(np.exp(log_p))
