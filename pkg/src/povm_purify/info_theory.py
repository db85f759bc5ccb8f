"""Mutual information between state parameters and measurement counts.

Covers the continuous polar-angle alphabet (numeric quadrature and an
equivalent closed form), the two-state alphabet, majority-voting
post-processing, and the d-letter multinomial generalization.  All values
are in bits.
"""

from __future__ import annotations

import functools
import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .measurement import (
    EXACT_COMB_MAX,
    IsotropicNoise,
    QuditNoise,
    binom_coefficients,
    count_probs,
    count_distribution,
    signal_weights,
)

__all__ = [
    "QuadratureRule",
    "MutualInfoResult",
    "gauss_legendre_rule",
    "marginal_count_prob",
    "mutual_info_quadrature",
    "mutual_info_closed_form",
    "binary_mutual_info",
    "majority_vote_mutual_info",
    "qudit_mutual_info",
    "ideal_mutual_info",
    "binary_entropy",
]

LN2 = math.log(2.0)

DEFAULT_QUADRATURE_NODES = 256

# Enumerating the d-letter outcome simplex is refused beyond this many terms.
MAX_QUDIT_TERMS = 10**7


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integrals over the polar angle theta in [0, pi].

    The rule must integrate the uniform prior measure exactly:
    sum(weights * sin(nodes)) = 2 within 1e-10.
    """

    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValidationError("nodes and weights must be 1-d arrays of equal length")
        if np.any(nodes < 0.0) or np.any(nodes > math.pi):
            raise ValidationError("nodes must lie in [0, pi]")
        measure = float(np.sum(weights * np.sin(nodes)))
        if abs(measure - 2.0) > 1e-10:
            raise ValidationError(
                f"rule integrates sin(theta) to {measure!r}, not 2 within 1e-10"
            )


@dataclass(frozen=True)
class MutualInfoResult:
    """A mutual-information value together with how it was obtained."""

    value_bits: float
    method: str
    m_uses: int
    noise: float
    alphabet: int = 2
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.value_bits < -1e-12:
            raise ValidationError(f"value_bits={self.value_bits!r} is negative")
        if self.method in ("binary", "majority", "qudit"):
            cap = math.log2(self.alphabet)
            if self.value_bits > cap + 1e-9:
                raise ValidationError(
                    f"value_bits={self.value_bits!r} exceeds log2(d)={cap!r}"
                )


@functools.lru_cache(maxsize=32)
def gauss_legendre_rule(n_nodes: int = DEFAULT_QUADRATURE_NODES) -> QuadratureRule:
    """Gauss-Legendre rule mapped from [-1, 1] onto [0, pi]."""
    if n_nodes < 2:
        raise ValidationError(f"n_nodes={n_nodes!r} violates n_nodes >= 2")
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    return QuadratureRule(nodes=0.5 * math.pi * (x + 1.0), weights=0.5 * math.pi * w)


def marginal_count_prob(noise: IsotropicNoise, M: int, M1: int) -> float:
    """Probability of count ``M1`` under the uniform prior over the sphere.

    Equals (1/2) C(M, M1) ((1-b)^M0 b^M1 + (1-b)^M1 b^M0); the 1/2 is the
    prior density carried by the polar-angle measure.
    """
    if not 0 <= M1 <= M:
        raise ValidationError(f"M1={M1!r} violates 0 <= M1 <= M={M}")
    comb = binom_coefficients(M)
    u, v = signal_weights(noise.beta, M)
    return float(0.5 * comb[M1] * (u[M1] + v[M1]))


def _marginal_vector(noise: IsotropicNoise, M: int) -> np.ndarray:
    comb = binom_coefficients(M)
    u, v = signal_weights(noise.beta, M)
    return 0.5 * comb * (u + v)


def _quadrature_value(noise: IsotropicNoise, M: int, rule: QuadratureRule) -> float:
    t = np.cos(rule.nodes / 2.0) ** 2
    p = count_probs(noise, t, M)  # (nodes, M+1)
    q = _marginal_vector(noise, M)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log2(p / q), 0.0)
    integrand = terms.sum(axis=1)
    return float(0.5 * np.sum(rule.weights * np.sin(rule.nodes) * integrand))


def mutual_info_quadrature(
    noise: IsotropicNoise,
    M: int,
    rule: QuadratureRule | None = None,
    verify: bool = True,
) -> MutualInfoResult:
    """Mutual information between the polar angle and the count, by quadrature.

    Parameters
    ----------
    noise : IsotropicNoise
        POVM noise strength.
    M : int
        Number of POVM uses.
    rule : QuadratureRule, optional
        Defaults to Gauss-Legendre with 256 nodes on [0, pi].
    verify : bool
        When using the default rule, re-evaluate with twice the nodes and
        warn if the two values differ by more than 1e-9.

    Returns
    -------
    MutualInfoResult
        Method ``"quadrature"``.
    """
    if M < 1:
        raise ValidationError(f"M={M!r} violates M >= 1")
    doubled = None
    if rule is None:
        rule = gauss_legendre_rule(DEFAULT_QUADRATURE_NODES)
        if verify:
            doubled = gauss_legendre_rule(2 * DEFAULT_QUADRATURE_NODES)
    value = _quadrature_value(noise, M, rule)
    notes = ()
    if doubled is not None:
        drift = abs(value - _quadrature_value(noise, M, doubled))
        if drift > 1e-9:
            warnings.warn(
                f"quadrature not converged: doubling nodes moves the value by {drift:.3g}",
                stacklevel=2,
            )
            notes = (f"node-doubling drift {drift:.3g}",)
    return MutualInfoResult(
        value_bits=max(value, 0.0),
        method="quadrature",
        m_uses=M,
        noise=noise.beta,
        notes=notes,
    )


def mutual_info_closed_form(noise: IsotropicNoise, M: int) -> MutualInfoResult:
    """Closed-form evaluation of the polar-angle mutual information.

    Algebraically equivalent to the quadrature definition for
    0 < beta < 1/2; kept as an independent cross-check.  Products of large
    powers are evaluated in log space.  The count M1 = M/2 (even M) makes
    both the numerator and denominator of its term vanish; the limiting
    contribution is zero and the term is skipped, which is recorded in the
    result notes.
    """
    if M < 1:
        raise ValidationError(f"M={M!r} violates M >= 1")
    beta = noise.beta
    if not 0.0 < beta < 0.5:
        raise ValidationError(
            f"beta={beta!r}: closed form is singular at the endpoints 0 and 1/2"
        )
    l1b = math.log1p(-beta)
    lb = math.log(beta)
    use_exact_comb = M <= EXACT_COMB_MAX
    total = 0.0
    skipped: list[str] = []
    for M1 in range(M + 1):
        if 2 * M1 == M:
            skipped.append(f"term M1={M1} skipped (vanishing denominator, zero limit)")
            continue
        # denominator (1-b)^(M+M1) b^(3 M1) - (1-b)^(3 M1) b^(M+M1), signed, in logs
        log_pos = (M + M1) * l1b + 3 * M1 * lb
        log_neg = 3 * M1 * l1b + (M + M1) * lb
        hi, lo = max(log_pos, log_neg), min(log_pos, log_neg)
        log_den = hi + math.log1p(-math.exp(lo - hi))
        sign = 1.0 if log_pos > log_neg else -1.0
        log_c1 = 2 * M * l1b + 4 * M1 * lb
        log_c2 = 4 * M1 * l1b + 2 * M * lb
        log_sum = np.logaddexp(2 * M1 * l1b + M * lb, M * l1b + 2 * M1 * lb)
        a_term = -16.0 * log_sum / LN2 + 8.0 * log_c1 / LN2 + 16.0 - 8.0 / LN2
        b_term = 16.0 * log_sum / LN2 - 8.0 * log_c2 / LN2 - 16.0 + 8.0 / LN2
        if use_exact_comb:
            comb = float(math.comb(M, M1))
            total += comb * sign * (
                math.exp(log_c1 - log_den) * a_term + math.exp(log_c2 - log_den) * b_term
            )
        else:
            log_comb = math.lgamma(M + 1) - math.lgamma(M1 + 1) - math.lgamma(M - M1 + 1)
            total += sign * (
                math.exp(log_comb + log_c1 - log_den) * a_term
                + math.exp(log_comb + log_c2 - log_den) * b_term
            )
    return MutualInfoResult(
        value_bits=float(total) / 32.0,
        method="closed_form",
        m_uses=M,
        noise=beta,
        notes=tuple(skipped),
    )


def binary_entropy(p: float) -> float:
    """Shannon entropy of a coin with bias ``p``, in bits."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p={p!r} violates 0 <= p <= 1")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def binary_mutual_info(noise: IsotropicNoise, M: int) -> MutualInfoResult:
    """Mutual information for the two-pole alphabet {theta=0, theta=pi}.

    Both letters are equiprobable and the full count M1 is retained, so this
    is the information ceiling for any post-processing of the M outcomes.
    """
    if M < 1:
        raise ValidationError(f"M={M!r} violates M >= 1")
    p_down = count_probs(noise, 0.0, M)  # counts given theta = pi
    p_up = p_down[::-1]  # counts given theta = 0, by mirror symmetry
    q = 0.5 * (p_down + p_up)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p_down > 0.0, p_down * np.log2(p_down / q), 0.0)
    return MutualInfoResult(
        value_bits=float(terms.sum()),
        method="binary",
        m_uses=M,
        noise=noise.beta,
    )


def majority_vote_mutual_info(
    noise: IsotropicNoise, M: int, tie_rule: str = "odd_only"
) -> MutualInfoResult:
    """Mutual information after reducing the M outcomes to a majority vote.

    The vote turns the M noisy outcomes into a binary symmetric channel whose
    crossover is the probability that more than half the individual outcomes
    flip.  With ``tie_rule="odd_only"`` an even M is rejected; with
    ``"random_tie"`` the tied count splits its mass evenly.
    """
    if M < 1:
        raise ValidationError(f"M={M!r} violates M >= 1")
    if tie_rule not in ("odd_only", "random_tie"):
        raise ValidationError(f"tie_rule={tie_rule!r} not in {{odd_only, random_tie}}")
    if tie_rule == "odd_only" and M % 2 == 0:
        raise ValidationError(f"M={M} is even; majority voting needs odd M under odd_only")
    # For a definite basis state each outcome flips independently with
    # probability beta, so the flip count is Binomial(M, beta).
    flip_pmf = count_probs(noise, 1.0, M)
    epsilon = float(flip_pmf[np.arange(M + 1) > M / 2].sum())
    if M % 2 == 0:
        epsilon += 0.5 * float(flip_pmf[M // 2])
    return MutualInfoResult(
        value_bits=1.0 - binary_entropy(epsilon),
        method="majority",
        m_uses=M,
        noise=noise.beta,
        notes=(f"crossover {epsilon!r}",),
    )


def _compositions(M: int, d: int):
    """All outcome count vectors (M_1, ..., M_d) summing to M."""
    for bars in itertools.combinations(range(M + d - 1), d - 1):
        edges = (-1,) + bars + (M + d - 1,)
        yield np.diff(edges) - 1


def qudit_mutual_info(noise: QuditNoise, M: int) -> MutualInfoResult:
    """Mutual information between a uniform d-letter input and the count vector.

    Enumerates every multinomial outcome exactly; refuses when the simplex
    holds more than ``MAX_QUDIT_TERMS`` count vectors.
    """
    if M < 1:
        raise ValidationError(f"M={M!r} violates M >= 1")
    d = noise.d
    n_terms = math.comb(M + d - 1, d - 1)
    if n_terms > MAX_QUDIT_TERMS:
        raise ResourceLimitError(
            f"enumeration needs {n_terms} count vectors, above the {MAX_QUDIT_TERMS} bound"
        )
    hit = (d - 1) * noise.alpha + 1.0
    miss = 1.0 - noise.alpha
    log_hit = math.log(hit)
    log_miss = math.log(miss) if miss > 0.0 else -np.inf
    log_d = math.log(d)
    contributions = []
    for counts in _compositions(M, d):
        log_mult = math.lgamma(M + 1) - sum(math.lgamma(int(c) + 1) for c in counts)
        with np.errstate(invalid="ignore"):
            log_p = log_mult - M * log_d + counts * log_hit + (M - counts) * log_miss
        log_p = np.where(counts == M, log_mult - M * log_d + counts * log_hit, log_p)
        p_j = np.exp(log_p)  # p(counts | j) for j = 1..d
        q = p_j.mean()
        if q <= 0.0:
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(p_j > 0.0, p_j * np.log2(p_j / q), 0.0)
        contributions.append(terms.sum() / d)
    return MutualInfoResult(
        value_bits=max(math.fsum(contributions), 0.0),
        method="qudit",
        m_uses=M,
        noise=noise.alpha,
        alphabet=d,
    )


@functools.lru_cache(maxsize=1)
def ideal_mutual_info() -> float:
    """Mutual information of one ideal measurement (M=1, beta=0), in bits.

    Recomputed by node doubling until successive quadratures agree to 1e-11
    rather than hard-coded.
    """
    noise = IsotropicNoise(0.0)
    nodes = DEFAULT_QUADRATURE_NODES
    value = _quadrature_value(noise, 1, gauss_legendre_rule(nodes))
    while nodes <= 8192:
        nodes *= 2
        refined = _quadrature_value(noise, 1, gauss_legendre_rule(nodes))
        if abs(refined - value) < 1e-11:
            return refined
        value = refined
    raise ValidationError("ideal-value quadrature failed to stabilize to 1e-11")
