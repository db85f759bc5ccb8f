"""Inefficient photodetection, homodyne and heterodyne models with preamplification.

A detector of quantum efficiency eta sees the Bernoulli convolution of the
ideal photon statistics; an ideal photon-number amplifier of integer gain g
shrinks the resulting added noise by 1/g.  Homodyne outcomes are the ideal
quadrature distribution blurred by a Gaussian of variance (1-eta)/(4*eta),
tamed by pre-squeezing; heterodyne outcomes are the Husimi function blurred
by a circular Gaussian tamed by phase-insensitive gain.

Quadratures use X_phi = (a^dag e^{i phi} + a e^{-i phi})/2, so the vacuum
variance is 1/4 and the heterodyne joint-measurement penalty is an extra
1/4 per axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import binom as _binom
from scipy.stats import poisson as _poisson

from .errors import (
    GridCoverageError,
    NumericsError,
    ResourceLimitError,
    TailMassError,
    ValidationError,
)

__all__ = [
    "FockDistribution",
    "Efficiency",
    "GainParams",
    "CVState",
    "fock_state",
    "coherent_state",
    "bernoulli_convolve",
    "amplify_photon_number",
    "photo_added_noise",
    "homodyne_pdf",
    "heterodyne_pdf",
    "PhotoNoiseReport",
    "HomodyneResult",
    "HeterodyneResult",
]

DEFAULT_CUTOFF = 256
MAX_AMPLIFIED_CUTOFF = 10**7
ACCEPTED_TAIL_MASS = 1e-10

HOMODYNE_GRID_POINTS = 4096
HETERODYNE_GRID_POINTS = 512
GRID_HALF_WIDTH_SIGMAS = 8.0
# Minimum clearance (in total standard deviations) between the distribution
# mean and either grid edge; below this more than ~1e-8 of mass is off-grid.
MIN_EDGE_SIGMAS = 6.0

MOMENT_CHECK_TOL = 1e-9
GRID_CHECK_TOL = 1e-6


@dataclass(frozen=True)
class Efficiency:
    """Quantum efficiency eta: the fraction of photons that produce a count."""

    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValidationError(f"eta={self.eta!r} violates 0 < eta <= 1")


@dataclass(frozen=True)
class GainParams:
    """Preamplifier settings: photon-number gain g, squeeze r, power gain G."""

    g: int = 1
    r: float = 0.0
    G: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.g, (int, np.integer)) and self.g >= 1):
            raise ValidationError(f"g={self.g!r} violates integer g >= 1")
        if self.r < 0.0:
            raise ValidationError(f"r={self.r!r} violates r >= 0")
        if self.G < 1.0:
            raise ValidationError(f"G={self.G!r} violates G >= 1")


@dataclass(frozen=True)
class FockDistribution:
    """Diagonal photon-number populations truncated at ``cutoff``."""

    rho_nn: np.ndarray = field(repr=False)
    cutoff: int
    tail_mass: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.rho_nn, dtype=float)
        object.__setattr__(self, "rho_nn", rho)
        if rho.shape != (self.cutoff + 1,):
            raise ValidationError(
                f"rho_nn has shape {rho.shape}, expected ({self.cutoff + 1},)"
            )
        if np.any(rho < -1e-15):
            raise ValidationError("populations must be nonnegative")
        if self.tail_mass >= ACCEPTED_TAIL_MASS:
            raise TailMassError(
                f"tail mass {self.tail_mass!r} beyond cutoff {self.cutoff} exceeds "
                f"{ACCEPTED_TAIL_MASS}"
            )
        total = float(rho.sum()) + self.tail_mass
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"populations plus tail sum to {total!r}, not 1")

    def mean_photon(self) -> float:
        return float(np.dot(np.arange(self.cutoff + 1), self.rho_nn))

    def photon_variance(self) -> float:
        n = np.arange(self.cutoff + 1)
        mean = float(np.dot(n, self.rho_nn))
        return float(np.dot(n * n, self.rho_nn)) - mean * mean


def fock_state(n: int) -> FockDistribution:
    """Point photon-number distribution of the Fock state |n>."""
    if n < 0:
        raise ValidationError(f"n={n!r} violates n >= 0")
    rho = np.zeros(n + 1)
    rho[n] = 1.0
    return FockDistribution(rho_nn=rho, cutoff=n, tail_mass=0.0)


def coherent_state(mean_photon: float, cutoff: int | None = None) -> FockDistribution:
    """Poissonian photon-number distribution of a coherent state.

    The cutoff grows (doubling from 256) until the truncated tail is below
    the accepted bound.
    """
    if mean_photon < 0.0:
        raise ValidationError(f"mean_photon={mean_photon!r} violates mean_photon >= 0")
    grow = cutoff is None
    cutoff = DEFAULT_CUTOFF if cutoff is None else cutoff
    while True:
        tail = float(_poisson.sf(cutoff, mean_photon))
        if tail < ACCEPTED_TAIL_MASS:
            break
        if not grow:
            raise TailMassError(
                f"cutoff {cutoff} leaves Poisson tail {tail:.3g} above {ACCEPTED_TAIL_MASS}"
            )
        cutoff *= 2
    rho = _poisson.pmf(np.arange(cutoff + 1), mean_photon)
    # store the exact truncation remainder so the populations plus tail sum to 1
    return FockDistribution(rho_nn=rho, cutoff=cutoff, tail_mass=max(1.0 - float(rho.sum()), 0.0))


def _binom_row(n: int, eta: float, out: np.ndarray, weight: float) -> None:
    """Accumulate weight * Binomial(n, eta) into ``out`` over its support."""
    if n == 0:
        out[0] += weight
        return
    if n <= 4096:
        lo, hi = 0, n
    else:
        sigma = math.sqrt(n * eta * (1.0 - eta))
        center = n * eta
        lo = max(0, int(center - 60.0 * sigma) - 2)
        hi = min(n, int(center + 60.0 * sigma) + 2)
    m = np.arange(lo, hi + 1)
    out[lo : hi + 1] += weight * _binom.pmf(m, n, eta)


def bernoulli_convolve(state: FockDistribution, eff: Efficiency) -> FockDistribution:
    """Count distribution of an efficiency-eta detector fed with ``state``.

    p(m) = sum_{n >= m} rho_nn C(n, m) eta^m (1-eta)^{n-m}; unit efficiency
    returns the photon-number distribution itself.
    """
    eta = eff.eta
    if eta == 1.0:
        return state
    out = np.zeros(state.cutoff + 1)
    for n in np.nonzero(state.rho_nn)[0]:
        _binom_row(int(n), eta, out, float(state.rho_nn[n]))
    return FockDistribution(rho_nn=out, cutoff=state.cutoff, tail_mass=state.tail_mass)


def amplify_photon_number(state: FockDistribution, g: int) -> FockDistribution:
    """Ideal photon-number amplification |n> -> |g n>: mass at n moves to g*n."""
    if not (isinstance(g, (int, np.integer)) and g >= 1):
        raise ValidationError(f"g={g!r} violates integer g >= 1")
    if g == 1:
        return state
    new_cutoff = g * state.cutoff
    if new_cutoff > MAX_AMPLIFIED_CUTOFF:
        raise ResourceLimitError(
            f"amplified cutoff {new_cutoff} exceeds {MAX_AMPLIFIED_CUTOFF}"
        )
    rho = np.zeros(new_cutoff + 1)
    rho[:: g] = state.rho_nn
    return FockDistribution(rho_nn=rho, cutoff=new_cutoff, tail_mass=state.tail_mass)


@dataclass(frozen=True)
class PhotoNoiseReport:
    """Moments of the photon-number estimator m/(g*eta)."""

    estimator_mean: float
    estimator_variance: float
    added_noise: float


def photo_added_noise(
    state: FockDistribution, eff: Efficiency, g: int = 1
) -> PhotoNoiseReport:
    """Mean, variance and added noise of m/(g*eta) after gain-g preamplification.

    The estimator is unbiased for the input mean photon number; its variance
    exceeds the intrinsic photon-number variance by (1-eta)/(g*eta) times the
    mean.  Moments are computed twice, from the explicit output distribution
    and from that identity, and must agree to 1e-9.
    """
    counts = bernoulli_convolve(amplify_photon_number(state, g), eff)
    m = np.arange(counts.cutoff + 1, dtype=float)
    estimate = m / (g * eff.eta)
    probs = counts.rho_nn
    mean_num = float(np.dot(estimate, probs))
    var_num = float(np.dot(estimate * estimate, probs)) - mean_num * mean_num
    mean_in = state.mean_photon()
    var_in = state.photon_variance()
    added_analytic = (1.0 - eff.eta) / (g * eff.eta) * mean_in
    var_analytic = var_in + added_analytic
    if abs(mean_num - mean_in) > MOMENT_CHECK_TOL:
        raise NumericsError(
            f"estimator mean {mean_num!r} differs from input mean {mean_in!r}"
        )
    if abs(var_num - var_analytic) > MOMENT_CHECK_TOL:
        raise NumericsError(
            f"estimator variance {var_num!r} differs from analytic {var_analytic!r}"
        )
    return PhotoNoiseReport(
        estimator_mean=mean_num,
        estimator_variance=var_num,
        added_noise=var_num - var_in,
    )


@dataclass(frozen=True)
class CVState:
    """Catalog state for continuous-variable detection: Fock |n> or coherent |z>.

    Both have closed-form photon statistics, quadrature distributions and
    Husimi functions, which is what makes the added-noise cross-checks exact.
    """

    kind: str
    n: int = 0
    amplitude: complex = 0.0

    def __post_init__(self):
        if self.kind not in ("fock", "coherent"):
            raise ValidationError(f"kind={self.kind!r} not in {{fock, coherent}}")
        if self.kind == "fock" and self.n < 0:
            raise ValidationError(f"n={self.n!r} violates n >= 0")

    @classmethod
    def fock(cls, n: int) -> "CVState":
        return cls(kind="fock", n=n)

    @classmethod
    def coherent(cls, amplitude: complex) -> "CVState":
        return cls(kind="coherent", amplitude=complex(amplitude))

    def mean_photon(self) -> float:
        if self.kind == "fock":
            return float(self.n)
        return abs(self.amplitude) ** 2

    def fock_distribution(self, cutoff: int | None = None) -> FockDistribution:
        if self.kind == "fock":
            return fock_state(self.n)
        return coherent_state(self.mean_photon(), cutoff)

    def quadrature_mean(self, phi: float = 0.0) -> float:
        if self.kind == "fock":
            return 0.0
        return (self.amplitude * np.exp(-1j * phi)).real

    def quadrature_var(self) -> float:
        if self.kind == "fock":
            return (2 * self.n + 1) / 4.0
        return 0.25

    def quadrature_pdf(self, x: np.ndarray, phi: float = 0.0) -> np.ndarray:
        """Ideal quadrature distribution |<x|state>|^2 on the given grid."""
        x = np.asarray(x, dtype=float)
        if self.kind == "coherent":
            mu = self.quadrature_mean(phi)
            return np.sqrt(2.0 / math.pi) * np.exp(-2.0 * (x - mu) ** 2)
        # normalized oscillator functions by recurrence; stable for large n
        y = math.sqrt(2.0) * x
        u_prev = math.pi**-0.25 * np.exp(-0.5 * y * y)
        if self.n == 0:
            psi = u_prev
        else:
            u_curr = math.sqrt(2.0) * y * u_prev
            for k in range(2, self.n + 1):
                u_prev, u_curr = (
                    u_curr,
                    math.sqrt(2.0 / k) * y * u_curr - math.sqrt((k - 1) / k) * u_prev,
                )
            psi = u_curr
        return math.sqrt(2.0) * psi**2

    def q_mean(self) -> complex:
        return self.amplitude if self.kind == "coherent" else 0.0

    def q_axis_var(self) -> float:
        """Per-axis variance of the Husimi function (= quadrature_var + 1/4)."""
        if self.kind == "fock":
            return (self.n + 1) / 2.0
        return 0.5

    def husimi(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Husimi function Q(z) = |<z|state>|^2 / pi on the grid x + i y."""
        xx, yy = np.meshgrid(x, y, indexing="ij")
        if self.kind == "coherent":
            w = self.amplitude
            return np.exp(-((xx - w.real) ** 2 + (yy - w.imag) ** 2)) / math.pi
        rho2 = xx * xx + yy * yy
        log_q = -rho2 - math.lgamma(self.n + 1) - math.log(math.pi)
        if self.n > 0:
            with np.errstate(divide="ignore"):
                log_q = log_q + self.n * np.log(rho2)
            log_q = np.where(rho2 > 0.0, log_q, -np.inf)
        return np.exp(log_q)


def _gauss_convolve_1d(pdf: np.ndarray, dx: float, variance: float) -> np.ndarray:
    """Convolve grid samples with a zero-mean Gaussian, exactly in Fourier space.

    Multiplying by the continuous characteristic function sidesteps kernel
    sampling error for variances far below the grid spacing.
    """
    if variance == 0.0:
        return pdf
    omega = 2.0 * math.pi * np.fft.rfftfreq(pdf.size, d=dx)
    return np.fft.irfft(np.fft.rfft(pdf) * np.exp(-0.5 * variance * omega**2), pdf.size)


def _gauss_convolve_2d(pdf: np.ndarray, dx: float, dy: float, variance: float) -> np.ndarray:
    if variance == 0.0:
        return pdf
    wx = 2.0 * math.pi * np.fft.fftfreq(pdf.shape[0], d=dx)
    wy = 2.0 * math.pi * np.fft.rfftfreq(pdf.shape[1], d=dy)
    kernel = np.exp(-0.5 * variance * (wx[:, None] ** 2 + wy[None, :] ** 2))
    return np.fft.irfft2(np.fft.rfft2(pdf) * kernel, pdf.shape)


def _check_grid(x: np.ndarray, mean: float, sigma: float, label: str) -> None:
    if x.ndim != 1 or x.size < 16 or np.any(np.diff(x) <= 0):
        raise ValidationError(f"{label} grid must be an increasing 1-d array")
    margin = min(mean - x[0], x[-1] - mean)
    if margin < MIN_EDGE_SIGMAS * sigma:
        raise GridCoverageError(
            f"{label} grid leaves more than 1e-8 probability mass outside "
            f"(edge clearance {margin:.3g} < {MIN_EDGE_SIGMAS} sigma = "
            f"{MIN_EDGE_SIGMAS * sigma:.3g})"
        )


@dataclass(frozen=True)
class HomodyneResult:
    """Quadrature outcome distribution and its noise accounting."""

    x: np.ndarray = field(repr=False)
    pdf: np.ndarray = field(repr=False)
    mean: float
    variance: float
    added_noise: float
    rescaled: bool


def homodyne_pdf(
    state: CVState,
    eff: Efficiency,
    r: float = 0.0,
    x_grid: np.ndarray | None = None,
    phi: float = 0.0,
    rescaled: bool = True,
) -> HomodyneResult:
    """Outcome distribution of inefficient homodyne detection with pre-squeezing.

    Parameters
    ----------
    state : CVState
        Input state from the Fock/coherent catalog.
    eff : Efficiency
        Detector efficiency; contributes Gaussian blur of variance
        (1-eta)/(4*eta).
    r : float
        Squeeze parameter of the preamplifier; the measured quadrature is
        stretched by e^r before the blur.
    x_grid : ndarray, optional
        Outcome grid; defaults to mean +/- 8 total sigma with 4096 points.
    phi : float
        Quadrature phase.
    rescaled : bool
        Report outcomes divided by e^r (unbiased for the input quadrature).
        With ``rescaled=False`` the raw amplified outcomes are returned.

    Returns
    -------
    HomodyneResult
        Grid, pdf, measured mean/variance, and the added noise
        (measured variance minus the relevant signal variance), which must
        match e^{-2r} (1-eta)/(4*eta) [rescaled] or (1-eta)/(4*eta) [raw]
        to 1e-6.
    """
    if r < 0.0:
        raise ValidationError(f"r={r!r} violates r >= 0")
    delta2 = (1.0 - eff.eta) / (4.0 * eff.eta)
    scale = 1.0 if rescaled else math.exp(r)
    blur = delta2 * math.exp(-2.0 * r) if rescaled else delta2
    signal_mean = state.quadrature_mean(phi) * scale
    signal_var = state.quadrature_var() * scale * scale
    sigma_tot = math.sqrt(signal_var + blur)
    if x_grid is None:
        x_grid = signal_mean + np.linspace(
            -GRID_HALF_WIDTH_SIGMAS * sigma_tot,
            GRID_HALF_WIDTH_SIGMAS * sigma_tot,
            HOMODYNE_GRID_POINTS,
        )
    else:
        x_grid = np.asarray(x_grid, dtype=float)
    _check_grid(x_grid, signal_mean, sigma_tot, "homodyne")
    dx = float(x_grid[1] - x_grid[0])
    ideal = state.quadrature_pdf(x_grid / scale, phi) / scale
    pdf = _gauss_convolve_1d(ideal, dx, blur)
    mean = float(trapezoid(x_grid * pdf, x_grid))
    variance = float(trapezoid(x_grid * x_grid * pdf, x_grid)) - mean * mean
    added = variance - signal_var
    if abs(added - blur) > GRID_CHECK_TOL:
        raise NumericsError(
            f"grid-moment added noise {added!r} differs from analytic {blur!r}"
        )
    return HomodyneResult(
        x=x_grid, pdf=pdf, mean=mean, variance=variance, added_noise=added,
        rescaled=rescaled,
    )


@dataclass(frozen=True)
class HeterodyneResult:
    """Joint quadrature outcome density and per-axis noise accounting."""

    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    pdf: np.ndarray = field(repr=False)
    mean: complex
    variance_x: float
    variance_y: float
    excess_x: float
    excess_y: float


def heterodyne_pdf(
    state: CVState,
    eff: Efficiency,
    G: float = 1.0,
    x_grid: np.ndarray | None = None,
    y_grid: np.ndarray | None = None,
) -> HeterodyneResult:
    """Outcome density of inefficient heterodyne detection with gain-G preamp.

    The rescaled outcome density is the Husimi function of the state
    convolved with a circular Gaussian of per-axis variance
    ((1-eta)/eta)/(4*G) in quadrature units (Re z estimates X_0; the
    complex-plane weight exp(-|z'-z|^2/Delta^2) is bridged to quadrature
    units by halving the per-axis variance).  Each marginal then carries the
    intrinsic variance, the 1/4 joint-measurement penalty, and that excess,
    which must match the analytic value to 1e-6.
    """
    if G < 1.0:
        raise ValidationError(f"G={G!r} violates G >= 1")
    delta2 = (1.0 - eff.eta) / eff.eta
    blur_axis = delta2 / (4.0 * G)
    center = state.q_mean()
    axis_var = state.q_axis_var() + blur_axis
    sigma = math.sqrt(axis_var)
    if x_grid is None:
        x_grid = center.real + np.linspace(
            -GRID_HALF_WIDTH_SIGMAS * sigma,
            GRID_HALF_WIDTH_SIGMAS * sigma,
            HETERODYNE_GRID_POINTS,
        )
    else:
        x_grid = np.asarray(x_grid, dtype=float)
    if y_grid is None:
        y_grid = center.imag + np.linspace(
            -GRID_HALF_WIDTH_SIGMAS * sigma,
            GRID_HALF_WIDTH_SIGMAS * sigma,
            HETERODYNE_GRID_POINTS,
        )
    else:
        y_grid = np.asarray(y_grid, dtype=float)
    _check_grid(x_grid, center.real, sigma, "heterodyne x")
    _check_grid(y_grid, center.imag, sigma, "heterodyne y")
    q = state.husimi(x_grid, y_grid)
    pdf = _gauss_convolve_2d(q, float(x_grid[1] - x_grid[0]), float(y_grid[1] - y_grid[0]), blur_axis)
    marginal_x = trapezoid(pdf, y_grid, axis=1)
    marginal_y = trapezoid(pdf, x_grid, axis=0)
    mass = float(trapezoid(marginal_x, x_grid))
    if abs(mass - 1.0) > 1e-8:
        raise GridCoverageError(f"grid captures mass {mass!r}, more than 1e-8 missing")
    mean_x = float(trapezoid(x_grid * marginal_x, x_grid))
    mean_y = float(trapezoid(y_grid * marginal_y, y_grid))
    var_x = float(trapezoid(x_grid * x_grid * marginal_x, x_grid)) - mean_x * mean_x
    var_y = float(trapezoid(y_grid * y_grid * marginal_y, y_grid)) - mean_y * mean_y
    base = state.quadrature_var() + 0.25
    excess_x = var_x - base
    excess_y = var_y - base
    for label, excess in (("x", excess_x), ("y", excess_y)):
        if abs(excess - blur_axis) > GRID_CHECK_TOL:
            raise NumericsError(
                f"{label}-axis excess {excess!r} differs from analytic {blur_axis!r}"
            )
    return HeterodyneResult(
        x=x_grid,
        y=y_grid,
        pdf=pdf,
        mean=complex(mean_x, mean_y),
        variance_x=var_x,
        variance_y=var_y,
        excess_x=excess_x,
        excess_y=excess_y,
    )
