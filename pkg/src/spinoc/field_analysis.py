"""Power spectrum of a control field, its bandwidth and spectral IPR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ControlField

DEFAULT_BETA_CUTOFF = 1e-2
MIN_SAMPLES = 16
# guards the cumulative-mass comparison against round-off in the running sum
_CUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FieldSpectrum:
    """Density ``power[k]`` on frequency bins ``omega[k]``; sum(power) * domega == 1."""

    domega: float
    omega: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        if np.any(self.power < 0):
            raise ValueError("power densities must be nonnegative")

    @classmethod
    def from_power(cls, domega: float, omega, raw_power) -> "FieldSpectrum":
        raw_power = np.asarray(raw_power, dtype=float)
        total = raw_power.sum() * domega
        if not total > 0:
            raise ValueError("spectrum carries no power")
        return cls(domega, np.asarray(omega, dtype=float), raw_power / total)


@dataclass(frozen=True)
class SpectralMetrics:
    omega_bw: float
    sipr: float
    siprn: float
    beta_cutoff: float = DEFAULT_BETA_CUTOFF


def power_spectrum(field: ControlField, remove_dc: bool = True) -> FieldSpectrum:
    """One-sided rectangular-window periodogram on the bins k * 2 pi / T."""
    x = field.samples
    n = len(x)
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n}")
    if remove_dc:
        x = x - x.mean()
    P = np.abs(np.fft.rfft(x)) ** 2
    # fold negative frequencies; DC and (even n) Nyquist have no mirror partner
    stop = len(P) - 1 if n % 2 == 0 else len(P)
    P[1:stop] *= 2.0
    domega = 2.0 * np.pi / field.T
    omega = domega * np.arange(len(P))
    if remove_dc:
        P, omega = P[1:], omega[1:]
    if not np.any(P > 0):
        raise ValueError("field has no spectral content")
    return FieldSpectrum.from_power(domega, omega, P)


def bandwidth(spec: FieldSpectrum, beta_cutoff: float = DEFAULT_BETA_CUTOFF) -> float:
    """Smallest bin frequency whose cumulative mass reaches 1 - beta_cutoff."""
    if not 0 < beta_cutoff < 1:
        raise ValueError(f"beta_cutoff must lie in (0, 1), got {beta_cutoff}")
    cum = np.cumsum(spec.power) * spec.domega
    k = int(np.searchsorted(cum, 1.0 - beta_cutoff - _CUM_TOL, side="left"))
    return float(spec.omega[min(k, len(cum) - 1)])


def sipr(spec: FieldSpectrum) -> float:
    return float(1.0 / (np.sum(spec.power ** 2) * spec.domega))


def siprn(spec: FieldSpectrum, omega_bw: float) -> float:
    return sipr(spec) / omega_bw


def analyze(field: ControlField, beta_cutoff: float = DEFAULT_BETA_CUTOFF,
            remove_dc: bool = True) -> SpectralMetrics:
    spec = power_spectrum(field, remove_dc)
    w = bandwidth(spec, beta_cutoff)
    if not w > 0:
        raise ValueError("bandwidth is zero (all power at DC)")
    s = sipr(spec)
    # Cauchy-Schwarz over the bins below w: siprn <= (1-beta)^-2, up to the
    # extra DC bin when it is kept
    span = np.count_nonzero(spec.omega <= w) * spec.domega
    if s / w > span / w / (1.0 - beta_cutoff) ** 2 * (1 + 1e-9):
        raise AssertionError(f"siprn {s / w} violates the Cauchy-Schwarz bound")
    return SpectralMetrics(w, s, s / w, beta_cutoff)
