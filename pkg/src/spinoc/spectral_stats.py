"""Eigenvalue statistics: spacings, generalized energy differences, Brody fits."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit, minimize_scalar
from scipy.special import gammaln

from .operators import HERMITIAN_TOL, OperatorMatrix

log = logging.getLogger(__name__)

BRODY_BETA_MAX = 1.5
MIN_FIT_SAMPLES = 50
# spacings below this are treated as exact degeneracies in the log-likelihood
_S_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class Spectrum:
    energies: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.energies)

    def shifted(self, c: float) -> "Spectrum":
        return Spectrum(self.energies + c, self.eigenvectors)


@dataclass(frozen=True, eq=False)
class SpacingSample:
    values: np.ndarray
    source_tag: str = "consecutive"
    M: int = 1

    @classmethod
    def from_raw(cls, raw, source_tag="consecutive", M=1) -> "SpacingSample":
        raw = np.asarray(raw, dtype=float)
        mean = raw.mean()
        if not mean > 0:
            raise ValueError("spacing sample has non-positive mean")
        return cls(raw / mean, source_tag, M)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class BrodyFit:
    beta: float
    b: float
    loglik: float
    n: int
    flag: str = "ok"


def diagonalize(op) -> Spectrum:
    data = op.data if isinstance(op, OperatorMatrix) else np.asarray(op)
    if data.size and np.max(np.abs(data - data.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(data))):
        raise ValueError("cannot diagonalize a non-Hermitian matrix")
    E, V = np.linalg.eigh(data)
    return Spectrum(E, V)


def eigenvalues(op) -> np.ndarray:
    data = op.data if isinstance(op, OperatorMatrix) else np.asarray(op)
    return np.linalg.eigvalsh(data)


def energy_spread(spec) -> float:
    E = spec.energies if isinstance(spec, Spectrum) else np.asarray(spec)
    return float(E[-1] - E[0])


def _trimmed(spec, trim_fraction: float) -> np.ndarray:
    E = np.sort(spec.energies if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float))
    if not 0 <= trim_fraction < 0.5:
        raise ValueError(f"trim_fraction must lie in [0, 0.5), got {trim_fraction}")
    cut = int(np.floor(trim_fraction * len(E)))
    return E[cut:len(E) - cut]


def level_spacings(spec, trim_fraction: float = 0.0) -> SpacingSample:
    E = _trimmed(spec, trim_fraction)
    if len(E) < 3:
        raise ValueError(f"need at least 3 levels for spacing statistics, got {len(E)}")
    return SpacingSample.from_raw(np.diff(E), "consecutive", 1)


def raw_energy_differences(E: np.ndarray, M: int) -> np.ndarray:
    return np.concatenate([E[m:] - E[:-m] for m in range(1, M + 1)])


def energy_differences(spec, M: int, trim_fraction: float = 0.0) -> SpacingSample:
    """All E[n+m] - E[n] with 1 <= m <= M, scaled to unit mean."""
    E = _trimmed(spec, trim_fraction)
    if not 1 <= M < len(E):
        raise ValueError(f"M={M} outside [1, {len(E) - 1}]")
    return SpacingSample.from_raw(raw_energy_differences(E, M), "generalized", M)


def density_poisson(s):
    return np.exp(-np.asarray(s, dtype=float))


def density_wigner_dyson(s):
    s = np.asarray(s, dtype=float)
    return 0.5 * np.pi * s * np.exp(-0.25 * np.pi * s * s)


def brody_b(beta: float) -> float:
    return float(np.exp((beta + 1.0) * gammaln((beta + 2.0) / (beta + 1.0))))


def density_brody(s, beta: float):
    s = np.asarray(s, dtype=float)
    b = brody_b(beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        pw = np.where(s > 0, s ** beta, 1.0 if beta == 0 else 0.0)
    return (beta + 1.0) * b * pw * np.exp(-b * s ** (beta + 1.0))


def brody_loglik(values: np.ndarray, beta: float) -> float:
    b = brody_b(beta)
    logs = np.log(np.maximum(values, _S_FLOOR))
    n = len(values)
    return float(n * (np.log(beta + 1.0) + np.log(b)) + beta * logs.sum()
                 - b * np.exp((beta + 1.0) * logs).sum())


def brody_fit(sample: SpacingSample, tol: float = 1e-4) -> BrodyFit:
    """Maximum-likelihood Brody parameter on [0, 1.5]."""
    v = np.asarray(sample.values if isinstance(sample, SpacingSample) else sample, dtype=float)
    if len(v) < MIN_FIT_SAMPLES:
        raise ValueError(f"Brody fit needs at least {MIN_FIT_SAMPLES} samples, got {len(v)}")
    flag = "ok"
    if np.ptp(v) <= 1e-12 * max(1.0, abs(v.mean())):
        flag = "degenerate"
        log.warning("degenerate spacing sample (all values equal)")
    res = minimize_scalar(lambda beta: -brody_loglik(v, beta), bounds=(0.0, BRODY_BETA_MAX),
                          method="bounded", options={"xatol": tol})
    beta = float(res.x)
    # the bounded search never evaluates the endpoints themselves
    for edge in (0.0, BRODY_BETA_MAX):
        if brody_loglik(v, edge) > -res.fun:
            beta = edge
    if flag == "ok" and beta >= BRODY_BETA_MAX - tol:
        flag = "at_upper_bound"
    return BrodyFit(beta, brody_b(beta), brody_loglik(v, beta), len(v), flag)


def brody_fit_histogram(sample: SpacingSample, bins: int = 40, s_max: float = 4.0) -> float:
    """Least-squares Brody fit to the density histogram; a cross-check only."""
    edges, dens = histogram(sample, bins, (0.0, s_max))
    centers = 0.5 * (edges[1:] + edges[:-1])
    popt, _ = curve_fit(lambda s, beta: density_brody(s, beta), centers, dens, p0=[0.5],
                        bounds=(0.0, BRODY_BETA_MAX))
    return float(popt[0])


def histogram(sample, bins=40, range=(0.0, 4.0)):
    """Density-normalized histogram; returns (edges, densities)."""
    v = sample.values if isinstance(sample, SpacingSample) else np.asarray(sample, dtype=float)
    counts, edges = np.histogram(v, bins=bins, range=range)
    total = counts.sum()
    if total == 0:
        return edges, np.zeros(len(counts))
    return edges, counts / (total * np.diff(edges))


def histogram_l1(h1, h2) -> float:
    edges1, d1 = h1
    edges2, d2 = h2
    if not np.array_equal(edges1, edges2):
        raise ValueError("histograms must share bin edges")
    return float(np.sum(np.abs(d1 - d2) * np.diff(edges1)))
