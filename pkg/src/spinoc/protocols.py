"""Initial/target state pairs for the two transfer protocols, in the (K, +) block."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .basis import ParityBasis, mirror

log = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    L: int
    K: int
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("A", "B"):
            raise ValueError(f"process must be 'A' or 'B', got {self.kind!r}")
        if self.kind == "A" and not 2 * self.K < self.L:
            raise ValueError(f"process A needs 2K < L, got K={self.K}, L={self.L}")


def _require_plus(basis: ParityBasis) -> None:
    if not isinstance(basis, ParityBasis) or basis.sign != 1:
        raise ValueError("protocol states are defined in the positive-parity basis")


def _plus_component(basis: ParityBasis, mask: int) -> int:
    """Index of the + basis vector containing ``mask``."""
    rep = min(mask, mirror(mask, basis.L))
    idx = np.searchsorted(basis.reps, rep)
    if idx >= len(basis.reps) or basis.reps[idx] != rep:
        raise ValueError(f"mask {mask:b} has no component in the + block")
    return int(idx)


def center_block_mask(L: int, K: int) -> int:
    c = (L + 1) // 2
    if K % 2:
        sites = range(c - (K - 1) // 2, c + (K - 1) // 2 + 1)
    else:
        sites = [*range(c - K // 2, c), *range(c + 1, c + K // 2 + 1)]
    return sum(1 << (s - 1) for s in sites)


def build_process_A(L: int, K: int, basis: ParityBasis):
    """Centered excitation block -> (left block + right block)/sqrt(2)."""
    _require_plus(basis)
    if L % 2 == 0 or not 2 * K < L or K < 1:
        raise ValueError(f"process A needs odd L and 1 <= K < L/2, got L={L}, K={K}")
    if (basis.L, basis.K) != (L, K):
        raise ValueError("basis does not match (L, K)")
    psi0 = np.zeros(basis.dim)
    psif = np.zeros(basis.dim)
    # the centered block is a palindrome; the edge pair is one + vector
    psi0[_plus_component(basis, center_block_mask(L, K))] = 1.0
    psif[_plus_component(basis, (1 << K) - 1)] = 1.0
    return psi0.astype(np.complex128), psif.astype(np.complex128)


def random_coefficients(n: int, seed, distribution: str = "gaussian") -> np.ndarray:
    rng = np.random.default_rng(seed)
    if distribution == "gaussian":
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    elif distribution == "uniform_phase":
        a = rng.uniform(0.0, 1.0, n) * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n))
    else:
        raise ValueError(f"unknown coefficient distribution {distribution!r}")
    return a / np.linalg.norm(a)


def build_process_B(L: int, K: int, basis: ParityBasis, H0_spectrum, seed,
                    distribution: str = "gaussian"):
    """Ground state of H0 -> random superposition of the excited H0 eigenstates."""
    _require_plus(basis)
    E = H0_spectrum.energies
    V = H0_spectrum.eigenvectors
    D = len(E)
    if D != basis.dim:
        raise ValueError("spectrum does not match the basis dimension")
    if D < 2:
        raise ValueError("process B needs at least two states in the block")
    if E[1] - E[0] < DEGENERACY_TOL:
        log.warning("H0 ground state is degenerate (L=%d, K=%d); using the lowest index", L, K)
    psi0 = V[:, 0].astype(np.complex128)
    psif = V[:, 1:] @ random_coefficients(D - 1, seed, distribution)
    return psi0, psif / np.linalg.norm(psif)
