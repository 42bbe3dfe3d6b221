"""Fixed-magnetization and parity-adapted bases of an open spin-1/2 chain.

Sites are numbered 1..L; site ``i`` is bit ``i - 1`` of an integer mask and a
set bit means spin up. The mirror (parity) map reverses the ``L`` bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np


@dataclass(frozen=True)
class ChainParams:
    L: int = 15
    J: float = 1.0
    Gamma: float = 0.0
    alpha_z: float = 0.5

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ValueError(f"chain length must be an integer >= 2, got {self.L}")
        if not self.J > 0:
            raise ValueError(f"coupling J must be positive, got {self.J}")
        if not (np.isfinite(self.Gamma) and np.isfinite(self.alpha_z)):
            raise ValueError("Gamma and alpha_z must be finite")

    @property
    def transfer_time(self) -> float:
        """Single-excitation end-to-end transfer time (L - 1) pi / J."""
        return (self.L - 1) * np.pi / self.J


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """All L-bit masks with exactly K set bits, in increasing order."""

    L: int
    K: int
    states: np.ndarray
    index_of: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def tag(self) -> tuple:
        return ("sector", self.L, self.K)


@dataclass(frozen=True, eq=False)
class ParityBasis:
    """Parity eigenbasis of one sector.

    ``vectors`` has shape ``(parent.dim, dim)``; column ``a`` is the a-th basis
    vector written in the parent sector basis. ``reps[a]`` is the smaller mask
    of the mirror pair that generates it.
    """

    parent: SectorBasis
    sign: int
    reps: np.ndarray
    vectors: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def L(self) -> int:
        return self.parent.L

    @property
    def K(self) -> int:
        return self.parent.K

    @property
    def tag(self) -> tuple:
        return ("parity", self.parent.L, self.parent.K, self.sign)


def enumerate_sector(L: int, K: int) -> SectorBasis:
    if not 0 <= K <= L:
        raise ValueError(f"excitation number K={K} outside [0, {L}]")
    masks = sorted(sum(1 << i for i in sites) for sites in combinations(range(L), K))
    states = np.array(masks, dtype=np.int64)
    return SectorBasis(L, K, states, {m: i for i, m in enumerate(masks)})


def mirror(state: int, L: int) -> int:
    out = 0
    for i in range(L):
        if state >> i & 1:
            out |= 1 << (L - 1 - i)
    return out


def parity_adapt(basis: SectorBasis, sign: int) -> ParityBasis:
    if sign not in (1, -1):
        raise ValueError(f"parity sign must be +1 or -1, got {sign}")
    L = basis.L
    reps, cols = [], []
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for s in basis.states.tolist():
        r = mirror(s, L)
        if r < s:
            continue
        v = np.zeros(basis.dim)
        if r == s:
            # palindromes already carry eigenvalue +1
            if sign < 0:
                continue
            v[basis.index_of[s]] = 1.0
        else:
            v[basis.index_of[s]] = inv_sqrt2
            v[basis.index_of[r]] = sign * inv_sqrt2
        reps.append(s)
        cols.append(v)
    vectors = np.array(cols).T if cols else np.zeros((basis.dim, 0))
    return ParityBasis(basis, sign, np.array(reps, dtype=np.int64), vectors)


def mirror_matrix(basis: SectorBasis) -> np.ndarray:
    """Permutation matrix of the mirror map on a sector."""
    P = np.zeros((basis.dim, basis.dim))
    for i, s in enumerate(basis.states.tolist()):
        P[basis.index_of[mirror(s, basis.L)], i] = 1.0
    return P


def parity_dim(L: int, K: int, sign: int) -> int:
    """Closed-form dimension of a parity block (palindromes counted in +)."""
    n_pal = 0
    if L % 2:
        n_pal = comb((L - 1) // 2, K // 2)
    elif K % 2 == 0:
        n_pal = comb(L // 2, K // 2)
    total = comb(L, K)
    return (total + n_pal) // 2 if sign > 0 else (total - n_pal) // 2
