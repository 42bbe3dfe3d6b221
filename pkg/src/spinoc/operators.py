"""Chain Hamiltonians and control operators restricted to a sector or parity block."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .basis import ChainParams, ParityBasis, SectorBasis

HERMITIAN_TOL = 1e-12


class ControlKind(str, enum.Enum):
    LOCAL_EDGE = "local"
    LONG_RANGE = "long_range"


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    basis_tag: tuple
    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"operator must be square, got shape {d.shape}")
        if d.size and np.max(np.abs(d - d.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(d))):
            raise ValueError("operator is not Hermitian")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_basis(self, other)
        return OperatorMatrix(self.basis_tag, self.data + other.data)

    def scaled(self, c: float) -> "OperatorMatrix":
        return OperatorMatrix(self.basis_tag, c * self.data)

    def is_diagonal(self, tol: float = 1e-14) -> bool:
        off = self.data - np.diag(np.diag(self.data))
        return not off.size or np.max(np.abs(off)) <= tol


def _check_same_basis(a: OperatorMatrix, b: OperatorMatrix) -> None:
    if a.basis_tag != b.basis_tag:
        raise ValueError(f"basis mismatch: {a.basis_tag} vs {b.basis_tag}")


def _sector_of(basis) -> SectorBasis:
    return basis.parent if isinstance(basis, ParityBasis) else basis


def _restrict(basis, M: np.ndarray) -> OperatorMatrix:
    if isinstance(basis, ParityBasis):
        V = basis.vectors
        M = V.T @ M @ V
        M = 0.5 * (M + M.T)
    return OperatorMatrix(basis.tag, M)


def _exchange_matrix(sector: SectorBasis, bonds, hop: float, zz: float) -> np.ndarray:
    """sum over bonds of hop * (S+S- + h.c.) * 2 + zz * sz sz, with sz = +-1."""
    D = sector.dim
    M = np.zeros((D, D))
    idx = sector.index_of
    for a, s in enumerate(sector.states.tolist()):
        for i, j in bonds:
            bi = s >> i & 1
            bj = s >> j & 1
            if bi == bj:
                M[a, a] += zz
            else:
                M[a, a] -= zz
                if hop:
                    M[idx[s ^ (1 << i | 1 << j)], a] += hop
    return M


def build_H0(params: ChainParams, basis) -> OperatorMatrix:
    sector = _sector_of(basis)
    bonds = [(i, i + 1) for i in range(sector.L - 1)]
    J = params.J
    return _restrict(basis, _exchange_matrix(sector, bonds, J, 0.5 * J * params.alpha_z))


def build_H1(params: ChainParams, basis) -> OperatorMatrix:
    sector = _sector_of(basis)
    bonds = [(i, i + 2) for i in range(sector.L - 2)]
    J = params.J
    return _restrict(basis, _exchange_matrix(sector, bonds, J, 0.5 * J * params.alpha_z))


def build_H01(params: ChainParams, basis) -> OperatorMatrix:
    H0 = build_H0(params, basis)
    if params.Gamma == 0:
        return H0
    return H0 + build_H1(params, basis).scaled(params.Gamma)


def build_Hc(params: ChainParams, basis) -> OperatorMatrix:
    """Edge field (J/2)(sz_1 + sz_L)."""
    sector = _sector_of(basis)
    s = sector.states
    z1 = 2 * (s & 1) - 1
    zL = 2 * (s >> (sector.L - 1) & 1) - 1
    return _restrict(basis, np.diag(0.5 * params.J * (z1 + zL).astype(float)))


def build_Hc_long_range(params: ChainParams, basis) -> OperatorMatrix:
    """All-to-all XY hopping (J/2) sum_{i<j} (sx_i sx_j + sy_i sy_j)."""
    sector = _sector_of(basis)
    bonds = list(combinations(range(sector.L), 2))
    return _restrict(basis, _exchange_matrix(sector, bonds, params.J, 0.0))


def build_control(params: ChainParams, basis, kind=ControlKind.LOCAL_EDGE) -> OperatorMatrix:
    kind = ControlKind(kind)
    if kind is ControlKind.LOCAL_EDGE:
        return build_Hc(params, basis)
    return build_Hc_long_range(params, basis)


def matrix_in_eigenbasis(op: OperatorMatrix, spectrum) -> OperatorMatrix:
    V = spectrum.eigenvectors
    if V.shape[0] != op.dim:
        raise ValueError("spectrum and operator dimensions differ")
    M = V.conj().T @ op.data @ V
    return OperatorMatrix(("eigen",) + tuple(op.basis_tag), 0.5 * (M + M.conj().T))
