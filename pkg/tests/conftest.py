import numpy as np
import pytest

from spinoc.basis import ChainParams, enumerate_sector, parity_adapt
from spinoc.operators import build_H01, build_Hc

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def site_op(op, i, L):
    """Pauli ``op`` on site i (1-based) in the full 2^L space, site 1 = lowest bit.

    Index convention: basis state index == bitmask, bit set == spin up, and
    np.kron puts the last factor on the lowest bit.
    """
    # spin up is bit value 1, so reorder Pauli z to act as +1 on |1>
    flip = np.array([[0, 1], [1, 0]])
    local = flip @ op @ flip
    out = np.array([[1.0 + 0j]])
    for site in range(L, 0, -1):
        out = np.kron(out, local if site == i else np.eye(2))
    return out


def full_exchange(L, bonds, J, alpha_z, zz=True):
    H = np.zeros((2 ** L, 2 ** L), dtype=complex)
    for i, j in bonds:
        H += 0.5 * J * (site_op(SX, i, L) @ site_op(SX, j, L) + site_op(SY, i, L) @ site_op(SY, j, L))
        if zz:
            H += 0.5 * J * alpha_z * site_op(SZ, i, L) @ site_op(SZ, j, L)
    return H


@pytest.fixture
def chain9_k1():
    params = ChainParams(L=9, J=1.0, Gamma=1.0)
    basis = parity_adapt(enumerate_sector(9, 1), 1)
    return params, basis, build_H01(params, basis), build_Hc(params, basis)


@pytest.fixture
def chain4_k2():
    params = ChainParams(L=4, J=1.0, Gamma=0.7)
    basis = enumerate_sector(4, 2)
    return params, basis, build_H01(params, basis), build_Hc(params, basis)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance(request):
    """record(label, ok, detail): collects one summary line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(label, ok, detail=""):
        lines.append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
