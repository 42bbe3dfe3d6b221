import numpy as np
import pytest

from conftest import SZ, full_exchange, site_op
from spinoc.basis import ChainParams, enumerate_sector, mirror_matrix, parity_adapt
from spinoc.operators import (
    OperatorMatrix,
    build_control,
    build_H0,
    build_H01,
    build_H1,
    build_Hc,
    build_Hc_long_range,
    matrix_in_eigenbasis,
)
from spinoc.spectral_stats import diagonalize


def _project(H_full, sector):
    idx = sector.states
    return H_full[np.ix_(idx, idx)]


def test_two_site_H0_by_hand():
    p = ChainParams(L=2, J=1.0)
    H0 = build_H0(p, enumerate_sector(2, 1))
    assert np.allclose(H0.data, [[-0.25, 1.0], [1.0, -0.25]])
    assert np.allclose(np.linalg.eigvalsh(H0.data), [-1.25, 0.75])


def test_vacuum_energies_L15():
    p = ChainParams(L=15)
    vac = enumerate_sector(15, 0)
    assert build_H0(p, vac).data[0, 0] == pytest.approx(3.5)
    assert build_H1(p, vac).data[0, 0] == pytest.approx(3.25)
    assert build_Hc(p, vac).data[0, 0] == pytest.approx(-1.0)


def test_H1_vanishes_for_two_sites():
    assert np.all(build_H1(ChainParams(L=2), enumerate_sector(2, 1)).data == 0)


def test_H1_next_nearest_hop_L3():
    b = enumerate_sector(3, 1)
    H1 = build_H1(ChainParams(L=3), b).data
    assert H1[b.index_of[0b001], b.index_of[0b100]] == pytest.approx(1.0)
    assert H1[b.index_of[0b001], b.index_of[0b010]] == 0.0


def test_H01_combination():
    b = enumerate_sector(6, 3)
    p0 = ChainParams(L=6, Gamma=0.0)
    p1 = ChainParams(L=6, Gamma=1.0)
    assert np.array_equal(build_H01(p0, b).data, build_H0(p0, b).data)
    assert np.allclose(build_H01(p1, b).data, build_H0(p1, b).data + build_H1(p1, b).data)


def test_Hc_entries():
    L = 5
    b = enumerate_sector(L, 1)
    Hc = build_Hc(ChainParams(L=L), b).data
    assert Hc[b.index_of[0b00001], b.index_of[0b00001]] == pytest.approx(0.0)
    assert Hc[b.index_of[0b00100], b.index_of[0b00100]] == pytest.approx(-1.0)
    P = mirror_matrix(b)
    assert np.allclose(P @ Hc, Hc @ P)


def test_long_range_L3_all_coupled():
    b = enumerate_sector(3, 1)
    Hp = build_Hc_long_range(ChainParams(L=3), b).data
    assert np.allclose(Hp, np.ones((3, 3)) - np.eye(3))


@pytest.mark.parametrize("L", [3, 4, 5, 6, 7, 8])
def test_sector_blocks_match_full_space(L):
    J, alpha, gamma = 1.3, 0.5, 0.8
    p = ChainParams(L=L, J=J, Gamma=gamma, alpha_z=alpha)
    nn = [(i, i + 1) for i in range(1, L)]
    nnn = [(i, i + 2) for i in range(1, L - 1)]
    all_pairs = [(i, j) for i in range(1, L + 1) for j in range(i + 1, L + 1)]
    H0_full = full_exchange(L, nn, J, alpha)
    H1_full = full_exchange(L, nnn, J, alpha)
    Hc_full = 0.5 * J * (site_op(SZ, 1, L) + site_op(SZ, L, L))
    Hp_full = full_exchange(L, all_pairs, J, alpha, zz=False)
    for K in range(L + 1):
        b = enumerate_sector(L, K)
        for built, full in [
            (build_H0(p, b), H0_full),
            (build_H1(p, b), H1_full),
            (build_H01(p, b), H0_full + gamma * H1_full),
            (build_Hc(p, b), Hc_full),
            (build_Hc_long_range(p, b), Hp_full),
        ]:
            assert np.max(np.abs(built.data - _project(full, b))) < 1e-12


def test_magnetization_is_conserved_full_space():
    L = 6
    H0_full = full_exchange(L, [(i, i + 1) for i in range(1, L)], 1.0, 0.5)
    Sz = sum(site_op(SZ, i, L) for i in range(1, L + 1))
    assert np.max(np.abs(H0_full @ Sz - Sz @ H0_full)) < 1e-12


@pytest.mark.parametrize("L,K", [(7, 2), (8, 3), (9, 4)])
def test_parity_block_operators(L, K):
    p = ChainParams(L=L, Gamma=0.6)
    sector = enumerate_sector(L, K)
    P = mirror_matrix(sector)
    for build in (build_H0, build_H1, build_Hc, build_Hc_long_range):
        M = build(p, sector).data
        assert np.max(np.abs(P @ M - M @ P)) < 1e-12
    pb = parity_adapt(sector, 1)
    Hc = build_Hc(p, pb)
    assert np.max(np.abs(Hc.data - np.diag(np.diag(Hc.data)))) < 1e-14
    for M in (build_H01(p, pb), Hc, build_Hc_long_range(p, pb)):
        assert np.max(np.abs(M.data - M.data.conj().T)) < 1e-12
        assert M.basis_tag == ("parity", L, K, 1)


def test_long_range_more_connected_in_eigenbasis():
    p = ChainParams(L=9, Gamma=1.0)
    pb = parity_adapt(enumerate_sector(9, 2), 1)
    spec = diagonalize(build_H01(p, pb))

    def fraction(op):
        return np.mean(np.abs(matrix_in_eigenbasis(op, spec).data) > 0.01 * p.J)

    assert fraction(build_Hc_long_range(p, pb)) > fraction(build_Hc(p, pb))


def test_eigenbasis_transform():
    p = ChainParams(L=8, Gamma=0.4)
    b = parity_adapt(enumerate_sector(8, 3), 1)
    H = build_H01(p, b)
    spec = diagonalize(H)
    assert np.allclose(matrix_in_eigenbasis(H, spec).data, np.diag(spec.energies), atol=1e-10)
    eye = OperatorMatrix(b.tag, np.eye(b.dim))
    assert np.allclose(matrix_in_eigenbasis(eye, spec).data, np.eye(b.dim), atol=1e-12)
    Hc = build_Hc(p, b)
    assert abs(np.linalg.norm(matrix_in_eigenbasis(Hc, spec).data) - np.linalg.norm(Hc.data)) < 1e-10


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        OperatorMatrix(("x",), np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_basis_mismatch_rejected():
    p = ChainParams(L=5)
    a = build_H0(p, enumerate_sector(5, 2))
    b = build_H0(p, parity_adapt(enumerate_sector(5, 2), 1))
    with pytest.raises(ValueError):
        a + b


def test_build_control_dispatch():
    p = ChainParams(L=5)
    b = enumerate_sector(5, 2)
    assert np.array_equal(build_control(p, b, "local").data, build_Hc(p, b).data)
    assert np.array_equal(build_control(p, b, "long_range").data, build_Hc_long_range(p, b).data)
