import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from spinoc import _backend
from spinoc.basis import ChainParams, enumerate_sector, parity_adapt
from spinoc.dynamics import (
    ControlField,
    make_propagation_cache,
    propagate_backward,
    propagate_forward,
    step,
)
from spinoc.operators import build_H01, build_Hc, build_Hc_long_range

BACKENDS = _backend.available()


def exact_piecewise(H01, Hc, eps, dt, psi0):
    """Dense matrix exponential for every piecewise-constant step."""
    psi = np.asarray(psi0, dtype=complex)
    for e in eps:
        psi = expm(-1j * (H01 + e * Hc) * dt) @ psi
    return psi


def random_state(d, rng):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def smooth_field(t, rng, n_modes=4):
    amp = rng.uniform(-1, 1, n_modes)
    freq = rng.uniform(0.5, 4.0, n_modes)
    phase = rng.uniform(0, 2 * np.pi, n_modes)
    return sum(a * np.cos(w * t + p) for a, w, p in zip(amp, freq, phase))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def test_both_backends_present():
    # the compiled core is part of the build; fallback always exists
    assert "python" in BACKENDS
    assert "compiled" in BACKENDS


def test_cache_free_step_matches_expm(chain4_k2, backend):
    _, _, H01, Hc = chain4_k2
    dt = 0.05
    cache = make_propagation_cache(H01, Hc, dt, backend=backend)
    assert cache.frame is None
    U = expm(-1j * H01.data * dt)
    rng = np.random.default_rng(0)
    v = random_state(H01.dim, rng)
    assert np.max(np.abs(step(v, 0.0, cache) - U @ v)) < 1e-10


def test_zero_field_is_exact(chain4_k2, backend):
    _, _, H01, Hc = chain4_k2
    cache = make_propagation_cache(H01, Hc, 0.01, backend=backend)
    psi0 = random_state(H01.dim, np.random.default_rng(1))
    out = propagate_forward(psi0, ControlField(0.01, np.zeros(300)), cache)
    assert np.max(np.abs(out - expm(-3j * H01.data) @ psi0)) < 1e-10


def test_eigenstate_picks_up_phase(chain9_k1, backend):
    _, _, H01, Hc = chain9_k1
    E, V = np.linalg.eigh(H01.data)
    cache = make_propagation_cache(H01, Hc, 0.01, backend=backend)
    v = V[:, 2].astype(complex)
    out = propagate_forward(v, np.zeros(1000), cache)
    assert abs(np.vdot(v, out)) ** 2 == pytest.approx(1.0, abs=1e-12)
    back = propagate_backward(out, np.zeros(1000), cache)
    assert np.max(np.abs(back - v)) < 1e-10


def test_zero_length_field_is_identity(chain4_k2, backend):
    _, _, H01, Hc = chain4_k2
    cache = make_propagation_cache(H01, Hc, 0.01, backend=backend)
    v = random_state(H01.dim, np.random.default_rng(2))
    assert np.array_equal(propagate_forward(v, np.zeros(0), cache), v)
    traj = propagate_forward(v, np.zeros(0), cache, store=True)
    assert traj.states.shape == (1, H01.dim)


def test_strang_convergence_order(chain4_k2):
    _, _, H01, Hc = chain4_k2
    rng = np.random.default_rng(3)
    psi0 = random_state(H01.dim, rng)
    T = 2.0
    coeffs = np.random.default_rng(4)
    state = coeffs.bit_generator.state
    errs = []
    for dt in (0.02, 0.01):
        coeffs.bit_generator.state = state
        t = dt * np.arange(int(round(T / dt)))
        eps = 3.0 * smooth_field(t, coeffs)
        cache = make_propagation_cache(H01, Hc, dt)
        approx = propagate_forward(psi0, eps, cache)
        exact = exact_piecewise(H01.data, Hc.data, eps, dt, psi0)
        errs.append(np.linalg.norm(approx - exact))
    order = np.log2(errs[0] / errs[1])
    assert 1.8 <= order <= 2.2


@pytest.mark.parametrize("L,K", [(3, 1), (4, 2), (5, 2)])
def test_oracle_equivalence_small_chains(L, K):
    p = ChainParams(L=L, Gamma=0.9)
    b = enumerate_sector(L, K)
    H01, Hc = build_H01(p, b), build_Hc(p, b)
    rng = np.random.default_rng(L * 10 + K)
    dt = 1e-3
    eps = rng.uniform(-2, 2, 500)
    psi0 = random_state(b.dim, rng)
    out = propagate_forward(psi0, eps, make_propagation_cache(H01, Hc, dt))
    exact = exact_piecewise(H01.data, Hc.data, eps, dt, psi0)
    assert abs(np.vdot(exact, out)) ** 2 > 1 - 1e-8


def test_long_range_control_uses_its_eigenframe():
    p = ChainParams(L=5, Gamma=0.5)
    b = parity_adapt(enumerate_sector(5, 2), 1)
    H01, Hc = build_H01(p, b), build_Hc_long_range(p, b)
    cache = make_propagation_cache(H01, Hc, 1e-3)
    assert cache.frame is not None
    rng = np.random.default_rng(7)
    eps = rng.uniform(-1, 1, 400)
    psi0 = random_state(b.dim, rng)
    out = propagate_forward(psi0, eps, cache)
    exact = exact_piecewise(H01.data, Hc.data, eps, 1e-3, psi0)
    assert abs(np.vdot(exact, out)) ** 2 > 1 - 1e-8
    traj = propagate_forward(psi0, eps, cache, store=True)
    assert np.allclose(traj.final, out, atol=1e-13)
    assert np.allclose(traj.states[0], psi0, atol=1e-13)


def test_norm_drift_over_1e5_steps(chain9_k1):
    _, _, H01, Hc = chain9_k1
    cache = make_propagation_cache(H01, Hc, 1e-2)
    rng = np.random.default_rng(8)
    eps = rng.uniform(-10, 10, 100_000)
    out = propagate_forward(random_state(H01.dim, rng), eps, cache)
    assert abs(np.linalg.norm(out) - 1) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.0, 10.0))
def test_unitarity_property(seed, amp):
    p = ChainParams(L=6, Gamma=0.5)
    b = parity_adapt(enumerate_sector(6, 3), 1)
    cache = make_propagation_cache(build_H01(p, b), build_Hc(p, b), 1e-2)
    rng = np.random.default_rng(seed)
    psi0 = random_state(b.dim, rng)
    traj = propagate_forward(psi0, amp * rng.uniform(-1, 1, 2000), cache, store=True)
    assert np.max(np.abs(np.linalg.norm(traj.states, axis=1) - 1)) < 1e-9


def test_round_trip_and_constant_overlap(chain9_k1, backend):
    _, _, H01, Hc = chain9_k1
    cache = make_propagation_cache(H01, Hc, 1e-2, backend=backend)
    rng = np.random.default_rng(9)
    eps = rng.uniform(-1, 1, 3000)
    psi0 = random_state(H01.dim, rng)
    fwd = propagate_forward(psi0, eps, cache, store=True)
    back = propagate_backward(fwd.final, eps, cache, store=True)
    assert np.max(np.abs(back.states[0] - psi0)) < 1e-8
    chiT = random_state(H01.dim, rng)
    chi = propagate_backward(chiT, eps, cache, store=True).states
    overlaps = np.einsum("jk,jk->j", chi.conj(), fwd.states)
    assert np.max(np.abs(overlaps - overlaps[0])) < 1e-8


def test_backends_agree(chain9_k1):
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    _, _, H01, Hc = chain9_k1
    rng = np.random.default_rng(10)
    eps = rng.uniform(-1, 1, 2000)
    psi0 = random_state(H01.dim, rng)
    a, b = (make_propagation_cache(H01, Hc, 1e-2, backend=n) for n in ("compiled", "python"))
    assert np.max(np.abs(propagate_forward(psi0, eps, a, True).states
                         - propagate_forward(psi0, eps, b, True).states)) < 1e-12
    assert np.max(np.abs(propagate_backward(psi0, eps, a, True).states
                         - propagate_backward(psi0, eps, b, True).states)) < 1e-12
    chi = propagate_backward(psi0, eps, a, True).states
    ea, pa = a.kernels.krotov_sweep(a.U, a.h, eps, a.dt, chi, psi0, 3.0)
    eb, pb = b.kernels.krotov_sweep(b.U, b.h, eps, b.dt, chi, psi0, 3.0)
    assert np.max(np.abs(ea - eb)) < 1e-12
    assert np.max(np.abs(pa - pb)) < 1e-12


def test_dimension_mismatch(chain9_k1):
    _, _, H01, Hc = chain9_k1
    cache = make_propagation_cache(H01, Hc, 1e-2)
    with pytest.raises(ValueError):
        propagate_forward(np.ones(3) / np.sqrt(3), np.zeros(5), cache)
    with pytest.raises(ValueError):
        propagate_backward(np.ones(3) / np.sqrt(3), np.zeros(5), cache)


def test_control_field_validation():
    with pytest.raises(ValueError):
        ControlField(0.0, np.zeros(4))
    with pytest.raises(ValueError):
        ControlField(0.1, np.array([0.0, np.inf]))
    f = ControlField.constant(0.1, 1.0, 0.01)
    assert f.n == 100
    assert f.T == pytest.approx(1.0)
    assert np.all(f.samples == 0.1)
