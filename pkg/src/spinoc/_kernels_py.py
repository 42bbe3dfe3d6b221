"""Pure numpy time-stepping kernels; reference twin of ``_kernels.pyx``.

All states live in the control frame where the control operator is the
diagonal ``h``. One step with field value ``e`` is

    psi <- exp(-i e h dt/2) U exp(-i e h dt/2) psi

with ``U = exp(-i H01 dt)`` expressed in that frame.
"""

import numpy as np


def _half_phase(e, h, dt, sign):
    return np.exp(sign * 0.5j * e * dt * h)


def evolve_forward(U, h, eps, dt, psi0, store):
    psi = np.array(psi0, dtype=np.complex128)
    n = len(eps)
    traj = np.empty((n + 1, len(psi)), dtype=np.complex128) if store else None
    if store:
        traj[0] = psi
    for j in range(n):
        a = _half_phase(eps[j], h, dt, -1.0)
        psi = a * (U @ (a * psi))
        if store:
            traj[j + 1] = psi
    return traj if store else psi


def evolve_backward(UH, h, eps, dt, chiT, store):
    """Adjoint steps in reverse order; ``UH`` is the conjugate transpose of U."""
    chi = np.array(chiT, dtype=np.complex128)
    n = len(eps)
    traj = np.empty((n + 1, len(chi)), dtype=np.complex128) if store else None
    if store:
        traj[n] = chi
    for j in range(n - 1, -1, -1):
        a = _half_phase(eps[j], h, dt, 1.0)
        chi = a * (UH @ (a * chi))
        if store:
            traj[j] = chi
    return traj if store else chi


def krotov_sweep(U, h, eps_old, dt, chi, psi0, inv_lambda):
    """Sequential field update along a fresh forward propagation.

    ``chi[j]`` is the co-state at grid point j under the old field. Returns
    the new field and the final state it produces.
    """
    psi = np.array(psi0, dtype=np.complex128)
    n = len(eps_old)
    eps_new = np.empty(n)
    for j in range(n):
        g = np.imag(np.vdot(chi[j], h * psi))
        e = eps_old[j] + inv_lambda * g
        eps_new[j] = e
        a = _half_phase(e, h, dt, -1.0)
        psi = a * (U @ (a * psi))
    return eps_new, psi
