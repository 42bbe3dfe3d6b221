"""Piecewise-constant propagation under H(t) = H01 + eps(t) Hc (Strang splitting).

The cache works in the eigenframe of the control operator, where each step is
a diagonal phase, one dense multiply by exp(-i H01 dt), and another diagonal
phase. For the edge control that frame is the working basis itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .operators import OperatorMatrix


@dataclass(frozen=True, eq=False)
class ControlField:
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1 or not np.all(np.isfinite(s)):
            raise ValueError("field samples must be a finite 1-D sequence")
        object.__setattr__(self, "samples", s)

    @classmethod
    def constant(cls, value: float, T: float, dt: float) -> "ControlField":
        return cls(dt, np.full(n_steps(T, dt), float(value)))

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def T(self) -> float:
        return self.n * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n)


def n_steps(T: float, dt: float) -> int:
    return int(round(T / dt))


@dataclass(frozen=True, eq=False)
class Trajectory:
    states: np.ndarray  # (n + 1, D), row j is the state at t_j

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True, eq=False)
class PropagationCache:
    dt: float
    energies: np.ndarray
    h: np.ndarray  # control operator eigenvalues (diagonal in the frame)
    U: np.ndarray  # exp(-i H01 dt) in the frame
    UH: np.ndarray
    frame: np.ndarray | None = None  # columns: control eigenvectors; None = identity
    backend: str = _backend.NAME
    kernels: object = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.h)

    def to_frame(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.complex128)
        return v if self.frame is None else self.frame.conj().T @ v

    def from_frame(self, v: np.ndarray) -> np.ndarray:
        return v if self.frame is None else v @ self.frame.T if v.ndim == 2 else self.frame @ v

    def forward(self, psi_frame, eps, store=False):
        return self.kernels.evolve_forward(self.U, self.h, eps, self.dt, psi_frame, store)

    def backward(self, chi_frame, eps, store=False):
        return self.kernels.evolve_backward(self.UH, self.h, eps, self.dt, chi_frame, store)


def make_propagation_cache(H01: OperatorMatrix, Hc: OperatorMatrix, dt: float,
                           backend: str | None = None) -> PropagationCache:
    if H01.basis_tag != Hc.basis_tag:
        raise ValueError(f"basis mismatch: {H01.basis_tag} vs {Hc.basis_tag}")
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    name = backend or _backend.NAME
    kernels = _backend.load(name)
    E, V = np.linalg.eigh(H01.data)
    U = (V * np.exp(-1j * E * dt)) @ V.conj().T
    if Hc.is_diagonal():
        h = np.real(np.diag(Hc.data)).copy()
        W = None
    else:
        h, W = np.linalg.eigh(Hc.data)
        W = W.astype(np.complex128)
        U = W.conj().T @ U @ W
    U = np.ascontiguousarray(U, dtype=np.complex128)
    return PropagationCache(dt, E, h, U, np.ascontiguousarray(U.conj().T), W, name, kernels)


def _check_state(v, cache) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (cache.dim,):
        raise ValueError(f"state of shape {v.shape} does not match dimension {cache.dim}")
    return v


def _samples(field_) -> np.ndarray:
    return field_.samples if isinstance(field_, ControlField) else np.asarray(field_, dtype=float)


def step(state, eps_j: float, cache: PropagationCache) -> np.ndarray:
    psi = cache.to_frame(_check_state(state, cache))
    return cache.from_frame(cache.forward(psi, np.array([eps_j], dtype=float)))


def propagate_forward(psi0, field_, cache: PropagationCache, store: bool = False):
    psi = cache.to_frame(_check_state(psi0, cache))
    out = cache.forward(psi, _samples(field_), store)
    return Trajectory(cache.from_frame(out)) if store else cache.from_frame(out)


def propagate_backward(chiT, field_, cache: PropagationCache, store: bool = False):
    chi = cache.to_frame(_check_state(chiT, cache))
    out = cache.backward(chi, _samples(field_), store)
    return Trajectory(cache.from_frame(out)) if store else cache.from_frame(out)
