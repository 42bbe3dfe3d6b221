"""Declarative experiment configuration (a single JSON document) and presets."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .basis import ChainParams
from .field_analysis import DEFAULT_BETA_CUTOFF
from .krotov import DEFAULT_LAMBDA_SCALE, HORIZON_IN_TRANSFER_TIMES, KrotovConfig
from .operators import ControlKind


class ConfigError(ValueError):
    pass


@dataclass
class KrotovSection:
    horizon_transfer_times: float = HORIZON_IN_TRANSFER_TIMES
    J_dt: float = 1e-2
    lambda0: float | None = None
    lambda_scale: float = DEFAULT_LAMBDA_SCALE
    normalize_by_control: bool = True
    target_fidelity: float = 0.99
    max_iterations: int = 5000
    guess: float = 0.1


@dataclass
class AnalysisSection:
    beta_cutoff: float = DEFAULT_BETA_CUTOFF
    remove_dc: bool = True


@dataclass
class BrodySection:
    L: int = 15
    K_list: list = field(default_factory=lambda: [1, 2, 3, 4])
    epsilon_grid: list = field(default_factory=lambda: np.linspace(-3, 3, 13).round(12).tolist())
    trim_fraction: float = 0.1


@dataclass
class DiffHistSection:
    L: int = 15
    K: int = 4
    gammas: list = field(default_factory=lambda: [0.0, 1.0])
    # integers, or the string "D/10" for ceil(dim / 10)
    M_list: list = field(default_factory=lambda: [1, 5, 20, "D/10"])
    bins: int = 40
    s_max: float = 4.0
    trim_fraction: float = 0.0


@dataclass
class ConnMapSection:
    L: int | None = None  # None: chain L
    K: int = 2
    gamma: float = 1.0
    threshold: float = 0.01


@dataclass
class ExperimentConfig:
    L: int = 9
    J: float = 1.0
    alpha_z: float = 0.5
    processes: list = field(default_factory=lambda: ["A", "B"])
    K_list: list = field(default_factory=lambda: [1, 2])
    gamma_grid: list = field(default_factory=lambda: np.linspace(0, 1, 11).round(12).tolist())
    J_grid: list = field(default_factory=list)
    J_inset_gamma: float = 1.0
    control: str = "local"
    seeds: list = field(default_factory=lambda: [0])
    coefficient_distribution: str = "gaussian"
    krotov: KrotovSection = field(default_factory=KrotovSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)
    brody: BrodySection = field(default_factory=BrodySection)
    diffhist: DiffHistSection = field(default_factory=DiffHistSection)
    connmap: ConnMapSection = field(default_factory=ConnMapSection)
    out: str = "out"
    jobs: int = 1
    fail_on_nonconverged: bool = True

    def chain(self, gamma: float = 0.0, J: float | None = None) -> ChainParams:
        return ChainParams(self.L, self.J if J is None else J, gamma, self.alpha_z)

    def krotov_config(self, params: ChainParams) -> KrotovConfig:
        k = self.krotov
        return KrotovConfig.for_chain(
            params,
            T=k.horizon_transfer_times * params.transfer_time,
            dt=k.J_dt / params.J,
            lambda0=k.lambda0,
            lambda_scale=k.lambda_scale,
            normalize_by_control=k.normalize_by_control,
            target_fidelity=k.target_fidelity,
            max_iterations=k.max_iterations,
            guess=k.guess,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> "ExperimentConfig":
        try:
            self.chain()
            for g in self.gamma_grid:
                self.chain(g)
            for J in self.J_grid:
                self.chain(self.J_inset_gamma, J)
            self.krotov_config(self.chain())
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        _require(self.gamma_grid, "gamma_grid must be non-empty")
        _require(self.K_list, "K_list must be non-empty")
        _require(self.processes, "processes must be non-empty")
        _require(self.seeds, "seeds must be non-empty")
        for p in self.processes:
            _require(p in ("A", "B"), f"unknown process {p!r}")
        for K in self.K_list:
            _require(isinstance(K, int) and 1 <= K < self.L, f"K={K} outside [1, L)")
            if "A" in self.processes:
                _require(2 * K < self.L and self.L % 2 == 1,
                         f"process A needs odd L and 2K < L (K={K}, L={self.L})")
        try:
            ControlKind(self.control)
        except ValueError as exc:
            raise ConfigError(f"unknown control kind {self.control!r}") from exc
        _require(self.coefficient_distribution in ("gaussian", "uniform_phase"),
                 f"unknown coefficient distribution {self.coefficient_distribution!r}")
        _require(0 < self.analysis.beta_cutoff < 1, "beta_cutoff must lie in (0, 1)")
        _require(self.brody.epsilon_grid, "brody.epsilon_grid must be non-empty")
        _require(0 <= self.brody.trim_fraction < 0.5, "brody.trim_fraction must lie in [0, 0.5)")
        _require(0 <= self.diffhist.trim_fraction < 0.5, "diffhist.trim_fraction must lie in [0, 0.5)")
        for K in self.brody.K_list:
            _require(isinstance(K, int) and 1 <= K < self.brody.L, f"brody K={K} out of range")
        _require(self.diffhist.M_list, "diffhist.M_list must be non-empty")
        for M in self.diffhist.M_list:
            _require(M == "D/10" or (isinstance(M, int) and M >= 1), f"bad M entry {M!r}")
        _require(isinstance(self.jobs, int) and self.jobs >= 1, "jobs must be a positive integer")
        return self


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


PRESETS = {
    "desk": {},
    "paper": {
        "L": 15,
        "K_list": [1, 2, 3, 4],
        "J_grid": [0.5, 2.0],
        "connmap": {"L": 15, "K": 3},
    },
}

_SECTIONS = {
    "krotov": KrotovSection,
    "analysis": AnalysisSection,
    "brody": BrodySection,
    "diffhist": DiffHistSection,
    "connmap": ConnMapSection,
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def from_dict(doc: dict) -> ExperimentConfig:
    doc = dict(doc)
    preset = doc.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        doc = _merge(PRESETS[preset], doc)
    top = {f.name for f in fields(ExperimentConfig)}
    unknown = set(doc) - top
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kw = {}
    for k, v in doc.items():
        if k in _SECTIONS:
            if not isinstance(v, dict):
                raise ConfigError(f"section {k!r} must be an object")
            allowed = {f.name for f in fields(_SECTIONS[k])}
            bad = set(v) - allowed
            if bad:
                raise ConfigError(f"unknown keys in {k!r}: {sorted(bad)}")
            kw[k] = _SECTIONS[k](**v)
        else:
            kw[k] = v
    return ExperimentConfig(**kw).validate()


def load(path=None, preset: str | None = None, **overrides) -> ExperimentConfig:
    doc = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    if preset is not None:
        doc = {**doc, "preset": preset}
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return from_dict(doc)


def resolve_M(M, dim: int) -> int:
    return math.ceil(dim / 10) if M == "D/10" else int(M)
