"""Experiment drivers: optimization sweeps, Brody maps, difference histograms,
connectivity maps. Each writes fixed-format CSV tables under an output directory."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import tables
from .basis import ChainParams, enumerate_sector, parity_adapt
from .config import ExperimentConfig, resolve_M
from .dynamics import make_propagation_cache, propagate_forward
from .field_analysis import analyze, power_spectrum
from .krotov import optimize
from .operators import (
    build_H0,
    build_H01,
    build_H1,
    build_Hc,
    build_Hc_long_range,
    build_control,
    matrix_in_eigenbasis,
)
from .protocols import build_process_A, build_process_B
from .spectral_stats import (
    MIN_FIT_SAMPLES,
    brody_fit,
    density_poisson,
    density_wigner_dyson,
    diagonalize,
    energy_differences,
    energy_spread,
    histogram,
    histogram_l1,
    level_spacings,
)

log = logging.getLogger(__name__)

METRICS_HEADER = ["process", "K", "gamma", "J", "seed", "dim", "omega_bw", "sipr", "siprn",
                  "fidelity", "iterations", "converged", "delta_E"]
BRODY_HEADER = ["K", "gamma", "epsilon", "beta", "b", "n_spacings", "flag"]


@dataclass(frozen=True)
class Cell:
    process: str
    K: int
    gamma: float
    J: float
    seed: int | None  # None for the deterministic process A

    @property
    def key(self) -> tuple:
        return (self.process, str(self.K), tables.fmt(self.gamma), tables.fmt(self.J),
                tables.fmt(self.seed))

    @property
    def name(self) -> str:
        s = "" if self.seed is None else f"_s{self.seed}"
        return f"{self.process}_K{self.K}_g{tables.fmt(self.gamma)}_J{tables.fmt(self.J)}{s}"

    def sort_key(self):
        return (self.process, self.K, self.J, self.gamma, -1 if self.seed is None else self.seed)


@dataclass
class CellResult:
    cell: Cell
    row: list
    times: np.ndarray
    field: np.ndarray
    history: list
    omega: np.ndarray
    power: np.ndarray
    final_state: np.ndarray
    converged: bool


def sweep_cells(cfg: ExperimentConfig) -> list[Cell]:
    cells = []
    for proc in cfg.processes:
        seeds = [None] if proc == "A" else list(cfg.seeds)
        for K in cfg.K_list:
            for s in seeds:
                for g in cfg.gamma_grid:
                    cells.append(Cell(proc, K, float(g), float(cfg.J), s))
                for J in cfg.J_grid:
                    if J != cfg.J:
                        cells.append(Cell(proc, K, float(cfg.J_inset_gamma), float(J), s))
    return sorted(set(cells), key=Cell.sort_key)


def cell_problem(cfg: ExperimentConfig, cell: Cell):
    """(params, basis, H01, Hc, psi0, psi_f) for one cell, in the + parity block."""
    params = ChainParams(cfg.L, cell.J, cell.gamma, cfg.alpha_z)
    pb = parity_adapt(enumerate_sector(cfg.L, cell.K), 1)
    H01 = build_H01(params, pb)
    Hc = build_control(params, pb, cfg.control)
    if cell.process == "A":
        psi0, psif = build_process_A(cfg.L, cell.K, pb)
    else:
        spec0 = diagonalize(build_H0(params, pb))
        psi0, psif = build_process_B(cfg.L, cell.K, pb, spec0, cell.seed,
                                     cfg.coefficient_distribution)
    return params, pb, H01, Hc, psi0, psif


def run_cell(cfg: ExperimentConfig, cell: Cell) -> CellResult:
    params, pb, H01, Hc, psi0, psif = cell_problem(cfg, cell)
    kcfg = cfg.krotov_config(params)
    res = optimize(psi0, psif, H01, Hc, kcfg)
    dE = energy_spread(diagonalize(H01))
    try:
        m = analyze(res.field, cfg.analysis.beta_cutoff, cfg.analysis.remove_dc)
        spec = power_spectrum(res.field, cfg.analysis.remove_dc)
        metrics = (m.omega_bw, m.sipr, m.siprn)
        omega, power = spec.omega, spec.power
    except ValueError as exc:
        # a field that never moved off a constant has no spectrum once DC is gone
        log.warning("cell %s: no spectral metrics (%s)", cell.name, exc)
        metrics = (float("nan"),) * 3
        omega = power = np.empty(0)
    final = propagate_forward(psi0, res.field, make_propagation_cache(H01, Hc, kcfg.dt))
    row = [cell.process, cell.K, cell.gamma, cell.J, cell.seed, pb.dim, *metrics,
           res.fidelity, res.iterations_used, res.converged, dE]
    return CellResult(cell, row, res.field.times, res.field.samples, list(res.fidelity_history),
                      omega, power, final, res.converged)


def _run_cell_job(args):
    cfg, cell = args
    return run_cell(cfg, cell)


def write_cell_artifacts(out: Path, r: CellResult) -> None:
    n = r.cell.name
    tables.write_table(out / "fields" / f"{n}.csv", ["t", "eps"], zip(r.times, r.field))
    tables.write_table(out / "history" / f"{n}.csv", ["iteration", "F"], enumerate(r.history))
    tables.write_table(out / "spectra" / f"{n}.csv", ["omega", "power_density"],
                       zip(r.omega, r.power))
    tables.write_table(out / "states" / f"{n}.csv", ["basis_index", "re", "im"],
                       ((i, z.real, z.imag) for i, z in enumerate(r.final_state)))


def _existing_rows(path: Path) -> dict:
    if not path.exists():
        return {}
    header, rows = tables.read_table(path)
    if header != METRICS_HEADER:
        raise ValueError(f"{path} has an unexpected header; refusing to resume into it")
    return {(r["process"], r["K"], r["gamma"], r["J"], r["seed"]): r for r in rows}


def run_sweep(cfg: ExperimentConfig, out=None, jobs: int | None = None, progress=None):
    """Optimize every cell, skipping ones already present in metrics.csv.

    Returns (n_run, n_skipped, nonconverged cell names)."""
    out = Path(out or cfg.out)
    jobs = jobs or cfg.jobs
    metrics = out / "metrics.csv"
    done = _existing_rows(metrics)
    cells = sweep_cells(cfg)
    todo = [c for c in cells if c.key not in done or not (out / "fields" / f"{c.name}.csv").exists()]
    if len(todo) < len(cells):
        log.info("resuming: %d of %d cells already done", len(cells) - len(todo), len(cells))
    if todo and done:
        # drop stale rows of cells about to be recomputed, keep the rest
        keep = [done[c.key] for c in cells if c.key in done and c not in todo]
        tables.write_table(metrics, METRICS_HEADER, ([r[h] for h in METRICS_HEADER] for r in keep))

    def handle(r: CellResult):
        write_cell_artifacts(out, r)
        tables.append_row(metrics, METRICS_HEADER, r.row)
        if progress:
            progress(r)

    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = [pool.submit(_run_cell_job, (cfg, c)) for c in todo]
            for f in as_completed(futs):
                handle(f.result())
    else:
        for c in todo:
            handle(run_cell(cfg, c))

    # canonical order so the table is independent of completion order
    header, rows = tables.read_table(metrics) if metrics.exists() else (METRICS_HEADER, [])
    by_key = {(r["process"], r["K"], r["gamma"], r["J"], r["seed"]): r for r in rows}
    ordered = [by_key[c.key] for c in cells if c.key in by_key]
    tables.write_table(metrics, METRICS_HEADER, ([r[h] for h in METRICS_HEADER] for r in ordered))
    nonconv = [_row_name(r) for r in ordered if r["converged"] != "1"]
    return len(todo), len(cells) - len(todo), nonconv


def _row_name(row: dict) -> str:
    return f"{row['process']}_K{row['K']}_g{row['gamma']}_J{row['J']}" + (
        f"_s{row['seed']}" if row["seed"] else "")


# ---- spectral-only experiments ------------------------------------------------

def brody_table(cfg: ExperimentConfig):
    """Rows (K, gamma, epsilon, beta, b, n, flag) of the Brody parameter map."""
    b = cfg.brody
    rows = []
    for K in b.K_list:
        pb = parity_adapt(enumerate_sector(b.L, K), 1)
        base = ChainParams(b.L, cfg.J, 0.0, cfg.alpha_z)
        H0 = build_H0(base, pb).data
        H1 = build_H1(base, pb).data
        Hc = build_Hc(base, pb).data
        for g in cfg.gamma_grid:
            for eps in b.epsilon_grid:
                E = np.linalg.eigvalsh(H0 + g * H1 + eps * Hc)
                try:
                    s = level_spacings(E, b.trim_fraction)
                except ValueError:
                    rows.append([K, g, eps, float("nan"), float("nan"), 0, "low_statistics"])
                    continue
                if len(s) < MIN_FIT_SAMPLES:
                    rows.append([K, g, eps, float("nan"), float("nan"), len(s), "low_statistics"])
                    continue
                fit = brody_fit(s)
                rows.append([K, g, eps, fit.beta, fit.b, fit.n, fit.flag or ""])
    return rows


def brody_means(rows):
    out = []
    keys = sorted({(r[0], r[1]) for r in rows})
    for K, g in keys:
        betas = [r[3] for r in rows if r[0] == K and r[1] == g and not np.isnan(r[3])]
        out.append([K, g, float(np.mean(betas)) if betas else float("nan"), len(betas)])
    return out


def run_brody(cfg: ExperimentConfig, out=None):
    out = Path(out or cfg.out)
    rows = brody_table(cfg)
    tables.write_table(out / "brody.csv", BRODY_HEADER, rows)
    tables.write_table(out / "brody_mean.csv", ["K", "gamma", "mean_beta", "n_epsilon"],
                       brody_means(rows))
    return rows


def run_diffhist(cfg: ExperimentConfig, out=None):
    """Histograms of normalized M-th order differences; returns {M: L1(first, last gamma)}."""
    out = Path(out or cfg.out)
    d = cfg.diffhist
    pb = parity_adapt(enumerate_sector(d.L, d.K), 1)
    spectra = {g: np.linalg.eigvalsh(build_H01(ChainParams(d.L, cfg.J, g, cfg.alpha_z), pb).data)
               for g in d.gammas}
    l1 = {}
    for Mspec in d.M_list:
        M = resolve_M(Mspec, pb.dim)
        hists = {}
        for g, E in spectra.items():
            h = histogram(energy_differences(E, M, d.trim_fraction), d.bins, (0.0, d.s_max))
            hists[g] = h
            edges, dens = h
            tables.write_table(out / "diffhist" / f"M{M}_gamma{tables.fmt(g)}.csv",
                               ["bin_left", "bin_right", "density"],
                               zip(edges[:-1], edges[1:], dens))
        l1[M] = histogram_l1(hists[d.gammas[0]], hists[d.gammas[-1]])
    tables.write_table(out / "diffhist" / "l1.csv", ["M", "l1_distance"], sorted(l1.items()))
    s = np.linspace(0.0, d.s_max, 401)
    tables.write_table(out / "diffhist" / "reference.csv", ["s", "poisson", "wigner_dyson"],
                       zip(s, density_poisson(s), density_wigner_dyson(s)))
    return l1


def connectivity_grids(cfg: ExperimentConfig) -> dict:
    """|matrix elements| of both controls in the computational K-sector basis and
    in the eigenbasis of H01 on the + parity block."""
    c = cfg.connmap
    L = c.L or cfg.L
    params = ChainParams(L, cfg.J, c.gamma, cfg.alpha_z)
    sector = enumerate_sector(L, c.K)
    pb = parity_adapt(sector, 1)
    spec = diagonalize(build_H01(params, pb))
    grids = {}
    for name, build in (("Hc", build_Hc), ("Hc_long_range", build_Hc_long_range)):
        grids[f"{name}_computational"] = np.abs(build(params, sector).data)
        grids[f"{name}_eigen"] = np.abs(matrix_in_eigenbasis(build(params, pb), spec).data)
    return grids


def run_connmap(cfg: ExperimentConfig, out=None):
    out = Path(out or cfg.out)
    grids = connectivity_grids(cfg)
    thr = cfg.connmap.threshold * cfg.J
    summary = []
    for name, G in grids.items():
        # only nonzero entries are listed; absent (row, col) pairs are exact zeros
        r, c = np.nonzero(G > 1e-14)
        tables.write_table(out / "connmap" / f"{name}.csv", ["row", "col", "value"],
                           zip(r, c, G[r, c]))
        off = ~np.eye(len(G), dtype=bool)
        summary.append([name, len(G), int(np.sum(G > thr)), int(np.sum((G > thr) & off)),
                        float(np.mean(G[off] > thr)) if len(G) > 1 else 0.0])
    tables.write_table(out / "connmap" / "summary.csv",
                       ["grid", "dim", "n_above", "n_offdiag_above", "offdiag_fraction"], summary)
    return grids
