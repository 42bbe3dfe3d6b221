"""Command line entry point.

    spinoc sweep    --preset desk --out runs/desk --jobs 2
    spinoc brody    --preset paper --out runs/brody
    spinoc diffhist --out runs/hist
    spinoc connmap  --out runs/conn
    spinoc optimize --process A --K 2 --gamma 0.5 --out runs/one
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__, _backend, experiments, tables
from .config import ConfigError, load

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3

log = logging.getLogger("spinoc")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment configuration")
    p.add_argument("--preset", choices=["desk", "paper"], help="named defaults, applied under --config")
    p.add_argument("--out", help="output directory (default from config)")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinoc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="optimize every (process, K, gamma, J, seed) cell")
    _common(p)
    p.add_argument("--allow-nonconverged", action="store_true",
                   help="exit 0 even if some cell misses the target fidelity")

    for name, text in (("brody", "Brody parameter over (gamma, epsilon)"),
                       ("diffhist", "histograms of M-th order level differences"),
                       ("connmap", "control connectivity maps")):
        _common(sub.add_parser(name, help=text))

    p = sub.add_parser("optimize", help="a single optimization cell")
    _common(p)
    p.add_argument("--process", choices=["A", "B"], default="A")
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--J", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--allow-nonconverged", action="store_true")

    sub.add_parser("version", help="print version and kernel backend")
    return ap


def _config(args):
    return load(args.config, preset=args.preset, out=args.out, jobs=args.jobs)


def _write_config(cfg, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")


def cmd_sweep(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out)
    _write_config(cfg, out)

    def progress(r):
        row = dict(zip(experiments.METRICS_HEADER, map(tables.fmt, r.row)))
        log.info("%s F=%s it=%s omega_bw=%s", r.cell.name, row["fidelity"], row["iterations"],
                 row["omega_bw"])

    n_run, n_skip, nonconv = experiments.run_sweep(cfg, out, progress=progress)
    print(f"cells run: {n_run}, skipped: {n_skip}, not converged: {len(nonconv)}")
    for name in nonconv:
        print(f"  not converged: {name}")
    if nonconv and cfg.fail_on_nonconverged and not args.allow_nonconverged:
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_brody(args) -> int:
    cfg = _config(args)
    _write_config(cfg, Path(cfg.out))
    rows = experiments.run_brody(cfg)
    for K, g, mean, _ in experiments.brody_means(rows):
        print(f"K={K} gamma={tables.fmt(g)} mean_beta={tables.fmt(mean)}")
    return EXIT_OK


def cmd_diffhist(args) -> int:
    cfg = _config(args)
    _write_config(cfg, Path(cfg.out))
    for M, d in sorted(experiments.run_diffhist(cfg).items()):
        print(f"M={M} l1={tables.fmt(d)}")
    return EXIT_OK


def cmd_connmap(args) -> int:
    cfg = _config(args)
    _write_config(cfg, Path(cfg.out))
    experiments.run_connmap(cfg)
    _, rows = tables.read_table(Path(cfg.out) / "connmap" / "summary.csv")
    for r in rows:
        print(f"{r['grid']}: dim={r['dim']} above_threshold={r['n_above']} "
              f"offdiag_fraction={r['offdiag_fraction']}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out)
    _write_config(cfg, out)
    cell = experiments.Cell(args.process, args.K, args.gamma,
                            cfg.J if args.J is None else args.J,
                            None if args.process == "A" else args.seed)
    try:
        cfg.chain(cell.gamma, cell.J)
        experiments.cell_problem(cfg, cell)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    r = experiments.run_cell(cfg, cell)
    experiments.write_cell_artifacts(out, r)
    tables.write_table(out / "metrics.csv", experiments.METRICS_HEADER, [r.row])
    for k, v in zip(experiments.METRICS_HEADER, r.row):
        print(f"{k} = {tables.fmt(v)}")
    if not r.converged and cfg.fail_on_nonconverged and not args.allow_nonconverged:
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_version(args) -> int:
    print(f"spinoc {__version__} (kernels: {_backend.NAME})")
    return EXIT_OK


COMMANDS = {
    "sweep": cmd_sweep,
    "brody": cmd_brody,
    "diffhist": cmd_diffhist,
    "connmap": cmd_connmap,
    "optimize": cmd_optimize,
    "version": cmd_version,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
