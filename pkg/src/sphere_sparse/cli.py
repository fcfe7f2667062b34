"""Command line interface.

`sphere-sparse run --config exp.toml [--emit-dir DIR] [--oracle] [--n-jobs K]`
runs the experiment described by the config file and exits 0 when every
realisation converged, 2 otherwise.  `sphere-sparse make-map` generates or
ingests test maps into the binary container format.

The config is a TOML file whose `[experiment]` table mirrors ExperimentSpec:

    [experiment]
    kind = "inpaint"            # inpaint | deconvolve | inpaint+deconvolve | denoise
    L = 32
    N = 1
    setting = "synthesis"       # or "analysis"
    eta = 2.5
    input_snr_db = 46.0
    n_m = [0.3, 0.5, 1.0]
    realisations = 10
    seed = 0

    [input]                     # optional; defaults to a continents map
    kind = "continents"         # band-limited-noise | continents | ingested
    seed = 1
    # path = "earth.ssmap"      # for kind = "ingested"
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from . import harness, mapio
from .harness import ExperimentSpec, make_testmap, run_experiment


def _load_config(path: str) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _spec_from_config(cfg: dict) -> ExperimentSpec:
    exp = dict(cfg.get("experiment", {}))
    if "n_m" in exp:
        exp["n_m"] = tuple(exp["n_m"])
    known = {f.name for f in ExperimentSpec.__dataclass_fields__.values()}
    unknown = set(exp) - known
    if unknown:
        raise SystemExit(f"unknown experiment keys: {sorted(unknown)}")
    return ExperimentSpec(**exp)


def _input_map(cfg: dict, L: int):
    src = dict(cfg.get("input", {}))
    kind = src.pop("kind", "continents")
    return make_testmap(kind, L, **src)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    spec = _spec_from_config(cfg)
    input_map = _input_map(cfg, spec.L)
    report = run_experiment(
        spec,
        input_map,
        emit_dir=args.emit_dir,
        oracle=args.oracle,
        n_jobs=args.n_jobs,
    )
    print(report.sweep_text(), end="")
    print(f"wall time: {report.wall_time:.1f} s")
    if args.emit_dir:
        print(f"artifacts written to {args.emit_dir}")
    return 0 if report.all_converged else 2


def cmd_make_map(args: argparse.Namespace) -> int:
    smap = make_testmap(
        args.kind, args.L, seed=args.seed, path=args.path, spectrum_slope=args.spectrum_slope
    )
    mapio.write_ssmap(args.out, smap)
    print(f"wrote {args.out} (L={args.L}, kind={args.kind})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sphere-sparse", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment from a config file")
    run_p.add_argument("--config", required=True, help="TOML experiment description")
    run_p.add_argument("--emit-dir", default=None, help="directory for maps/tables/figures")
    run_p.add_argument("--oracle", action="store_true", help="force dense-oracle transforms")
    run_p.add_argument("--n-jobs", type=int, default=1, help="parallel realisations")
    run_p.set_defaults(func=cmd_run)

    mk = sub.add_parser("make-map", help="generate or ingest a test map")
    mk.add_argument("--kind", default="continents",
                    choices=["band-limited-noise", "continents", "ingested"])
    mk.add_argument("--L", type=int, required=True)
    mk.add_argument("--seed", type=int, default=0)
    mk.add_argument("--path", default=None, help="source container for kind=ingested")
    mk.add_argument("--spectrum-slope", type=float, default=2.0)
    mk.add_argument("--out", required=True)
    mk.set_defaults(func=cmd_make_map)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
