"""Command line runner: one subcommand per experiment kind.

    wzwlab <kind> --config PATH [--out DIR] [--seed N] [--threads N]
                  [--validate]

Exit codes: 0 success, 2 config error, 3 precondition failure (inadmissible
data), 4 solver divergence, 5 invariant violated beyond tolerance.  Outputs
per run: manifest.json, per-experiment CSV tables, summary.csv with the
pass/fail margins, and a PNG figure alongside the tables.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import EXPERIMENT_KINDS, ExperimentConfig
from .errors import ConfigError, PreconditionError, SolverDiverged, WzwError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_DIVERGED = 4
EXIT_INVARIANT = 5


def _apply_thread_limit(n: int) -> None:
    # WZWLAB_THREADS overrides the flag; BLAS pools are capped when
    # threadpoolctl is available, otherwise the setting is advisory.
    n = int(os.environ.get("WZWLAB_THREADS", n))
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=max(1, n))
    except Exception:
        pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wzwlab",
        description="experiment runner for the WZW / harmonic-map lab")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", required=True, help="flat key=value file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--threads", type=int, default=None,
                       help="BLAS thread cap (env WZWLAB_THREADS overrides)")
        p.add_argument("--validate", action="store_true",
                       help="dry-run admissibility checks only")
    return parser


def _load_config(args) -> ExperimentConfig:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    cfg = ExperimentConfig.from_text(text, kind=args.kind)
    if args.seed is not None:
        cfg.seed = int(args.seed)
    if args.threads is not None:
        cfg.threads = int(args.threads)
    if args.out is not None:
        cfg.out_dir = args.out
    cfg.validate_budgets()
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    _apply_thread_limit(cfg.threads)

    from .experiments import run_experiment, validate_experiment
    from .report import render_figure, write_csv_atomic, write_manifest, write_summary

    if args.validate:
        try:
            for note in validate_experiment(cfg):
                print(note)
        except PreconditionError as exc:
            print(f"precondition: {exc}", file=sys.stderr)
            return EXIT_PRECONDITION
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print("ok")
        return EXIT_OK

    import time

    started = time.time()
    try:
        result = run_experiment(cfg)
    except PreconditionError as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SolverDiverged as exc:
        print(f"solver diverged: {exc} (residual {exc.residual:.3e} after "
              f"{exc.sweeps} sweeps)", file=sys.stderr)
        return EXIT_DIVERGED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WzwError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION

    out_dir = cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    for name, (header, rows) in result.tables.items():
        write_csv_atomic(os.path.join(out_dir, f"{name}.csv"), header, rows)
    write_manifest(out_dir, {
        "experiment": cfg.kind,
        "config": cfg.echo(),
        "seed": cfg.seed,
        "argv": list(argv) if argv is not None else sys.argv[1:],
        "wall_seconds": time.time() - started,
    })
    if cfg.figures:
        render_figure(out_dir, cfg.kind, result.tables)
    ok = write_summary(out_dir, result.checks)
    if not ok:
        failing = [c for c in result.checks if not c.passed]
        for c in failing:
            print(f"invariant violated: {c.name} value={c.value:.6g} "
                  f"{c.direction} tol={c.tolerance:.6g}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
