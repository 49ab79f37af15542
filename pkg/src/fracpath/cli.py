"""Command-line interface.

    fracpath <experiment> --config FILE [--seed N] [--threads K] [--out DIR]
    fracpath verify [--filter PAT] [--seed N]
    fracpath oracle-build --out FILE

Exit codes: 0 ok, 1 verification failures, 2 configuration errors.  The
default thread count honors FRACPATH_THREADS but never affects results.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import EXPERIMENTS, ConfigError, load_config
from .experiments import run_experiment
from .oracles import write_oracle_file
from .verify import render_table, run_checks


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracpath", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in EXPERIMENTS:
        if name == "verify":
            continue
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="experiment config file (key = value lines)")
        p.add_argument("--seed", type=int, default=None, help="run this single seed instead of the config's list")
        p.add_argument("--threads", type=int, default=None, help="worker threads (results are thread-count independent)")
        p.add_argument("--out", default=None, help="output directory override")

    v = sub.add_parser("verify", help="run the named verification checks")
    v.add_argument("--filter", default="*", help="fnmatch pattern over check ids (e.g. 'oracle_*')")
    v.add_argument("--seed", type=int, default=0)

    ob = sub.add_parser("oracle-build", help="recompute the pinned oracle corpus")
    ob.add_argument("--out", required=True, help="output file for the corpus")
    return parser


def _default_threads(flag_value) -> int:
    if flag_value is not None:
        return max(1, int(flag_value))
    env = os.environ.get("FRACPATH_THREADS")
    return max(1, int(env)) if env else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "verify":
        results = run_checks(args.filter, seed=args.seed)
        if not results:
            print(f"warning: no checks match filter {args.filter!r}")
        sys.stdout.write(render_table(results))
        return 0 if all(r.passed for r in results) else 1

    if args.command == "oracle-build":
        write_oracle_file(args.out)
        print(f"oracle corpus written to {args.out}")
        return 0

    try:
        cfg = load_config(args.config)
        if cfg.experiment != args.command:
            raise ConfigError(
                f"config declares experiment = {cfg.experiment!r} but the command is {args.command!r}"
            )
        if args.seed is not None:
            cfg = type(cfg)(
                experiment=cfg.experiment,
                generator=cfg.generator,
                bv=cfg.bv,
                params=cfg.params,
                seeds=(args.seed,),
                refinements=cfg.refinements,
                output_dir=cfg.output_dir,
                raw={**cfg.raw, "seeds": str(args.seed)},
            )
    except (ConfigError, OSError) as exc:
        print(f"config_error = {exc}", file=sys.stderr)
        return 2
    out = run_experiment(cfg, threads=_default_threads(args.threads), out_dir=args.out)
    print(f"results written to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
