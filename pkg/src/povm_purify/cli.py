"""Command-line entry point.

Usage follows ``povm-purify <experiment> [--param value ...] [--config path]
[--out path] [--seed u64] [--plot]``.  Each run writes one CSV table; with
``--plot`` a rendered figure is written next to it.  Exit codes: 0 success,
2 validation error, 3 resource or numerics error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import (
    ConvergenceError,
    NumericsError,
    ResourceLimitError,
    ValidationError,
)
from .harness import (
    DEFAULT_SEED,
    EXPERIMENTS,
    FIGURES,
    ExperimentConfig,
    parse_param_text,
    run,
)

_PARAM_HELP = {
    "a": "population of |0> (float in [0,1])",
    "beta": "measurement noise strength (float in [0,1/2])",
    "theta": "polar angle in radians (float in [0,pi])",
    "alpha": "d-level depolarizing weight (float in [0,1]; grids allowed)",
    "M": "number of POVM uses (int; grids like 1..20 allowed)",
    "n": "number of runs (int; grids allowed)",
    "d": "alphabet size (int >= 2)",
    "eta": "quantum efficiency (float in (0,1]; grids allowed)",
    "g": "photon-number gain (int >= 1; grids allowed)",
    "r": "squeeze parameter (float >= 0; grids allowed)",
    "G": "phase-insensitive power gain (float >= 1; grids allowed)",
    "blocks": "number of blocks for variance estimation (int >= 2)",
    "reps": "Monte Carlo repetitions for fig5 (int >= 2)",
    "N": "input copies; recorded but must be 1",
    "state": "input state, fock:<n> or coherent:<mean photon number>",
    "tie_rule": "majority-vote tie handling: odd_only or random_tie",
}

_EXPERIMENT_PARAMS = {
    "dist": ("beta", "a", "theta", "M"),
    "estimate": ("beta", "a", "M", "n", "blocks", "N"),
    "mi": ("beta", "M"),
    "mi-binary": ("beta", "M"),
    "mi-majority": ("beta", "M", "tie_rule"),
    "mi-qudit": ("d", "alpha", "M"),
    "cv-photo": ("state", "eta", "g"),
    "cv-homodyne": ("state", "eta", "r"),
    "cv-heterodyne": ("state", "eta", "G"),
    "reproduce": ("reps",),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="povm-purify",
        description="Quantify how cloning and preamplification purify noisy quantum measurements.",
    )
    subparsers = parser.add_subparsers(dest="experiment", required=True)
    for experiment in EXPERIMENTS:
        sub = subparsers.add_parser(experiment)
        if experiment == "reproduce":
            sub.add_argument("figure", choices=FIGURES, help="figure data series to emit")
        for name in _EXPERIMENT_PARAMS[experiment]:
            sub.add_argument(f"--{name.replace('_', '-')}", dest=name, help=_PARAM_HELP[name])
        sub.add_argument("--config", help="key=value parameter file; CLI flags win")
        sub.add_argument("--out", help="output CSV path (default: <experiment>.csv)")
        sub.add_argument("--seed", type=int, default=None, help="RNG seed (u64)")
        sub.add_argument("--plot", action="store_true", help="also render a PNG next to the CSV")
    return parser


def _read_config_file(path: str) -> dict:
    params = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}: malformed config line {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        params[key] = value
    return params


def _assemble_config(args: argparse.Namespace) -> ExperimentConfig:
    texts: dict[str, str] = {}
    if args.config:
        texts.update(_read_config_file(args.config))
    texts.pop("experiment", None)
    for name in _EXPERIMENT_PARAMS[args.experiment]:
        supplied = getattr(args, name, None)
        if supplied is not None:
            texts[name] = supplied
    seed = args.seed
    if seed is None and "seed" in texts:
        seed = int(texts["seed"])
    texts.pop("seed", None)
    if getattr(args, "figure", None) is not None:
        texts["figure"] = args.figure
    params = {name: parse_param_text(name, value) for name, value in texts.items()}
    return ExperimentConfig(
        experiment=args.experiment,
        params=params,
        output_path=args.out,
        seed=DEFAULT_SEED if seed is None else seed,
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _assemble_config(args)
        table = run(config)
        default_name = args.figure if args.experiment == "reproduce" else args.experiment
        out_path = Path(config.output_path or f"{default_name}.csv")
        table.write_csv(out_path)
        print(f"wrote {out_path} ({len(table.rows)} rows)")
        if args.plot:
            from .plotting import render_table

            png_path = out_path.with_suffix(".png")
            render_table(table, png_path)
            print(f"wrote {png_path}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ResourceLimitError, NumericsError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
