"""Command-line interface.

Each subcommand runs one pipeline stage (or the whole pipeline) under a
YAML config. Exit codes: 0 success, 2 validation error (bad config or
schema), 3 data error (inconsistent or insufficient data), 4 numeric error
(singular or non-convergent computation).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from .atlas import Pipeline, PipelineConfig
from .errors import DataError, NumericError, TechspaceError, ValidationError
from .synthlab import GeneratorParams, gen_corpus

STAGE_COMMANDS = {
    "ingest": ["ingest"],
    "rta": ["ingest", "rta"],
    "entries": ["ingest", "entries"],
    "proximity": ["ingest", "proximity"],
    "density": ["ingest", "density"],
    "complexity": ["ingest", "complexity"],
    "figure2": ["ingest", "figure2"],
    "panel": ["ingest", "panel"],
    "regress": ["ingest", "regress"],
    "split-regress": ["ingest", "split-regress"],
    "export-space": ["ingest", "export-space"],
    "export-heatmap": ["ingest", "export-heatmap"],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="techspace",
        description="Firm-level technology-space analytics pipeline.")
    parser.add_argument("--config", help="YAML pipeline config file")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="random seed (overrides config)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads (accepted for compatibility)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in STAGE_COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage")
        p.set_defaults(stages=STAGE_COMMANDS[name])

    sub.add_parser("run", help="run the full pipeline and write a manifest")

    synth = sub.add_parser("synth", help="generate a synthetic corpus with "
                                         "known ground truth")
    synth.add_argument("--params", help="YAML/JSON file of generator "
                                        "parameter overrides")
    return parser


def _load_config(args) -> PipelineConfig:
    if not args.config:
        raise ValidationError("--config is required for this command")
    config = PipelineConfig.from_file(args.config)
    if args.out:
        config.out_dir = args.out
    if args.seed is not None:
        config.seed = args.seed
    if args.threads:
        config.threads = args.threads
    return config


def _run_stages(config: PipelineConfig, stages: list[str]) -> None:
    pipe = Pipeline(config)
    pipe.out_dir.mkdir(parents=True, exist_ok=True)
    runners = dict(Pipeline.STAGES)
    for name in stages:
        try:
            runners[name](pipe)
        except TechspaceError as exc:
            raise type(exc)(f"stage {name!r} failed: {exc}") from exc


def _cmd_synth(args) -> None:
    overrides = {}
    if args.params:
        with open(args.params) as fh:
            overrides = yaml.safe_load(fh) or {}
        if not isinstance(overrides, dict):
            raise ValidationError("generator params file must be a mapping")
    if args.seed is not None:
        overrides["seed"] = args.seed
    if "years" in overrides:
        overrides["years"] = tuple(overrides["years"])
    try:
        params = GeneratorParams(**overrides)
    except TypeError as exc:
        raise ValidationError(f"bad generator parameter: {exc}") from exc
    out = Path(args.out or "synth_corpus")
    out.mkdir(parents=True, exist_ok=True)
    paths = gen_corpus(params, out)
    print(json.dumps({k: str(v) for k, v in paths.items()}, indent=2))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            _cmd_synth(args)
        elif args.command == "run":
            manifest = Pipeline(_load_config(args)).run()
            print(json.dumps({"out_dir": manifest["config"]["out_dir"],
                              "artifacts": sorted(manifest["artifacts"])},
                             indent=2))
        else:
            _run_stages(_load_config(args), args.stages)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except TechspaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
