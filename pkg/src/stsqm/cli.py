"""Command line entry point: ``stsqm run|validate|list-kinds``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import KINDS, REQUIRED, load_config
from .errors import ConfigError, StageError

OUTPUT_ENV = "STSQM_OUTPUT_DIR"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stsqm", description="Run arrival-time scenarios from YAML configs")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a scenario")
    run.add_argument("config")
    run.add_argument("--out", default=None, help=f"output directory (overrides ${OUTPUT_ENV} and the config)")
    run.add_argument("--seed", type=int, default=None, help="seed for fixture-search utilities")
    val = sub.add_parser("validate", help="parse a config and print it with defaults filled")
    val.add_argument("config")
    sub.add_parser("list-kinds", help="list scenario kinds and their required keys")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def resolve_output_dir(cli_value: str | None, config_value: str) -> str:
    if cli_value:
        return cli_value
    return os.environ.get(OUTPUT_ENV) or config_value


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")

    if args.command == "list-kinds":
        for k in KINDS:
            req = ", ".join(REQUIRED[k]) or "-"
            print(f"{k:18s} requires: {req}")
        return 0

    try:
        cfg = load_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(json.dumps(cfg.to_dict(), indent=2))
        return 0

    from .scenarios import run_scenario

    out = resolve_output_dir(args.out, cfg.output_dir)
    try:
        man = run_scenario(cfg, out, args.seed)
    except (StageError, ConfigError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    print(f"{cfg.kind}: wrote {len(man.outputs)} file(s) to {out}")
    for k, v in man.results.items():
        print(f"  {k}: {v}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
