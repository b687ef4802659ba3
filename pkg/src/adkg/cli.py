"""Command line entry point: ``adkg <stage> --config FILE [--seed N] [--offline] [--out DIR]``.

Exit status is 0 on success, 1 when the data or a model response fails
validation, and 2 for usage errors, bad configuration or missing
prerequisite artifacts.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from adkg.config import PipelineConfig, bundled_config_path
from adkg.errors import AdkgError, PipelineError
from adkg.pipeline import STAGES, run_stage

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline YAML (default: bundled synthetic config)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--offline", action="store_true", help="force mock LLM providers and literature")
    common.add_argument("--out", default="adkg_out", help="artifact directory (default: adkg_out)")
    common.add_argument("--workers", type=int, help="worker threads; never changes results")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="adkg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="stage", metavar="stage")
    sub.required = True
    helps = {
        "ingest": "load or generate cohorts",
        "analyze": "per-modality statistics and correlation tables",
        "build-graph": "knowledge graph plus JSON/GraphML/DOT exports",
        "communities": "Louvain partition and modularity",
        "hypothesize": "prompts, model responses and parsed hypotheses",
        "validate": "null-model tests, rater agreement, replication",
        "report": "markdown report with SVG figures",
        "all": "every stage in order",
    }
    for name in (*STAGES, "all"):
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers is not None and args.workers < 1:
        print("adkg: --workers must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = PipelineConfig.load(Path(args.config) if args.config else bundled_config_path())
        cfg = cfg.override(seed=args.seed, offline=args.offline, workers=args.workers)
        run_stage(args.stage, cfg, Path(args.out))
    except PipelineError as exc:
        print(f"adkg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AdkgError as exc:
        print(f"adkg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
