"""Command-line entry point: ``codelineage <stage> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from codelineage import __version__, baseline, similarity
from codelineage.corpus import parse_timestamp
from codelineage.errors import DataError, PrerequisiteError
from codelineage.pipeline import STAGES, RunConfig, run_pipeline

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PREREQUISITE = 3

log = logging.getLogger("codelineage")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _timestamp(value: str):
    try:
        return parse_timestamp(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO-8601 timestamp: {value!r}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--manifest", type=Path, help="project manifest (JSON Lines)")
    g.add_argument("-o", "--out", type=Path, default=Path("out"), help="artifact directory (default: out)")
    g.add_argument("-j", "--jobs", type=int, default=1, help="worker threads (output does not depend on it)")
    g.add_argument("--extensions", type=Path, help="extension<TAB>language table overriding the shipped one")
    g.add_argument(
        "--all-repos",
        action="store_true",
        help="use every repository, not only those in selection.csv",
    )
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _add_stage_options(name: str, p: argparse.ArgumentParser) -> None:
    if name in ("select", "pipeline"):
        p.add_argument("--reference-time", type=_timestamp, help="'now' for staleness (default: latest last_update)")
        p.add_argument("--exclusions", type=Path, help="exclusion list overriding the shipped one")
        p.add_argument("--overrides", type=Path, help="CSV of project_id,repo_id,pin|ban applied after selection")
    if name in ("derive-name", "pipeline"):
        p.add_argument("--stoplist", type=Path, help="common-word project names never used as prefixes")
    if name in ("derive-copyright", "pipeline"):
        p.add_argument("--aliases", type=Path, help="CSV pattern,project_id of altered project names")
        p.add_argument("--authors", type=Path, help="CSV pattern,project_id of known contributors")
        p.add_argument("--library-authors", type=Path, help="library copyright holders that never resolve")
    if name in ("similarity", "pipeline"):
        p.add_argument(
            "--threshold",
            type=float,
            default=similarity.DEFAULT_THRESHOLD,
            help="edge when S_hash(A,B) exceeds this (default: %(default)s)",
        )
    if name in ("baseline", "pipeline"):
        p.add_argument("--versions", type=Path, help="existing baseline versions JSON")
        p.add_argument("--history", type=Path, help="commit log of the reference codebase")
        p.add_argument("--trees", type=Path, help="directory holding one materialized tree per commit hash")
        p.add_argument("--start", type=_timestamp, help="first grid point (default: first commit)")
        p.add_argument(
            "--interval-days", type=int, default=baseline.DEFAULT_INTERVAL_DAYS, help="grid spacing (default: %(default)s)"
        )
        p.add_argument(
            "--bands",
            default=",".join(str(b) for b in baseline.DEFAULT_BANDS),
            help="comma-separated minimum scores for the version histogram",
        )
    if name in ("report", "pipeline"):
        p.add_argument(
            "--contains",
            action="append",
            default=[],
            metavar="GLOB",
            help="also list projects with a file matching GLOB (repeatable)",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="codelineage", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    helps = {
        "index": "enumerate and hash source files into index.json",
        "select": "rate repositories and pick the top 20%% per project",
        "derive-name": "name-prefix derivations",
        "derive-commit": "Git-fork derivations from shared commits",
        "derive-copyright": "derivations from copyright attributions",
        "similarity": "file-hash similarity graph (needs index)",
        "baseline": "match projects to dated versions of a reference codebase (needs index)",
        "solidity": "profile Solidity contracts",
        "report": "merge all derivation edges into one table",
        "pipeline": "run every stage in order",
    }
    for name in [*STAGES, "pipeline"]:
        p = sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
        _add_stage_options(name, p)
    demo = sub.add_parser("demo", help="write the bundled demo corpus", description="write the bundled demo corpus")
    demo.add_argument("directory", type=Path)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    bands = getattr(args, "bands", None)
    return RunConfig(
        manifest=args.manifest,
        out_dir=args.out,
        threshold=getattr(args, "threshold", similarity.DEFAULT_THRESHOLD),
        interval_days=getattr(args, "interval_days", baseline.DEFAULT_INTERVAL_DAYS),
        reference_time=getattr(args, "reference_time", None),
        extensions=args.extensions,
        exclusions=getattr(args, "exclusions", None),
        overrides=getattr(args, "overrides", None),
        stoplist=getattr(args, "stoplist", None),
        aliases=getattr(args, "aliases", None),
        authors=getattr(args, "authors", None),
        library_authors=getattr(args, "library_authors", None),
        jobs=args.jobs,
        all_repos=args.all_repos,
        baseline_versions=getattr(args, "versions", None),
        baseline_history=getattr(args, "history", None),
        baseline_trees=getattr(args, "trees", None),
        baseline_start=getattr(args, "start", None),
        bands=tuple(float(b) for b in bands.split(",")) if bands else baseline.DEFAULT_BANDS,
        contains=getattr(args, "contains", []),
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "demo":
        from codelineage.demo import write_demo_corpus

        info = write_demo_corpus(args.directory)
        print(info.command())
        return EXIT_OK
    try:
        cfg = config_from_args(args)
        if args.command == "pipeline":
            written = run_pipeline(cfg)
        else:
            written = STAGES[args.command](cfg)
    except PrerequisiteError as exc:
        print(f"codelineage: {exc}", file=sys.stderr)
        return EXIT_PREREQUISITE
    except (DataError, OSError, ValueError) as exc:
        print(f"codelineage: {exc}", file=sys.stderr)
        return EXIT_DATA
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
