"""
Main entry point for idsim.
Scans Java projects for declared identifiers, classifies similar names
into the taxonomy and reports per-project results.

Exit codes: 0 success, 1 usage, 2 input/data error, 3 I/O error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.classify import CategoryLabel, classify_inventory, read_labels, write_labels
from src.config import GROUP_BY_CHOICES, REPORT_FORMATS, ToolConfig, exclusion_list, load_config
from src.errors import IdSimError, OutputError, UsageError
from src.extract import scan_project
from src.identifier import IdentifierInventory, read_inventory, write_inventory
from src.lexicon import load_dictionary
from src.pairing import generate_candidate_pairs, load_registry
from src.report import ProjectSummary, draw_sample, emit_report, required_sample_size, summarize

logger = logging.getLogger("idsim")

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# --- Argument parsing ---

def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool = False):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON config file (default: $IDSIM_CONFIG)")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true",
                           default=argparse.SUPPRESS if suppress else False, help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true",
                           default=argparse.SUPPRESS if suppress else False, help="warnings and errors only")
    parser.add_argument("--workers", type=int, default=default, help="worker threads for parsing and pairing")


def _add_scan_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--include-tests", action="store_true", default=None, help="also scan unit test sources")
    parser.add_argument("--exclude", action="append", metavar="GLOB", help="skip files matching GLOB (repeatable)")


def _add_classify_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--dictionary", help="extra abbreviation dictionary (JSON)")
    parser.add_argument("--registry", help="extra type registry (JSON)")
    parser.add_argument("--all-labels", action="store_true", default=None,
                        help="emit every matching category, not just the primary one")


def _add_report_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--format", choices=REPORT_FORMATS, help="report format (default json)")
    parser.add_argument("--sample", action="store_true", default=None,
                        help="analyze a random sample sized for 95%% confidence, 5%% margin")
    parser.add_argument("--seed", type=int, help="sampling seed")
    parser.add_argument("--group-by", choices=GROUP_BY_CHOICES, help="rank categories or parent categories")
    parser.add_argument("--out", default="-", help="output file, '-' for standard output")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="idsim", description="Identifier name similarity analysis for Java projects.")
    _add_global_flags(parser)
    common = ArgumentParser(add_help=False)
    _add_global_flags(common, suppress=True)

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    scan = subparsers.add_parser("scan", parents=[common], help="extract the identifier inventory")
    scan.add_argument("root", help="project source directory")
    scan.add_argument("--project", help="project label (default: directory name)")
    scan.add_argument("--out", required=True, help="inventory JSON Lines file, '-' for standard output")
    _add_scan_flags(scan)
    scan.set_defaults(handler=cmd_scan)

    classify = subparsers.add_parser("classify", parents=[common], help="label similar identifier pairs")
    classify.add_argument("inventory", help="inventory written by 'scan'")
    classify.add_argument("--out", required=True, help="labels JSON Lines file, '-' for standard output")
    _add_classify_flags(classify)
    classify.set_defaults(handler=cmd_classify)

    report = subparsers.add_parser("report", parents=[common], help="summarize labels")
    report.add_argument("labels", help="labels written by 'classify'")
    report.add_argument("inventory", help="the inventory the labels were computed from")
    _add_report_flags(report)
    report.set_defaults(handler=cmd_report)

    analyze = subparsers.add_parser("analyze", parents=[common], help="scan, classify and report in one go")
    analyze.add_argument("roots", nargs="+", help="project source directories, one project each")
    analyze.add_argument("--project", action="append", help="project label per root, in order (repeatable)")
    analyze.add_argument("--keep-intermediate", metavar="DIR", help="also write inventories and labels to DIR")
    _add_scan_flags(analyze)
    _add_classify_flags(analyze)
    _add_report_flags(analyze)
    analyze.set_defaults(handler=cmd_analyze)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level)


def resolve_config(args: argparse.Namespace) -> ToolConfig:
    """Built-in defaults, then the config file, then command-line flags."""
    config = load_config(args.config)
    config = config.with_overrides("scan", include_tests=getattr(args, "include_tests", None),
                                   exclude=exclusion_list(getattr(args, "exclude", None)),
                                   workers=args.workers)
    config = config.with_overrides("pairing", workers=args.workers)
    config = config.with_overrides("classify", all_labels=getattr(args, "all_labels", None))
    config = config.with_overrides("report", format=getattr(args, "format", None),
                                   sample=getattr(args, "sample", None),
                                   seed=getattr(args, "seed", None),
                                   group_by=getattr(args, "group_by", None))
    config = config.with_overrides("tool", dictionary_path=getattr(args, "dictionary", None),
                                   registry_path=getattr(args, "registry", None))
    return config.validate()


# --- Pipeline steps ---

def classify_project(inventory: IdentifierInventory, config: ToolConfig) -> List[CategoryLabel]:
    dictionary = load_dictionary(config.dictionary_path)
    registry = load_registry(config.registry_path).with_project_types(inventory.records)
    pairs = generate_candidate_pairs(inventory, config.pairing, registry)
    return classify_inventory(inventory, pairs, config.classify, dictionary, registry,
                              workers=config.pairing.workers)


def summarize_project(inventory: IdentifierInventory, labels: List[CategoryLabel],
                      config: ToolConfig) -> ProjectSummary:
    sample_ids = None
    if config.report.sample and len(inventory):
        size = required_sample_size(len(inventory), config.report.confidence, config.report.margin)
        sample_ids = draw_sample(inventory, size, config.report.seed)
        logger.info("%s: sampling %d of %d identifiers (seed %d)",
                    inventory.project, len(sample_ids), len(inventory), config.report.seed)
    return summarize(inventory, labels, config.report, sample_ids)


def _status(inventory: IdentifierInventory):
    print(f"scanned {inventory.files_scanned} files, {inventory.files_failed} failed, "
          f"{len(inventory)} identifiers", file=sys.stderr)


def _project_label(root: str) -> str:
    return Path(root).resolve().name or "project"


# --- Subcommands ---

def cmd_scan(args: argparse.Namespace, config: ToolConfig) -> int:
    inventory = scan_project(args.root, args.project or _project_label(args.root), config.scan)
    write_inventory(inventory, args.out)
    _status(inventory)
    return 0


def cmd_classify(args: argparse.Namespace, config: ToolConfig) -> int:
    inventory = read_inventory(args.inventory)
    write_labels(classify_project(inventory, config), args.out)
    return 0


def cmd_report(args: argparse.Namespace, config: ToolConfig) -> int:
    inventory = read_inventory(args.inventory)
    labels = read_labels(args.labels)
    summary = summarize_project(inventory, labels, config)
    emit_report([summary], labels, config.report.format, args.out)
    return 0


def cmd_analyze(args: argparse.Namespace, config: ToolConfig) -> int:
    projects = args.project or []
    if projects and len(projects) != len(args.roots):
        raise UsageError(f"Got {len(projects)} --project labels for {len(args.roots)} roots")
    projects = projects or [_project_label(root) for root in args.roots]

    keep = Path(args.keep_intermediate) if args.keep_intermediate else None
    if keep is not None:
        try:
            keep.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputError(str(keep), e) from e

    summaries: List[ProjectSummary] = []
    all_labels: List[CategoryLabel] = []
    for root, project in zip(args.roots, projects):
        inventory = scan_project(root, project, config.scan)
        _status(inventory)
        labels = classify_project(inventory, config)
        if keep is not None:
            write_inventory(inventory, str(keep / f"{project}.inventory.jsonl"))
            write_labels(labels, str(keep / f"{project}.labels.jsonl"))
        summaries.append(summarize_project(inventory, labels, config))
        all_labels.extend(labels)

    emit_report(summaries, all_labels, config.report.format, args.out)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(args.verbose, args.quiet)

    try:
        config = resolve_config(args)
        return args.handler(args, config)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        logger.error("%s", e)
        return e.exit_code
    except IdSimError as e:
        logger.error("%s", e)
        return e.exit_code
    except Exception:
        logger.exception("Unexpected failure")
        return 2


# --- Entry Point ---
if __name__ == "__main__":
    sys.exit(main())
