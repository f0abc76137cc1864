"""Command-line harness for the audit suites."""
import argparse
import fcntl
import json
import sys
from pathlib import Path
from typing import Any, List, Optional

import pandas as pd

from entlab.core.config import Settings, configure, load_settings, settings
from entlab.core.exceptions import EntlabError, UnknownSubcommandError
from entlab.core.logger import get_logger, set_level
from entlab.experiments.suites import SUITES, SuiteResult
from entlab.experiments.workflow import run_full_suite
from entlab.models.schemas import RunRecord

logger = get_logger(__name__)

FULL_SUITE = "full-suite"
SUBCOMMANDS = list(SUITES) + [FULL_SUITE]

EXIT_PASSED = 0
EXIT_FAILED_CHECKS = 1
EXIT_ERROR = 2


def _json_default(value: Any) -> Any:
    if hasattr(value, "item"):
        return value.item()
    return str(value)


def record_line(record: RunRecord) -> str:
    """One run-log line: sorted keys, exact float repr."""
    return json.dumps(record.model_dump(mode="json"), sort_keys=True, default=_json_default)


def append_run_record(record: RunRecord, path: str) -> None:
    """Append under an exclusive lock; only the parent process writes."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "a", encoding="utf-8") as handle:
        fcntl.flock(handle, fcntl.LOCK_EX)
        try:
            handle.write(record_line(record) + "\n")
            handle.flush()
        finally:
            fcntl.flock(handle, fcntl.LOCK_UN)


def result_frame(result: SuiteResult) -> pd.DataFrame:
    """The suite's table, or its metrics and checks as rows when it has none."""
    if result.table is not None:
        return result.table
    rows = [{"name": k, "kind": "metric", "value": v} for k, v in sorted(result.metrics.items())]
    rows += [{"name": k, "kind": "check", "value": v} for k, v in sorted(result.checks.items())]
    return pd.DataFrame(rows, columns=["name", "kind", "value"])


def run_suite(subcommand: str, seed: int, jobs: int) -> SuiteResult:
    if subcommand == FULL_SUITE:
        return run_full_suite(seed, jobs)
    if subcommand not in SUITES:
        raise UnknownSubcommandError(f"Unknown subcommand '{subcommand}'")
    return SUITES[subcommand](seed, jobs)


def run(
    subcommand: str,
    config_path: Optional[str] = None,
    seed: Optional[int] = None,
    jobs: Optional[int] = None,
) -> tuple:
    """
    Configure, run one subcommand and append its record to the run log.

    Args:
        subcommand: Suite name or full-suite
        config_path: Optional flat key = value file
        seed: Master seed; defaults to the configured default_seed
        jobs: Worker processes; defaults to the configured jobs

    Returns:
        (RunRecord, SuiteResult)

    Raises:
        EntlabError: Unknown subcommand, bad configuration or a budget violation
    """
    if subcommand not in SUBCOMMANDS:
        raise UnknownSubcommandError(f"Unknown subcommand '{subcommand}'")
    active: Settings = configure(load_settings(config_path))
    active.ensure_directories()
    seed = active.default_seed if seed is None else seed
    jobs = active.jobs if jobs is None else jobs
    logger.info("Running suite", extra={"extra": {"subcommand": subcommand, "seed": seed, "jobs": jobs}})
    result = run_suite(subcommand, seed, jobs)
    record = RunRecord(
        subcommand=subcommand,
        config=active.snapshot(),
        seed=seed,
        jobs=jobs,
        metrics=result.metrics,
        checks=result.checks,
        passed=result.passed,
    )
    append_run_record(record, active.run_log_path)
    return record, result


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entlab",
        description="Run the entanglement-laboratory audit suites.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        epilog="Settings and their defaults: "
        + ", ".join(f"{name}={field.default!r}" for name, field in Settings.model_fields.items()),
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Suite to run")
    parser.add_argument("--config", default=None, help="Flat key = value settings file")
    parser.add_argument("--seed", type=int, default=None, help="Master seed (default: default_seed setting)")
    parser.add_argument("--out", default=None, help="Write the output here instead of stdout")
    parser.add_argument("--jobs", type=int, default=None, help="Worker processes (default: jobs setting)")
    parser.add_argument("--format", choices=("json", "csv"), default="json", help="Output format")
    parser.add_argument("--log-level", default="INFO", help="Level of the JSON logs on stderr")
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_level(args.log_level)
    try:
        record, result = run(args.subcommand, args.config, args.seed, args.jobs)
    except EntlabError as e:
        logger.error(f"Run failed: {e}", extra={"extra": {"subcommand": args.subcommand, "error_type": type(e).__name__}})
        failed = RunRecord(
            subcommand=args.subcommand,
            config=settings.snapshot(),
            seed=settings.default_seed if args.seed is None else args.seed,
            jobs=settings.jobs if args.jobs is None else args.jobs,
            passed=False,
            error=f"{type(e).__name__}: {e}",
        )
        try:
            append_run_record(failed, settings.run_log_path)
        except OSError as io_error:
            logger.error(f"Could not append to the run log: {io_error}")
        sys.stderr.write(f"entlab: {failed.error}\n")
        return EXIT_ERROR

    if args.format == "csv":
        _emit(result_frame(result).to_csv(index=False), args.out)
    else:
        _emit(record_line(record) + "\n", args.out)
    return EXIT_PASSED if result.passed else EXIT_FAILED_CHECKS
