"""Command line entry point.

    mmfeat [extract] [--config PATH] [--only MODALITY] [--skip-errors]
           [--workers N] [--registry PATH] [--log-dir PATH] [key.path=value ...]

Precedence: flags beat positional ``key=value`` overrides, which beat the file.
Exit codes: 0 success, 1 config/usage error, 2 data error, 3 model error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .config import MODALITIES, apply_overrides, load_config_file, parse_override, validate_config
from .errors import PipelineError, UsageError
from .registry import load_registry
from .runner import execute_extractions

@dataclass(frozen=True)
class CliInvocation:
    config_path: Optional[Path]
    overrides: tuple
    modality_filter: Optional[str] = None
    skip_errors: bool = False
    workers: Optional[int] = None
    registry: Optional[Path] = None
    log_dir: Optional[Path] = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


COMMANDS = ("extract",)


def _build_parser():
    parser = _Parser(prog="mmfeat extract", description="Extract multimodal features into NPY files.")
    parser.add_argument("--config", type=Path, help="YAML configuration file")
    parser.add_argument("--only", choices=MODALITIES, help="run only the jobs of one modality")
    parser.add_argument("--skip-errors", action="store_true", help="log and skip failing samples")
    parser.add_argument("--workers", type=_positive, help="worker threads (overrides gpu_list)")
    parser.add_argument("--registry", type=Path, help="model registry file")
    parser.add_argument("--log-dir", type=Path, help="folder for the run log")
    parser.add_argument("overrides", nargs="*", metavar="key.path=value")
    return parser


def parse_cli(args) -> CliInvocation:
    args = list(args)
    if args and args[0] in COMMANDS:
        args = args[1:]
    ns = _build_parser().parse_intermixed_args(args)
    overrides = []
    for token in ns.overrides:
        if "=" not in token:
            raise UsageError(f"positional argument {token!r} is not of the form key.path=value")
        try:
            overrides.append(parse_override(token))
        except PipelineError as exc:
            raise UsageError(str(exc)) from exc
    if ns.config is None and not overrides:
        raise UsageError("give --config and/or key.path=value overrides")
    return CliInvocation(
        config_path=ns.config,
        overrides=tuple(overrides),
        modality_filter=ns.only,
        skip_errors=ns.skip_errors,
        workers=ns.workers,
        registry=ns.registry.resolve() if ns.registry else None,
        log_dir=ns.log_dir.resolve() if ns.log_dir else None,
    )


def build_plan(inv: CliInvocation):
    root = load_config_file(inv.config_path) if inv.config_path is not None else {}
    plan = validate_config(apply_overrides(root, inv.overrides))
    changes = {}
    if inv.skip_errors:
        changes["skip_errors"] = True
    if inv.workers is not None:
        changes["workers"] = inv.workers
    if inv.registry is not None:
        changes["registry_path"] = inv.registry
    if inv.log_dir is not None:
        changes["log_dir"] = inv.log_dir
    return dataclasses.replace(plan, **changes)


def run(inv: CliInvocation, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        plan = build_plan(inv)
        registry = load_registry(plan.registry_file)
        report = execute_extractions(plan, registry, inv.modality_filter)
    except PipelineError as exc:
        print(f"error: {exc}", file=err)
        return exc.exit_code
    for job in report.jobs:
        print(f"{job.modality}.{job.source}: {job.samples_ok}/{job.samples_total} ok, "
              f"{job.samples_skipped} skipped, {job.files_written} file(s)", file=out)
    print(f"total: {report.files_written} file(s) in {report.wall_time:.3f} s; log {report.log_path}", file=out)
    return 0


def main(argv=None) -> int:
    console = logging.StreamHandler(sys.stderr)
    console.setLevel(logging.WARNING)
    # fatal errors are reported once by run(); only warnings go to the console
    console.addFilter(lambda record: record.levelno < logging.ERROR)
    console.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    root = logging.getLogger()
    root.addHandler(console)
    try:
        inv = parse_cli(sys.argv[1:] if argv is None else argv)
        return run(inv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    finally:
        root.removeHandler(console)


if __name__ == "__main__":
    sys.exit(main())
