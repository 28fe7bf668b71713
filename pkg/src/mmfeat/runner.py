"""Runner: drive every job of a plan through load -> preprocess -> extract -> write.

Indexes and model graphs are built once per job on the calling thread; the
(sample, model) work units are then processed by a pool of ``plan.workers``
threads. All shared state is read-only and every unit writes distinct files,
so outputs do not depend on the worker count.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import dataset
from .config import MODALITIES, ExtractionPlan
from .engine import ModelGraph, build_model, extract_features
from .errors import ConfigError, IoError, PipelineError

log = logging.getLogger("mmfeat")


@dataclass
class JobReport:
    modality: str
    source: str
    samples_total: int = 0
    samples_ok: int = 0
    samples_skipped: int = 0
    files_written: int = 0
    written: list = field(default_factory=list)


@dataclass
class RunReport:
    jobs: list = field(default_factory=list)
    wall_time: float = 0.0
    log_path: Optional[Path] = None

    @property
    def files_written(self):
        return sum(job.files_written for job in self.jobs)

    @property
    def samples_skipped(self):
        return sum(job.samples_skipped for job in self.jobs)


@dataclass(frozen=True, eq=False)
class WorkUnit:
    job: object
    graph: ModelGraph
    entry: tuple


class _LogFormatter(logging.Formatter):
    def format(self, record):
        stamp = datetime.fromtimestamp(record.created, timezone.utc).isoformat(timespec="milliseconds")
        return f"{record.levelname}\t{stamp}\t{record.getMessage()}"


@contextmanager
def run_log(log_dir):
    """Attach a file handler writing ``run-<UTC timestamp>.log`` for the duration."""
    log_dir = Path(log_dir)
    try:
        log_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create log folder {log_dir}: {exc}") from exc
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S.%fZ")
    path = log_dir / f"run-{stamp}.log"
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setFormatter(_LogFormatter())
    handler.setLevel(logging.DEBUG)
    previous = log.level
    log.addHandler(handler)
    if log.getEffectiveLevel() > logging.DEBUG:
        log.setLevel(logging.DEBUG)
    try:
        yield path
    finally:
        log.removeHandler(handler)
        log.setLevel(previous)
        handler.close()


def _describe(unit: WorkUnit) -> str:
    job = unit.job
    return f"{job.modality}.{job.source} model={unit.graph.name} sample={dataset.key_to_name(unit.entry.key)}"


def output_paths(plan: ExtractionPlan, unit: WorkUnit) -> list:
    graph = unit.graph
    count = len(graph.output_layers)
    return [
        dataset.create_output_path(plan.dataset_path, unit.job.output_path, graph.backend,
                                   graph.name, layer, count, unit.entry.key)
        for layer in graph.output_layers
    ]


def process_unit(plan: ExtractionPlan, unit: WorkUnit) -> list:
    """Decode, preprocess, extract and write one (sample, model) pair.

    Returns the written paths in output-layer order. Pipeline errors are
    re-raised with the unit's context prepended.
    """
    try:
        sample = dataset.load_sample(unit.entry, unit.job.modality, unit.graph.params)
        features = extract_features(unit.graph, sample)
        paths = output_paths(plan, unit)
        for (_, tensor), path in zip(features, paths):
            dataset.write_feature(tensor, path)
    except PipelineError as exc:
        raise type(exc)(f"[{_describe(unit)}] {exc}") from exc
    log.debug("wrote %d file(s) for %s", len(paths), _describe(unit))
    return paths


def _run_job(plan, job, registry, pool, seen_paths) -> JobReport:
    index = dataset.build_index(job, plan.dataset_path)
    graphs = [build_model(spec, job.modality, registry) for spec in job.models]
    units = [WorkUnit(job, graph, entry) for graph in graphs for entry in index]
    for unit in units:
        for path in output_paths(plan, unit):
            if path in seen_paths:
                raise ConfigError(f"two work units would write {path}; "
                                  "check for repeated models or overlapping output folders")
            seen_paths.add(path)

    report = JobReport(job.modality, job.source, samples_total=len(units))
    log.info("job %s.%s: %d sample(s) x %d model(s) -> %d unit(s)",
             job.modality, job.source, len(index), len(graphs), len(units))

    if pool is None:
        results = (_attempt(plan, unit) for unit in units)
    else:
        futures = [pool.submit(_attempt, plan, unit) for unit in units]
        results = (f.result() for f in futures)
    try:
        for unit, (paths, error) in zip(units, results):
            if error is None:
                report.samples_ok += 1
                report.files_written += len(paths)
                report.written.extend(paths)
            elif plan.skip_errors:
                report.samples_skipped += 1
                log.warning("skipped: %s", error)
            else:
                log.error("%s", error)
                raise error
    finally:
        if pool is not None:
            for f in futures:
                f.cancel()
    log.info("job %s.%s done: %d ok, %d skipped, %d file(s)", job.modality, job.source,
             report.samples_ok, report.samples_skipped, report.files_written)
    return report


def _attempt(plan, unit):
    try:
        return process_unit(plan, unit), None
    except PipelineError as exc:
        return None, exc


def execute_extractions(plan: ExtractionPlan, registry, modality: Optional[str] = None) -> RunReport:
    """Run every job of ``plan`` (or only those of ``modality``) in plan order."""
    if modality is not None and modality not in MODALITIES:
        raise ConfigError(f"unknown modality {modality!r}")
    jobs = plan.jobs if modality is None else plan.jobs_for(modality)
    start = time.perf_counter()
    report = RunReport()
    with run_log(plan.log_path) as log_path:
        report.log_path = log_path
        log.info("run started: %d job(s), %d worker(s)", len(jobs), plan.workers)
        seen: set = set()
        pool = ThreadPoolExecutor(max_workers=plan.workers) if plan.workers > 1 else None
        try:
            for job in jobs:
                report.jobs.append(_run_job(plan, job, registry, pool, seen))
        except PipelineError as exc:
            log.error("run aborted: %s", exc)
            raise
        finally:
            if pool is not None:
                pool.shutdown(wait=True, cancel_futures=True)
        report.wall_time = time.perf_counter() - start
        log.info("run finished in %.3f s: %d file(s) written", report.wall_time, report.files_written)
    return report


def execute_modality(plan: ExtractionPlan, registry, modality: str) -> RunReport:
    return execute_extractions(plan, registry, modality)
