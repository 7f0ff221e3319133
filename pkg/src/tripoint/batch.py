"""Batch triangulation with per-view-count aggregation and report emission.

Every track is solved independently (so a batch can fan out across
processes); per-track wall-clock time is measured around the solve only,
excluding parsing and report assembly. Aggregate rows group tracks by their
view count n, mirroring the usual benchmark-table layout (points, average
compute time, total reprojection error); the totals row carries the summed
time. Detail records keep everything needed to re-audit a run.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .derivatives import build_cache
from .initializer import initial_point
from .solver import SolverConfig, solve
from .verification import optimality_verdict, solvability_check


@dataclass
class TrackRecord:
    """Per-track outcome; `error` is set only for unexpected failures."""

    track_id: str
    n_views: int
    solution: np.ndarray | None
    cost: float
    status: str
    kantorovich_distance: float
    rho_squared: float
    gamma_squared: float
    optimal: bool
    solve_time: float
    error: str = ""


@dataclass
class AggregateRow:
    n_views: int
    points: int
    average_time: float
    total_error: float
    optimal_count: int


@dataclass
class BatchTotals:
    points: int
    total_time: float
    total_error: float
    optimal_count: int


@dataclass(eq=False)
class BatchReport:
    rows: list
    totals: BatchTotals
    details: list
    tracks_processed: int
    tracks_skipped: int


def _solve_tracks(dataset, indices, config, timing_repeats):
    camera_caches = [build_cache(c) for c in dataset.cameras]
    records = []
    for idx in indices:
        track = dataset.tracks[idx]
        problem = dataset.problem_for(track)
        caches = [camera_caches[i] for i, _, _ in track.observations]
        try:
            times = []
            start = time.perf_counter()
            report = solve(problem, config, caches)
            times.append(time.perf_counter() - start)
            for _ in range(timing_repeats - 1):
                start = time.perf_counter()
                solve(problem, config, caches)
                times.append(time.perf_counter() - start)
            elapsed = statistics.median(times)
        except Exception as exc:  # pragma: no cover - defensive per-track guard
            records.append(TrackRecord(track.identifier, track.n_views, None,
                                       math.inf, "error", math.inf, math.nan,
                                       math.nan, False, 0.0, str(exc)))
            continue
        rho2 = gamma2 = math.nan
        try:
            start_point = report.start_point
            if start_point is None:
                start_point, _ = initial_point(problem)
            rho2, gamma2, _ = solvability_check(problem, caches, start_point)
        except Exception:
            pass  # diagnostics must not fail a solved track
        optimal = (
            report.status == "converged"
            and optimality_verdict(report.kantorovich_distance, report.cost,
                                   report.initial_cost)
        )
        records.append(TrackRecord(
            track_id=track.identifier,
            n_views=track.n_views,
            solution=report.solution,
            cost=report.cost,
            status=report.status,
            kantorovich_distance=report.kantorovich_distance,
            rho_squared=rho2,
            gamma_squared=gamma2,
            optimal=optimal,
            solve_time=elapsed,
        ))
    return records


def _solve_chunk(args):
    return _solve_tracks(*args)


def _aggregate(details):
    groups = {}
    for record in details:
        groups.setdefault(record.n_views, []).append(record)
    rows = []
    for n in sorted(groups):
        members = groups[n]
        total_time = sum(r.solve_time for r in members)
        total_error = sum(r.cost for r in members if math.isfinite(r.cost))
        rows.append(AggregateRow(
            n_views=n,
            points=len(members),
            average_time=total_time / len(members),
            total_error=total_error,
            optimal_count=sum(1 for r in members if r.optimal),
        ))
    totals = BatchTotals(
        points=sum(r.points for r in rows),
        total_time=sum(r.average_time * r.points for r in rows),
        total_error=sum(r.total_error for r in rows),
        optimal_count=sum(r.optimal_count for r in rows),
    )
    return rows, totals


def run_batch(dataset, config=None, jobs=1, timing_repeats=1) -> BatchReport:
    """Solve every track of a dataset and aggregate by view count.

    `jobs` > 1 partitions the tracks across processes; results are merged in
    track order, so solutions and costs are identical to a serial run.
    `timing_repeats` re-solves each track and records the median time
    (micro-benchmark mode); solutions always come from the first run.
    """
    config = config or SolverConfig()
    indices = list(range(len(dataset.tracks)))
    if jobs <= 1 or len(indices) < 2:
        details = _solve_tracks(dataset, indices, config, timing_repeats)
    else:
        jobs = min(jobs, len(indices))
        chunks = [indices[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(
                _solve_chunk,
                [(dataset, chunk, config, timing_repeats) for chunk in chunks],
            ))
        by_index = {}
        for chunk, part in zip(chunks, parts):
            for idx, record in zip(chunk, part):
                by_index[idx] = record
        details = [by_index[i] for i in indices]
    rows, totals = _aggregate(details)
    return BatchReport(
        rows=rows,
        totals=totals,
        details=details,
        tracks_processed=len(details),
        tracks_skipped=dataset.skipped_tracks,
    )


def _g13(value):
    """13-significant-digit rendering for the human-readable table."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return format(value, ".13g")


def _emit_table(report):
    header = f"{'n':>6} {'points':>8} {'ACT(s)':>16} {'R.E.':>20} {'optimal':>8}"
    lines = [header]
    for row in report.rows:
        lines.append(
            f"{row.n_views:>6} {row.points:>8} {_g13(row.average_time):>16} "
            f"{_g13(row.total_error):>20} {row.optimal_count:>8}"
        )
    if report.rows:
        t = report.totals
        lines.append(
            f"{'total':>6} {t.points:>8} {_g13(t.total_time):>16} "
            f"{_g13(t.total_error):>20} {t.optimal_count:>8}"
        )
    if report.tracks_skipped:
        lines.append(f"# skipped tracks: {report.tracks_skipped}")
    return "\n".join(lines) + "\n"


def _record_dict(record):
    d = asdict(record)
    if record.solution is not None:
        d["solution"] = [float(v) for v in record.solution]
    return d


def _emit_json(report):
    payload = {
        "rows": [asdict(r) for r in report.rows],
        "totals": asdict(report.totals),
        "tracks_processed": report.tracks_processed,
        "tracks_skipped": report.tracks_skipped,
        "details": [_record_dict(r) for r in report.details],
    }
    return json.dumps(payload, indent=2)


_CSV_FIELDS = ("track_id", "n_views", "x", "y", "z", "cost", "status",
               "kantorovich_distance", "rho_squared", "gamma_squared",
               "optimal", "solve_time", "error")


def _emit_csv(report):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_CSV_FIELDS)
    for r in report.details:
        xyz = ["", "", ""] if r.solution is None else [repr(float(v)) for v in r.solution]
        writer.writerow([r.track_id, r.n_views, *xyz, repr(r.cost), r.status,
                         repr(r.kantorovich_distance), repr(r.rho_squared),
                         repr(r.gamma_squared), int(r.optimal),
                         repr(r.solve_time), r.error])
    return out.getvalue()


def emit_report(report: BatchReport, format: str = "table") -> str:
    """Render a batch report.

    `table` mirrors the benchmark-table layout at 13 significant digits;
    `json` carries aggregates plus lossless (full-precision) detail records;
    `csv` is the lossless detail-record table alone.
    """
    if format == "table":
        return _emit_table(report)
    if format == "json":
        return _emit_json(report)
    if format == "csv":
        return _emit_csv(report)
    raise ValueError(f"unknown report format {format!r}")


def report_from_json(text: str) -> BatchReport:
    """Rebuild a BatchReport from its JSON rendering (timing included)."""
    payload = json.loads(text)
    details = []
    for d in payload["details"]:
        solution = d["solution"]
        details.append(TrackRecord(
            track_id=d["track_id"],
            n_views=d["n_views"],
            solution=None if solution is None else np.array(solution),
            cost=d["cost"],
            status=d["status"],
            kantorovich_distance=d["kantorovich_distance"],
            rho_squared=d["rho_squared"],
            gamma_squared=d["gamma_squared"],
            optimal=d["optimal"],
            solve_time=d["solve_time"],
            error=d.get("error", ""),
        ))
    return BatchReport(
        rows=[AggregateRow(**r) for r in payload["rows"]],
        totals=BatchTotals(**payload["totals"]),
        details=details,
        tracks_processed=payload["tracks_processed"],
        tracks_skipped=payload["tracks_skipped"],
    )
