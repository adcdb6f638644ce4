"""Study-level aggregation: outlier filtering, learning policy, cell medians,
pairwise tests, and the CSV report files."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .experiment import DEFAULT_DISTANCE, DEFAULT_IDS, extract_metrics
from .stats import (
    PowerLawFit,
    TestResult,
    fit_power_law,
    median_then_mean,
    shapiro_wilk,
    wilcoxon_signed_rank,
)

TIME_METRICS = ("homing", "movement", "return")
LEARNING_R2_THRESHOLD = 0.7


@dataclass(frozen=True)
class ReportConfig:
    ids: tuple[int, ...] = DEFAULT_IDS
    distance: float = DEFAULT_DISTANCE
    outlier_scope: str = "group"        # group | global | off
    learning_r2: float = LEARNING_R2_THRESHOLD

    def __post_init__(self):
        if self.outlier_scope not in ("group", "global", "off"):
            raise ValueError(f"unknown outlier scope {self.outlier_scope!r}")


@dataclass(frozen=True)
class CellAggregate:
    device: str
    cohort: str
    metric: str
    value: float
    block_scope: str            # last_block | all_blocks
    q1: float
    q3: float
    n_participants: int


@dataclass(frozen=True)
class LearningDecision:
    fit: PowerLawFit
    policy: str                 # last_block | all_blocks


@dataclass(frozen=True)
class PairwiseTest:
    cohort: str
    metric: str
    device_a: str
    device_b: str
    result: TestResult
    method: str                 # exact | normal


@dataclass
class AnalysisReport:
    cells: dict = field(default_factory=dict)           # (device, cohort, metric) -> CellAggregate
    totals: dict = field(default_factory=dict)          # (device, cohort) -> float
    error_rates: dict = field(default_factory=dict)     # (device, cohort) -> float
    overlap_fractions: dict = field(default_factory=dict)
    learning: dict = field(default_factory=dict)        # (device, cohort, metric) -> LearningDecision
    normality: dict = field(default_factory=dict)       # (device, cohort, metric) -> TestResult
    pairwise: list = field(default_factory=list)
    discomfort: dict = field(default_factory=dict)      # (device, cohort) -> median score
    missing: list = field(default_factory=list)
    n_sessions: int = 0


def _session_rows(sessions, config: ReportConfig):
    """Long-form per-target rows: one dict per extracted target."""
    rows = []
    for log in sessions:
        metrics = extract_metrics(log, ids=config.ids, distance=config.distance)
        for m in metrics:
            rows.append(
                {
                    "participant": log.meta.participant_id,
                    "device": log.meta.device,
                    "cohort": log.meta.cohort,
                    "block": m.block,
                    "id": m.id_bits,
                    "homing": m.homing_t,
                    "movement": m.movement_t,
                    "return": m.return_t,
                    "errors": m.errors,
                    "overlap": m.overlap,
                }
            )
    return rows


def _apply_outlier_filter(rows, config: ReportConfig):
    """Replace filtered-out values with None, per the configured scope."""
    if config.outlier_scope == "off":
        return rows
    for metric in TIME_METRICS:
        groups = defaultdict(list)
        for i, r in enumerate(rows):
            if r[metric] is None:
                continue
            if config.outlier_scope == "group":
                key = (r["device"], r["cohort"], r["id"])
            else:
                key = "all"
            groups[key].append(i)
        for key, idxs in groups.items():
            values = np.array([rows[i][metric] for i in idxs])
            if values.size < 2:
                continue
            mean = values.mean()
            sd = values.std(ddof=1)
            if sd == 0.0:
                continue
            for i, v in zip(idxs, values):
                if abs(v - mean) > 3.0 * sd:
                    rows[i][metric] = None
    return rows


def _collect_surveys(sessions, surveys=None):
    """(participant, device) -> post survey and participant -> baseline."""
    baselines = {}
    posts = {}
    for log in sessions:
        pid = log.meta.participant_id
        for s in log.surveys:
            if s.phase == "baseline":
                baselines.setdefault(pid, s)
            else:
                posts[(pid, log.meta.device)] = s
    if surveys:
        for (pid, device, phase), s in surveys.items():
            if phase == "baseline":
                baselines[pid] = s
            else:
                posts[(pid, device)] = s
    return baselines, posts


def build_report(sessions, surveys=None, config: ReportConfig = ReportConfig()) -> AnalysisReport:
    """Aggregate extracted metrics into the per-cell report.

    Per cell and metric: medians across targets within a difficulty index,
    means across indexes, then a learning-policy decision (a power-law fit
    with R^2 at or above the threshold and a decreasing trend restricts the
    cell to its last block; anything else averages across blocks), and the
    median across participants. Total time is the homing + movement + return
    sum of the cell aggregates.
    """
    if not sessions:
        raise DataError("no sessions to analyze")
    report = AnalysisReport(n_sessions=len(sessions))
    rows = _session_rows(sessions, config)
    rows = _apply_outlier_filter(rows, config)

    block_counts = {}
    for log in sessions:
        block_counts[(log.meta.device, log.meta.cohort)] = log.meta.block_count

    cells = sorted({(r["device"], r["cohort"]) for r in rows})
    for device, cohort in cells:
        cell_rows = [r for r in rows if r["device"] == device and r["cohort"] == cohort]
        participants = sorted({r["participant"] for r in cell_rows})
        n_blocks = block_counts[(device, cohort)]

        for metric in TIME_METRICS:
            # per participant x block: median within ID, mean across IDs
            value_pb = {}
            per_id_medians = []
            for pid in participants:
                for block in range(n_blocks):
                    groups = defaultdict(list)
                    for r in cell_rows:
                        if r["participant"] == pid and r["block"] == block and r[metric] is not None:
                            groups[r["id"]].append(r[metric])
                    if not groups:
                        continue
                    try:
                        value_pb[(pid, block)] = median_then_mean(groups)
                    except DataError:
                        continue
                    per_id_medians.extend(float(np.median(v)) for v in groups.values())
            if not value_pb:
                report.missing.append(f"{device}/{cohort}/{metric}: no data")
                continue

            block_means = []
            for block in range(n_blocks):
                vals = [value_pb[(p, block)] for p in participants if (p, block) in value_pb]
                if vals:
                    block_means.append(float(np.mean(vals)))
            policy = "all_blocks"
            if len(block_means) >= 3 and all(v > 0 for v in block_means):
                fit = fit_power_law(block_means)
                if fit.r_squared >= config.learning_r2 and fit.b > 0:
                    policy = "last_block"
                report.learning[(device, cohort, metric)] = LearningDecision(fit, policy)

            finals = []
            for pid in participants:
                if policy == "last_block":
                    v = value_pb.get((pid, n_blocks - 1))
                    if v is not None:
                        finals.append(v)
                else:
                    vals = [value_pb[(pid, b)] for b in range(n_blocks) if (pid, b) in value_pb]
                    if vals:
                        finals.append(float(np.mean(vals)))
            if not finals:
                report.missing.append(f"{device}/{cohort}/{metric}: no participant aggregates")
                continue
            finals_arr = np.asarray(finals)
            report.cells[(device, cohort, metric)] = CellAggregate(
                device=device,
                cohort=cohort,
                metric=metric,
                value=float(np.median(finals_arr)),
                block_scope=policy,
                q1=float(np.percentile(finals_arr, 25)),
                q3=float(np.percentile(finals_arr, 75)),
                n_participants=len(finals),
            )
            if len(per_id_medians) >= 3 and len(set(per_id_medians)) > 1:
                n_sw = min(len(per_id_medians), 5000)
                report.normality[(device, cohort, metric)] = shapiro_wilk(per_id_medians[:n_sw])

        # total time = homing + movement + return cell aggregates
        parts = [report.cells.get((device, cohort, m)) for m in TIME_METRICS]
        if all(p is not None for p in parts):
            report.totals[(device, cohort)] = float(sum(p.value for p in parts))

        # error rate: per ID, median across participants of per-target mean errors
        groups = defaultdict(list)
        for pid in participants:
            for id_bits in sorted({r["id"] for r in cell_rows}):
                errs = [r["errors"] for r in cell_rows if r["participant"] == pid and r["id"] == id_bits]
                if errs:
                    groups[id_bits].append(float(np.mean(errs)))
        if groups:
            report.error_rates[(device, cohort)] = median_then_mean(groups)

        overlaps = [1.0 if r["overlap"] else 0.0 for r in cell_rows]
        if overlaps:
            report.overlap_fractions[(device, cohort)] = float(np.mean(overlaps))

    # discomfort scores
    baselines, posts = _collect_surveys(sessions, surveys)
    scores = defaultdict(dict)  # (device, cohort) -> participant -> score
    for log in sessions:
        pid = log.meta.participant_id
        key = (log.meta.device, log.meta.cohort)
        post = posts.get((pid, log.meta.device))
        base = baselines.get(pid)
        if post is not None and base is not None:
            scores[key][pid] = float(np.mean(post.ratings) - np.mean(base.ratings))
    for key, by_pid in scores.items():
        report.discomfort[key] = float(np.median(list(by_pid.values())))

    # pairwise device comparisons within each cohort
    cohorts = sorted({c for _, c in cells})
    devices = sorted({d for d, _ in cells})
    for cohort in cohorts:
        for metric in TIME_METRICS + ("discomfort",):
            for i in range(len(devices)):
                for j in range(i + 1, len(devices)):
                    pa = _participant_values(report, rows, scores, devices[i], cohort, metric, block_counts)
                    pb = _participant_values(report, rows, scores, devices[j], cohort, metric, block_counts)
                    shared = sorted(set(pa) & set(pb))
                    if len(shared) < 3:
                        continue
                    a = [pa[p] for p in shared]
                    b = [pb[p] for p in shared]
                    try:
                        result = wilcoxon_signed_rank(a, b)
                    except DataError:
                        continue
                    method = "exact" if result.n <= 12 else "normal"
                    report.pairwise.append(
                        PairwiseTest(cohort, metric, devices[i], devices[j], result, method)
                    )
    return report


def _participant_values(report, rows, scores, device, cohort, metric, block_counts):
    """Per-participant aggregate used in the pairwise tests."""
    if metric == "discomfort":
        return dict(scores.get((device, cohort), {}))
    decision = report.learning.get((device, cohort, metric))
    policy = decision.policy if decision else "all_blocks"
    n_blocks = block_counts.get((device, cohort), 0)
    out = {}
    per_pb = defaultdict(dict)
    for r in rows:
        if r["device"] != device or r["cohort"] != cohort or r[metric] is None:
            continue
        per_pb[r["participant"]].setdefault(r["block"], defaultdict(list))[r["id"]].append(r[metric])
    for pid, blocks in per_pb.items():
        vals = []
        for block, groups in blocks.items():
            if policy == "last_block" and block != n_blocks - 1:
                continue
            try:
                vals.append(median_then_mean(groups))
            except DataError:
                continue
        if vals:
            out[pid] = float(np.mean(vals))
    return out


# --- CSV emission -----------------------------------------------------------

def write_report(report: AnalysisReport, out_dir) -> list[Path]:
    """Write the report files; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "totals.csv"
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["device", "cohort", "total_time_s"])
        for (device, cohort), total in sorted(report.totals.items()):
            wr.writerow([device, cohort, f"{total:.4f}"])
    written.append(path)

    path = out / "cells.csv"
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["device", "cohort", "metric", "value", "block_scope", "q1", "q3", "n"])
        for key in sorted(report.cells):
            c = report.cells[key]
            wr.writerow([c.device, c.cohort, c.metric, f"{c.value:.4f}", c.block_scope,
                         f"{c.q1:.4f}", f"{c.q3:.4f}", c.n_participants])
        for (device, cohort), rate in sorted(report.error_rates.items()):
            wr.writerow([device, cohort, "error_rate", f"{rate:.4f}", "all_blocks", "", "", ""])
        for (device, cohort), frac in sorted(report.overlap_fractions.items()):
            wr.writerow([device, cohort, "overlap_fraction", f"{frac:.4f}", "all_blocks", "", "", ""])
        for (device, cohort), score in sorted(report.discomfort.items()):
            wr.writerow([device, cohort, "discomfort", f"{score:.4f}", "all_blocks", "", "", ""])
    written.append(path)

    path = out / "learning.csv"
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["device", "cohort", "metric", "a", "b", "r_squared", "policy"])
        for (device, cohort, metric), d in sorted(report.learning.items()):
            wr.writerow([device, cohort, metric, f"{d.fit.a:.4f}", f"{d.fit.b:.4f}",
                         f"{d.fit.r_squared:.4f}", d.policy])
    written.append(path)

    path = out / "tests.csv"
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["cohort", "metric", "device_a", "device_b", "z", "p", "effect_r", "n", "method"])
        for t in report.pairwise:
            wr.writerow([t.cohort, t.metric, t.device_a, t.device_b,
                         f"{t.result.statistic:.4f}", f"{t.result.p_value:.6g}",
                         f"{t.result.effect_size:.4f}", t.result.n, t.method])
    written.append(path)

    path = out / "normality.csv"
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["device", "cohort", "metric", "W", "p", "n"])
        for (device, cohort, metric), r in sorted(report.normality.items()):
            wr.writerow([device, cohort, metric, f"{r.statistic:.4f}", f"{r.p_value:.6g}", r.n])
    written.append(path)

    path = out / "summary.txt"
    with open(path, "w") as f:
        f.write(format_summary(report))
    written.append(path)
    return written


def format_summary(report: AnalysisReport) -> str:
    lines = [f"sessions analyzed: {report.n_sessions}", ""]
    lines.append("total time (homing + movement + return), cell medians [s]:")
    devices = sorted({d for d, _ in report.totals})
    cohorts = sorted({c for _, c in report.totals})
    header = "device".ljust(10) + "".join(c.rjust(10) for c in cohorts)
    lines.append("  " + header)
    for d in devices:
        row = d.ljust(10)
        for c in cohorts:
            v = report.totals.get((d, c))
            row += (f"{v:.2f}" if v is not None else "-").rjust(10)
        lines.append("  " + row)
    lines.append("")
    lines.append("cell aggregates [s]:")
    for key in sorted(report.cells):
        c = report.cells[key]
        lines.append(
            f"  {c.device}/{c.cohort}/{c.metric}: {c.value:.3f} "
            f"(IQR {c.q1:.3f}-{c.q3:.3f}, {c.block_scope}, n={c.n_participants})"
        )
    if report.error_rates:
        lines.append("")
        lines.append("error rates (mean over IDs of median per-target errors):")
        for (d, c), v in sorted(report.error_rates.items()):
            lines.append(f"  {d}/{c}: {v:.4f}")
    if report.discomfort:
        lines.append("")
        lines.append("discomfort (median post-minus-baseline score):")
        for (d, c), v in sorted(report.discomfort.items()):
            lines.append(f"  {d}/{c}: {v:.2f}")
    if report.learning:
        lines.append("")
        lines.append("learning-policy decisions:")
        for (d, c, m), dec in sorted(report.learning.items()):
            lines.append(
                f"  {d}/{c}/{m}: R^2={dec.fit.r_squared:.2f}, b={dec.fit.b:.3f} -> {dec.policy}"
            )
    if report.missing:
        lines.append("")
        lines.append("missing cells:")
        for msg in report.missing:
            lines.append(f"  {msg}")
    return "\n".join(lines) + "\n"
