"""Report schema and pair evaluation.

The JSON report is the format of record; its top-level keys are always
``schema_version, metadata, records, comparisons, warnings`` in that
order, rows are sorted, and every numeric convention the metrics rely
on is spelled out in the metadata block.  CSV output is a flat
projection of the metric records with 6-significant-digit floats.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import IoFailure, ManifestError
from .grid import Mask
from .overlap import confusion_counts, overlap_metrics
from .phantom import volume_mm3
from .stats import ComparisonRow, MetricRecord, TestResult
from .surface import distance_metrics, surface_distances

SCHEMA_VERSION = 1

CONVENTIONS = {
    "reference": "first mask of a pair is the manual standard",
    "boundary": "6-connectivity; the grid border counts as background",
    "distances": "surface-voxel-centre to surface-voxel-centre, millimetres",
    "hausdorff": "maximum over both directions of the directed maxima",
    "hd95": "nearest-rank 95th percentile of the pooled bidirectional distances "
    "(index ceil(0.95 n), 1-based, no interpolation)",
    "rms": "root mean square of the pooled bidirectional distances",
    "precision": "TP / (TP + FP) against the manual reference; 0/0 reported as 0 "
    "with a warning",
    "recall": "TP / (TP + FN) against the manual reference; 0/0 reported as 0 "
    "with a warning",
    "empty_masks": "a pair with both masks empty is an error, not a perfect score",
    "percent_diff": "100 * (mean_a - mean_b) / mean_b; method B is the baseline; "
    "zero difference counts as higher",
    "paired_t": "two-sided Student t via the regularized incomplete beta "
    "(Lentz continued fraction)",
    "wilcoxon": "signed-rank, zeros dropped, midranks for ties; exact sign "
    "enumeration for n <= 20, else normal approximation with tie-corrected "
    "variance and 0.5 continuity correction",
    "noise_prng": "NumPy PCG64 seeded through SeedSequence; uniforms drawn in "
    "C-order raster scan",
}

METRIC_ORDER = (
    "dice",
    "jaccard",
    "precision",
    "recall",
    "volume_similarity",
    "hausdorff",
    "hd95",
    "mean_sd",
    "rms",
    "volume_mm3",
)


def evaluate_pair(ref: Mask, test: Mask) -> tuple[dict[str, float], list[str]]:
    """Full metric set for one (reference, test) pair.

    Returns the ten standard metrics keyed by name plus any warnings
    (undefined precision/recall sub-cases).  ``volume_mm3`` is the test
    mask's volume.
    """
    counts = confusion_counts(ref, test)
    ov = overlap_metrics(counts)
    d_ref, d_test = surface_distances(ref, test)
    summary = distance_metrics(d_ref, d_test)
    metrics = {
        "dice": ov.dice,
        "jaccard": ov.jaccard,
        "precision": ov.precision,
        "recall": ov.recall,
        "volume_similarity": ov.volume_similarity,
        "hausdorff": summary.hausdorff_mm,
        "hd95": summary.hd95_mm,
        "mean_sd": summary.mean_sd_mm,
        "rms": summary.rms_mm,
        "volume_mm3": volume_mm3(test),
    }
    return metrics, list(ov.warnings)


def make_metadata(command: str, *, timestamp: bool = True, **extra) -> dict:
    meta = {
        "tool": "segeval",
        "version": __version__,
        "command": command,
    }
    if timestamp:
        meta["generated_at"] = datetime.now(timezone.utc).isoformat()
    meta["conventions"] = dict(CONVENTIONS)
    meta.update(extra)
    return meta


def build_report(metadata: dict, records, comparisons=(), warnings=()) -> dict:
    """Assemble the canonical report dict; comparisons arrive pre-rendered."""
    recs = sorted(records, key=lambda r: (r.case_id, r.method, r.metric))
    return {
        "schema_version": SCHEMA_VERSION,
        "metadata": metadata,
        "records": [asdict(r) for r in recs],
        "comparisons": list(comparisons),
        "warnings": list(warnings),
    }


def _test_to_dict(result: TestResult | None):
    if result is None:
        return None
    d = {
        "kind": result.kind,
        "statistic": result.statistic,
        "n_effective": result.n_effective,
        "p_two_sided": result.p_two_sided,
    }
    if result.df is not None:
        d["df"] = result.df
    return d


def comparison_to_dict(row: ComparisonRow, method_a: str | None = None, method_b: str | None = None) -> dict:
    d = {
        "metric": row.metric,
        "mean_a": row.mean_a,
        "mean_b": row.mean_b,
        "percent_diff": row.percent_diff,
        "direction": row.direction,
        "n_cases": row.n_cases,
        "n_unpaired": row.n_unpaired,
        "paired_t": _test_to_dict(row.t_result),
        "paired_t_flag": row.t_flag,
        "wilcoxon": _test_to_dict(row.w_result),
        "wilcoxon_flag": row.w_flag,
    }
    if method_a is not None:
        d["summary"] = render_sentence(row, method_a, method_b)
    return d


def render_sentence(row: ComparisonRow, method_a: str, method_b: str) -> str:
    """One human-readable line per metric, in the house reporting style:

        dice for methodA is 14.1000% (wilcoxon_exact: p = 0.25) higher
        compared to methodB
    """
    test = row.w_result if row.w_result is not None else row.t_result
    if row.percent_diff is None:
        return (
            f"{row.metric} for {method_a} vs {method_b}: baseline mean is zero; "
            "percent difference undefined"
        )
    if test is None:
        flag = row.w_flag or row.t_flag or "untested"
        return (
            f"{row.metric} for {method_a} is {abs(row.percent_diff):.4f}% "
            f"(no test: {flag}) {row.direction} compared to {method_b}"
        )
    return (
        f"{row.metric} for {method_a} is {abs(row.percent_diff):.4f}% "
        f"({test.kind}: p = {test.p_two_sided:.6g}) {row.direction} "
        f"compared to {method_b}"
    )


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def records_to_csv(records) -> str:
    """Flat CSV projection of metric rows, floats at 6 significant digits."""
    recs = sorted(records, key=lambda r: (r.case_id, r.method, r.metric))
    lines = ["case_id,method,metric,value"]
    for r in recs:
        lines.append(f"{r.case_id},{r.method},{r.metric},{r.value:.6g}")
    return "\n".join(lines) + "\n"


def load_records(path) -> list[MetricRecord]:
    """Read metric records back from a JSON report or a records CSV."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path} is not valid JSON: {exc}") from exc
        rows = payload.get("records", [])
        return [
            MetricRecord(r["case_id"], r["method"], r["metric"], float(r["value"]))
            for r in rows
        ]

    records = []
    reader = csv.DictReader(text.splitlines())
    required = {"case_id", "method", "metric", "value"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ManifestError(
            f"{path} lacks the records header case_id,method,metric,value"
        )
    for row in reader:
        records.append(
            MetricRecord(row["case_id"], row["method"], row["metric"], float(row["value"]))
        )
    return records
