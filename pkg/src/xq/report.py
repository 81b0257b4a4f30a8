"""Self-contained JSON reports: assembly, schema validation, recomputation.

A report carries every number needed to recompute its scores (chunk counts,
interaction, weights), a dataset fingerprint, and the full config echo, so
`xq check` can audit any report file in isolation.
"""

from __future__ import annotations

import csv
import importlib.resources
import json

import jsonschema

from .chunking import ChunkSpec
from .errors import DataError
from .experiment import ComparisonTable
from .interaction import InteractionReport
from .score import ExplainabilityScore

REPORT_VERSION = "1"

_E_RECOMPUTE_TOL = 1e-12


def _engine_version() -> str:
    from . import __version__

    return __version__


def _schema() -> dict:
    text = importlib.resources.files("xq.schemas").joinpath("report-v1.json").read_text("utf-8")
    return json.loads(text)


def chunk_spec_to_dict(spec: ChunkSpec) -> dict:
    out = {
        "input_chunks": {c.name: list(c.columns) for c in spec.input_chunks},
        "output_chunks": list(spec.output_chunks),
        "provenance": spec.provenance,
    }
    if spec.constructed_chunks:
        out["constructed_chunks"] = {c.name: list(c.columns) for c in spec.constructed_chunks}
    return out


def build_score_report(
    dataset_fingerprint: dict,
    config: dict,
    spec: ChunkSpec,
    interaction: InteractionReport,
    global_score: ExplainabilityScore,
    local_scores: list[dict] | None = None,
    breakdowns: list[dict] | None = None,
    pd_curves: list[dict] | None = None,
    warnings: list[str] | None = None,
) -> dict:
    report = {
        "report_version": REPORT_VERSION,
        "kind": "score",
        "engine_version": _engine_version(),
        "dataset": dataset_fingerprint,
        "config": config,
        "chunk_spec": chunk_spec_to_dict(spec),
        "interaction": interaction.to_dict(),
        "global_score": global_score.to_dict(),
        "local_scores": local_scores or [],
        "breakdowns": breakdowns or [],
        "warnings": warnings or [],
    }
    if pd_curves is not None:
        report["pd_curves"] = pd_curves
    return report


def build_experiment_report(
    dataset_fingerprint: dict,
    config: dict,
    table: ComparisonTable,
    warnings: list[str] | None = None,
) -> dict:
    return {
        "report_version": REPORT_VERSION,
        "kind": "experiment",
        "engine_version": _engine_version(),
        "dataset": dataset_fingerprint,
        "config": config,
        "comparison": table.to_dict(),
        "warnings": warnings or [],
    }


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")


def load_report(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read report {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"report {path} is not valid JSON: {exc}") from exc


def validate_report(report: dict) -> None:
    """Validate against the shipped report schema; DataError on mismatch."""
    try:
        jsonschema.validate(report, _schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DataError(f"report schema violation at {path}: {exc.message}") from exc


def _recompute(score: dict, where: str) -> list[str]:
    problems = []
    inputs = score["inputs"]
    w1, w2, w3 = inputs["weights"]
    expected = (w1 / inputs["n_input_chunks"] + w2 / inputs["n_output_chunks"]) + w3 * (
        1.0 - inputs["interaction"]
    )
    if abs(expected - score["value"]) > _E_RECOMPUTE_TOL:
        problems.append(
            f"{where}: E recomputed from inputs is {expected!r}, report says {score['value']!r}"
        )
    total = (score["predicate_input"] + score["predicate_output"]) + score["predicate_interaction"]
    if abs(total - score["value"]) > _E_RECOMPUTE_TOL:
        problems.append(f"{where}: predicates sum to {total!r}, value is {score['value']!r}")
    return problems


def check_report(report: dict) -> list[str]:
    """Re-derive every E in the report from its own inputs; list mismatches."""
    validate_report(report)
    problems: list[str] = []
    if report["kind"] == "score":
        problems += _recompute(report["global_score"], "global_score")
        for i, entry in enumerate(report.get("local_scores", [])):
            problems += _recompute(entry["score"], f"local_scores[{i}]")
    else:
        for entry in report["comparison"]["settings"]:
            problems += _recompute(entry["score"], f"settings[{entry['name']}]")
    return problems


# ---------------------------------------------------------------------------
# Plot-data export
# ---------------------------------------------------------------------------


def export_plotdata(report: dict, kind: str, out) -> None:
    """CSV with stable column order: ``breakdown`` -> (chunk, contribution);
    ``pd_curves`` -> (feature, grid_point, pd_value, centered_pd_value)."""
    if kind == "breakdown":
        sections = report.get("breakdowns") or []
        if not sections:
            raise DataError("report has no breakdown section (run score with --instance)")
        rows = [
            (entry["chunk"], repr(entry["contribution"]))
            for section in sections
            for entry in section["contributions"]
        ]
        header = ("chunk", "contribution")
    elif kind == "pd_curves":
        curves = report.get("pd_curves")
        if not curves:
            raise DataError("report has no pd_curves section (run score with --pd-export)")
        rows = [
            (curve["feature"], _cell(point), repr(value), repr(centered))
            for curve in curves
            for point, value, centered in zip(
                curve["points"], curve["values"], curve["centered_values"]
            )
        ]
        header = ("feature", "grid_point", "pd_value", "centered_pd_value")
    else:
        raise DataError(f"unknown export kind {kind!r} (expected breakdown or pd_curves)")
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _cell(value) -> str:
    return value if isinstance(value, str) else repr(value)
