"""Report emission: machine JSON, table-shaped CSV, and an HTML swatch page.

Numbers stay at full precision in JSON (so it re-parses to an equal report)
and are rounded to 2 decimals in the CSV and HTML tables.  Nothing here
writes timestamps: emitting the same report twice gives identical bytes.
"""

from __future__ import annotations

import csv
import html
import io
import json
from pathlib import Path
from typing import Iterable

from .bench import CaseOutcome
from .colors import color_to_hex
from .errors import ValidationError
from .metrics import MetricsReport

_FORMATS = ("json", "csv", "html")


def _f2(value: float) -> str:
    return f"{value:.2f}"


def report_to_dict(report: MetricsReport) -> dict:
    return {
        "task": report.task,
        "accuracy": {str(k): v for k, v in report.accuracy.items()},
        "distribution": {str(k): v for k, v in report.distribution.items()},
        "element_breakdown": {
            kind: list(pair) for kind, pair in report.element_breakdown.items()
        },
        "similarity": dict(report.similarity),
        "diversity": list(report.diversity) if report.diversity is not None else None,
        "case_counts": {str(k): v for k, v in report.case_counts.items()},
        "parse_failures": report.parse_failures,
        "incomplete": report.incomplete,
        "metadata": dict(report.metadata),
    }


def _int_keys(table: dict) -> dict:
    return {int(k) if k.isdigit() else k: v for k, v in table.items()}


def report_from_dict(value: dict) -> MetricsReport:
    if not isinstance(value, dict):
        raise ValidationError("report JSON must be an object")
    diversity = value.get("diversity")
    return MetricsReport(
        task=value["task"],
        accuracy=_int_keys(value.get("accuracy", {})),
        distribution=_int_keys(value.get("distribution", {})),
        element_breakdown={
            kind: tuple(pair) for kind, pair in value.get("element_breakdown", {}).items()
        },
        similarity=dict(value.get("similarity", {})),
        diversity=tuple(diversity) if diversity is not None else None,
        case_counts=_int_keys(value.get("case_counts", {})),
        parse_failures=value.get("parse_failures", 0),
        incomplete=value.get("incomplete", False),
        metadata=dict(value.get("metadata", {})),
    )


def report_json(report: MetricsReport) -> str:
    return json.dumps(report_to_dict(report), ensure_ascii=False, indent=2) + "\n"


def load_report(path: str | Path) -> MetricsReport:
    with open(path, encoding="utf-8") as fh:
        return report_from_dict(json.load(fh))


def _completion_csv(report: MetricsReport) -> str:
    ks = sorted(set(report.accuracy) | set(report.distribution))
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["metric"] + [f"{k}-color" for k in ks])
    for name, table in (("accuracy", report.accuracy), ("distribution", report.distribution)):
        writer.writerow([name] + [_f2(table[k]) if k in table else "" for k in ks])
    if report.element_breakdown:
        writer.writerow([])
        writer.writerow(["element", "accuracy", "ratio"])
        for kind, (acc, ratio) in report.element_breakdown.items():
            writer.writerow([kind, _f2(acc), _f2(ratio)])
    return out.getvalue()


def _generation_csv(report: MetricsReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["metric", "mean", "std"])
    if report.similarity:
        writer.writerow(
            ["similarity", _f2(report.similarity["mean"]), _f2(report.similarity["std"])]
        )
    if report.diversity is not None:
        writer.writerow(["diversity", _f2(report.diversity[0]), _f2(report.diversity[1])])
    meta = report.metadata
    if "ground_truth_diversity_mean" in meta:
        writer.writerow(
            [
                "ground_truth_diversity",
                _f2(meta["ground_truth_diversity_mean"]),
                _f2(meta["ground_truth_diversity_std"]),
            ]
        )
    return out.getvalue()


def report_csv(report: MetricsReport) -> str:
    if report.task == "completion":
        return _completion_csv(report)
    return _generation_csv(report)


def ablation_csv(rows: list[tuple[str, MetricsReport]]) -> str:
    """One row per arm; metric columns depend on the (shared) task."""
    if not rows:
        raise ValidationError("ablation table needs at least one row")
    tasks = {report.task for _, report in rows}
    if len(tasks) != 1:
        raise ValidationError("ablation rows must share one task")
    task = tasks.pop()
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    arm_cols = ["arm", "representation", "profile", "structure", "exemplars"]
    if task == "completion":
        ks = sorted({k for _, r in rows for k in r.accuracy})
        writer.writerow(
            arm_cols
            + [f"accuracy_{k}" for k in ks]
            + [f"distribution_{k}" for k in ks]
            + ["parse_failures"]
        )
        for name, report in rows:
            meta = report.metadata
            writer.writerow(
                [name, meta.get("representation", ""), meta.get("profile_variant", ""),
                 meta.get("structure", ""), meta.get("exemplar_policy", "")]
                + [_f2(report.accuracy[k]) if k in report.accuracy else "" for k in ks]
                + [_f2(report.distribution[k]) if k in report.distribution else "" for k in ks]
                + [str(report.parse_failures)]
            )
    else:
        writer.writerow(
            arm_cols + ["similarity_mean", "similarity_std", "diversity_mean",
                        "diversity_std", "parse_failures"]
        )
        for name, report in rows:
            meta = report.metadata
            sim = report.similarity
            div = report.diversity or (None, None)
            writer.writerow(
                [name, meta.get("representation", ""), meta.get("profile_variant", ""),
                 meta.get("structure", ""), meta.get("exemplar_policy", "")]
                + [_f2(sim["mean"]) if sim else "", _f2(sim["std"]) if sim else ""]
                + [_f2(div[0]) if div[0] is not None else "",
                   _f2(div[1]) if div[1] is not None else ""]
                + [str(report.parse_failures)]
            )
    return out.getvalue()


_PAGE_STYLE = """\
body { font-family: sans-serif; margin: 2em; color: #222; }
table { border-collapse: collapse; margin-bottom: 2em; }
th, td { border: 1px solid #ccc; padding: 4px 10px; text-align: left; }
.swatch { display: inline-block; width: 28px; height: 28px; margin-right: 4px;
          border: 1px solid #888; vertical-align: middle; }
.fail { color: #a00; }
"""


def _swatches(colors) -> str:
    if colors is None:
        return ""
    spans = []
    for c in colors:
        hexcode = color_to_hex(c)
        spans.append(
            f'<span class="swatch" style="background:{hexcode}" title="{hexcode}"></span>'
        )
    return "".join(spans)


def _summary_rows(report: MetricsReport) -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []
    for k in sorted(report.accuracy):
        rows.append((f"accuracy ({k}-color)", _f2(report.accuracy[k])))
    for k in sorted(report.distribution):
        rows.append((f"distribution ({k}-color)", _f2(report.distribution[k])))
    if report.similarity:
        rows.append(("similarity mean", _f2(report.similarity["mean"])))
        rows.append(("similarity std", _f2(report.similarity["std"])))
    if report.diversity is not None:
        rows.append(("diversity mean", _f2(report.diversity[0])))
        rows.append(("diversity std", _f2(report.diversity[1])))
    rows.append(("parse failures", str(report.parse_failures)))
    if report.incomplete:
        rows.append(("incomplete", "yes"))
    return rows


def report_html(report: MetricsReport, cases: Iterable[CaseOutcome] = ()) -> str:
    """Self-contained page: summary table plus predicted vs ground-truth
    swatches for every case."""
    lines = [
        "<!DOCTYPE html>",
        '<html><head><meta charset="utf-8">',
        f"<title>{html.escape(report.task)} report</title>",
        f"<style>{_PAGE_STYLE}</style>",
        "</head><body>",
        f"<h1>{html.escape(report.task)} report</h1>",
        "<table><tr><th>metric</th><th>value</th></tr>",
    ]
    for name, value in _summary_rows(report):
        lines.append(f"<tr><td>{html.escape(name)}</td><td>{value}</td></tr>")
    lines.append("</table>")

    cases = list(cases)
    if cases:
        lines.append("<table><tr><th>case</th><th>k</th><th>predicted</th>"
                     "<th>ground truth</th><th>result</th></tr>")
        for case in cases:
            if case.failure is not None:
                predicted = f'<span class="fail">{html.escape(case.failure)} failure</span>'
            else:
                predicted = _swatches(case.predicted)
            if case.similarity is not None:
                result = _f2(case.similarity)
            elif case.correct is not None:
                result = "match" if case.correct else "miss"
            else:
                result = ""
            lines.append(
                "<tr>"
                f"<td>{html.escape(case.case_id)}</td>"
                f"<td>{case.k if case.k is not None else ''}</td>"
                f"<td>{predicted}</td>"
                f"<td>{_swatches(case.truth)}</td>"
                f"<td>{result}</td>"
                "</tr>"
            )
        lines.append("</table>")
    lines.append("</body></html>")
    return "\n".join(lines) + "\n"


def emit_report(
    report: MetricsReport,
    out_dir: str | Path,
    formats: Iterable[str] = _FORMATS,
    cases: Iterable[CaseOutcome] = (),
    basename: str = "report",
) -> dict[str, Path]:
    """Write the report in each requested format; returns format -> path."""
    formats = tuple(formats)
    for fmt in formats:
        if fmt not in _FORMATS:
            raise ValidationError(f"unknown report format {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    for fmt in formats:
        path = out_dir / f"{basename}.{fmt}"
        if fmt == "json":
            path.write_text(report_json(report), encoding="utf-8")
        elif fmt == "csv":
            path.write_text(report_csv(report), encoding="utf-8")
        else:
            path.write_text(report_html(report, cases), encoding="utf-8")
        paths[fmt] = path
    return paths
