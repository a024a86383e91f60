"""Criterion reports: per-tool and ensemble scores, the learned rule,
agreement matrices, curation counts, and rendering to md/csv/json."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .metrics import AdjustedEvaluation, ConfusionCounts, RateEstimates

ENSEMBLE_LABEL = "Ensemble"
TRUTH_LABEL = "True"


class ReportFormatError(ValueError):
    pass


@dataclass(frozen=True)
class RegistryBreakdownRow:
    registry: str
    total: int
    per_tool: dict[str, int]


@dataclass(frozen=True)
class CriterionReport:
    criterion: str
    tools: tuple[str, ...]
    per_tool: dict[str, AdjustedEvaluation]
    ensemble_eval: AdjustedEvaluation | None
    rule: str
    rule_truth_table: tuple[bool, ...] | None
    percent_same: float | None
    fraction: float
    trials: int
    agreement_labels: tuple[str, ...]
    agreement: tuple[tuple[float | None, ...], ...]
    rates: RateEstimates
    n_curated: int
    n_presumed: int
    n_excluded_complicated: int
    n_absent: int
    seeds: dict[str, int] = field(default_factory=dict)
    registration_breakdown: tuple[RegistryBreakdownRow, ...] = ()

    def __post_init__(self):
        if len(set(self.tools)) != len(self.tools):
            raise ValueError("each tool must appear exactly once")
        for tool in self.tools:
            if tool not in self.per_tool:
                raise ValueError(f"missing evaluation for tool {tool!r}")

    # --- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "tools": list(self.tools),
            "per_tool": {t: _eval_to_dict(e) for t, e in self.per_tool.items()},
            "ensemble_eval": _eval_to_dict(self.ensemble_eval) if self.ensemble_eval else None,
            "rule": self.rule,
            "rule_truth_table": list(self.rule_truth_table) if self.rule_truth_table is not None else None,
            "percent_same": self.percent_same,
            "fraction": self.fraction,
            "trials": self.trials,
            "agreement_labels": list(self.agreement_labels),
            "agreement": [list(row) for row in self.agreement],
            "rates": _rates_to_dict(self.rates),
            "n_curated": self.n_curated,
            "n_presumed": self.n_presumed,
            "n_excluded_complicated": self.n_excluded_complicated,
            "n_absent": self.n_absent,
            "seeds": dict(self.seeds),
            "registration_breakdown": [
                {"registry": r.registry, "total": r.total,
                 "per_tool": dict(r.per_tool)}
                for r in self.registration_breakdown
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CriterionReport":
        return cls(
            criterion=obj["criterion"],
            tools=tuple(obj["tools"]),
            per_tool={t: _eval_from_dict(e) for t, e in obj["per_tool"].items()},
            ensemble_eval=_eval_from_dict(obj["ensemble_eval"]) if obj.get("ensemble_eval") else None,
            rule=obj["rule"],
            rule_truth_table=tuple(bool(v) for v in obj["rule_truth_table"]) if obj.get("rule_truth_table") is not None else None,
            percent_same=obj["percent_same"],
            fraction=obj["fraction"],
            trials=obj["trials"],
            agreement_labels=tuple(obj["agreement_labels"]),
            agreement=tuple(tuple(row) for row in obj["agreement"]),
            rates=_rates_from_dict(obj["rates"]),
            n_curated=obj["n_curated"],
            n_presumed=obj["n_presumed"],
            n_excluded_complicated=obj["n_excluded_complicated"],
            n_absent=obj["n_absent"],
            seeds=dict(obj.get("seeds", {})),
            registration_breakdown=tuple(
                RegistryBreakdownRow(
                    registry=r["registry"], total=r["total"],
                    per_tool=dict(r["per_tool"]),
                )
                for r in obj.get("registration_breakdown", ())
            ),
        )


def _rates_to_dict(rates: RateEstimates) -> dict:
    return {
        "ppr": rates.ppr,
        "pnr": rates.pnr,
        "n_pos_checked": rates.n_pos_checked,
        "n_neg_checked": rates.n_neg_checked,
        "flags": list(rates.flags),
    }


def _rates_from_dict(obj: dict) -> RateEstimates:
    return RateEstimates(
        ppr=obj["ppr"], pnr=obj["pnr"],
        n_pos_checked=obj["n_pos_checked"],
        n_neg_checked=obj["n_neg_checked"],
        flags=tuple(obj.get("flags", ())),
    )


def _eval_to_dict(ev: AdjustedEvaluation) -> dict:
    return {
        "raw": {"tp": ev.raw.tp, "fp": ev.raw.fp, "fn": ev.raw.fn, "tn": ev.raw.tn},
        "rates": _rates_to_dict(ev.rates),
        "adj_tp": ev.adj_tp, "adj_fp": ev.adj_fp,
        "adj_fn": ev.adj_fn, "adj_tn": ev.adj_tn,
        "accuracy": ev.accuracy, "precision": ev.precision,
        "recall": ev.recall, "f1": ev.f1,
        "flags": list(ev.flags),
    }


def _eval_from_dict(obj: dict) -> AdjustedEvaluation:
    return AdjustedEvaluation(
        raw=ConfusionCounts(**obj["raw"]),
        rates=_rates_from_dict(obj["rates"]),
        adj_tp=obj["adj_tp"], adj_fp=obj["adj_fp"],
        adj_fn=obj["adj_fn"], adj_tn=obj["adj_tn"],
        accuracy=obj["accuracy"], precision=obj["precision"],
        recall=obj["recall"], f1=obj["f1"],
        flags=tuple(obj.get("flags", ())),
    )


# --- rendering ----------------------------------------------------------


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.2f}"


def _score_rows(report: CriterionReport) -> list[list[str]]:
    rows = []
    for tool in report.tools:
        ev = report.per_tool[tool]
        rows.append([tool, _fmt(ev.accuracy), _fmt(ev.precision),
                     _fmt(ev.recall), _fmt(ev.f1)])
    if report.ensemble_eval is not None:
        ev = report.ensemble_eval
        rows.append([ENSEMBLE_LABEL, _fmt(ev.accuracy), _fmt(ev.precision),
                     _fmt(ev.recall), _fmt(ev.f1)])
    return rows


def _percent_same_line(report: CriterionReport) -> str:
    pct = int(round(report.percent_same)) if report.percent_same is not None else "n/a"
    return (f"Percent same with {int(round(report.fraction * 100))}% data "
            f"splits: {pct}%")


def render_markdown(report: CriterionReport) -> str:
    lines = [f"# Report: {report.criterion}", ""]

    lines.append("## Tool performance (adjusted)")
    lines.append("")
    lines.append("| Tool | Accuracy | Precision | Recall | F1 |")
    lines.append("| --- | --- | --- | --- | --- |")
    for row in _score_rows(report):
        lines.append("| " + " | ".join(row) + " |")
    lines.append("")

    lines.append(f"Function learned: {report.rule}")
    lines.append(_percent_same_line(report))
    lines.append("")

    lines.append("## Agreement (AC1)")
    lines.append("")
    labels = report.agreement_labels
    lines.append("| | " + " | ".join(labels) + " |")
    lines.append("| --- |" + " --- |" * len(labels))
    for name, row in zip(labels, report.agreement):
        cells = [_fmt(v) if v is not None else "" for v in row]
        lines.append(f"| {name} | " + " | ".join(cells) + " |")
    lines.append("")

    lines.append("## Curation")
    lines.append("")
    lines.append(f"- curated: {report.n_curated}")
    lines.append(f"- presumed by agreement: {report.n_presumed}")
    lines.append(f"- excluded (still complicated): {report.n_excluded_complicated}")
    lines.append(f"- excluded (absent tool cells): {report.n_absent}")
    lines.append(
        f"- presumed positive rate: {report.rates.ppr:.3f} "
        f"({report.rates.n_pos_checked} checked)"
    )
    lines.append(
        f"- presumed negative rate: {report.rates.pnr:.3f} "
        f"({report.rates.n_neg_checked} checked)"
    )
    lines.append("")

    if report.registration_breakdown:
        lines.append("## Registration identifiers")
        lines.append("")
        tools = [t for t in report.tools
                 if any(t in r.per_tool for r in report.registration_breakdown)]
        header = ["Registry", "Unique IDs"]
        for tool in tools:
            header.extend([f"{tool} n", f"{tool} %"])
        lines.append("| " + " | ".join(header) + " |")
        lines.append("| --- |" + " --- |" * (len(header) - 1))
        for row in report.registration_breakdown:
            cells = [row.registry, str(row.total)]
            for tool in tools:
                n = row.per_tool.get(tool, 0)
                pct = 100.0 * n / row.total if row.total else 0.0
                cells.extend([str(n), f"{pct:.1f}%"])
            lines.append("| " + " | ".join(cells) + " |")
        lines.append("")

    lines.append(f"Seeds: {json.dumps(report.seeds, sort_keys=True)}")
    lines.append("")
    return "\n".join(lines)


def render_csv(report: CriterionReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["Tool", "Accuracy", "Precision", "Recall", "F1"])
    for row in _score_rows(report):
        writer.writerow(row)
    writer.writerow([])
    writer.writerow(["Function learned", report.rule])
    writer.writerow(["Percent same", report.percent_same if report.percent_same is not None else ""])
    writer.writerow([])
    writer.writerow(["AC1"] + list(report.agreement_labels))
    for name, row in zip(report.agreement_labels, report.agreement):
        writer.writerow([name] + ["" if v is None else f"{v:.6f}" for v in row])
    return buf.getvalue()


def render_report(report: CriterionReport, format: str) -> bytes:
    """Render a report as markdown, CSV, or JSON bytes."""
    if format == "md":
        return render_markdown(report).encode("utf-8")
    if format == "csv":
        return render_csv(report).encode("utf-8")
    if format == "json":
        return (json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n").encode("utf-8")
    raise ReportFormatError(f"unknown report format {format!r} (md, csv, json)")
