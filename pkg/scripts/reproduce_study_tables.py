#!/usr/bin/env python3
"""Reproduce ensemble rules and scores from companion study data.

Expects per-criterion CSV files under data/study/, one row per paper:

    pmcid,<tool-1>,<tool-2>,...,truth

with 0/1 cells for each tool's binary verdict and the gold label. For
each file this trains the ensemble, prints the learned rule, the
80%-subsample stability, and adjusted scores (identity rates, since the
control curation behind PPR/PNR is not part of these files).

Exits 2 when no data is present; the synthetic acceptance suite covers
that case.
"""

import csv
import sys
from pathlib import Path

from rigorscreen.ensemble import extract_boolean_rule, stability_analysis, train_logistic
from rigorscreen.metrics import adjusted_scores, confusion_counts, estimate_rates

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "study"


def load(path: Path):
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SystemExit(f"{path}: no rows")
    tools = [c for c in rows[0] if c not in ("pmcid", "truth")]
    as_bool = lambda v: v.strip() in ("1", "true", "TRUE", "yes")
    features = [[as_bool(row[t]) for t in tools] for row in rows]
    truth = [as_bool(row["truth"]) for row in rows]
    pmcids = [row.get("pmcid", str(i)) for i, row in enumerate(rows)]
    return tools, pmcids, features, truth


def main() -> int:
    files = sorted(DATA_DIR.glob("*.csv")) if DATA_DIR.is_dir() else []
    if not files:
        print(f"no study data found under {DATA_DIR}", file=sys.stderr)
        print("place per-criterion CSVs (pmcid,<tools...>,truth) there first",
              file=sys.stderr)
        return 2
    for path in files:
        tools, pmcids, features, truth = load(path)
        model = train_logistic(features, truth, tuple(tools))
        rule = extract_boolean_rule(model)
        stability = stability_analysis(features, truth, tuple(tools),
                                       fraction=0.8, trials=100, seed=0)
        predictions = {p: rule.evaluate(tuple(f))
                       for p, f in zip(pmcids, features)}
        gold = dict(zip(pmcids, truth))
        counts, _ = confusion_counts(gold, predictions)
        ev = adjusted_scores(counts, estimate_rates(["yes"], ["no"]))
        print(f"== {path.stem} ({len(pmcids)} papers, tools: {', '.join(tools)})")
        print(f"   Function learned: {rule.expression}")
        print(f"   Percent same with 80% data splits: "
              f"{int(round(stability.percent_same))}%")
        print(f"   ensemble accuracy={ev.accuracy:.2f} precision={ev.precision:.2f} "
              f"recall={ev.recall:.2f} f1={ev.f1:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
