#!/usr/bin/env python3
"""Seed a service state directory with exactly 12 blinded queue items.

Builds 14 papers whose two blinding tools disagree on 12 of them (the
other two agree, one positive and one negative), with no control set, so
the blinding queue holds exactly 12 items. Writes the pipeline config to
<root>/config.json.

Usage: python3 seed_twelve.py <root-dir>
"""

import json
import sys
from pathlib import Path

from rigorscreen.config import PipelineConfig
from rigorscreen.pipeline import Pipeline

ARTICLE = """\
<article>
  <front><article-meta>
    <article-id pub-id-type="pmc">{digits}</article-id>
  </article-meta></front>
  <body>
    <sec><title>Methods</title><p>Cohort {i} was assessed blind to group.</p></sec>
  </body>
</article>
"""


def main() -> int:
    root = Path(sys.argv[1])
    corpus_dir = root / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)

    pmcids = [f"PMC95000{i:02d}" for i in range(1, 15)]
    for i, pmcid in enumerate(pmcids, start=1):
        (corpus_dir / f"{pmcid}.xml").write_text(
            ARTICLE.format(digits=pmcid[3:], i=i), encoding="utf-8"
        )

    # papers 1..12 disagree (alternating direction); 13 agrees positive,
    # 14 agrees negative
    prerob_rows = ["pmcid,blind"]
    sciscore = {}
    for i, pmcid in enumerate(pmcids, start=1):
        if i <= 12:
            prerob_positive = i % 2 == 1
            sciscore_positive = not prerob_positive
        else:
            prerob_positive = sciscore_positive = (i == 13)
        prerob_rows.append(f"{pmcid},{0.9 if prerob_positive else 0.1}")
        sciscore[pmcid] = {
            "Blinding": "Assessors were blinded to treatment allocation."
            if sciscore_positive else "not detected"
        }

    adapters_dir = root / "adapters"
    adapters_dir.mkdir(parents=True, exist_ok=True)
    (adapters_dir / "prerob.csv").write_text("\n".join(prerob_rows) + "\n",
                                             encoding="utf-8")
    (adapters_dir / "sciscore.json").write_text(json.dumps(sciscore, indent=1),
                                                encoding="utf-8")
    (adapters_dir / "prerob.spec.json").write_text(json.dumps({
        "tool": "pre-rob", "format": "prerob_csv", "criterion": "blinding",
        "criterion_field": "blind", "source": "prerob.csv",
    }), encoding="utf-8")
    (adapters_dir / "sciscore.spec.json").write_text(json.dumps({
        "tool": "SciScore", "format": "sciscore_json", "criterion": "blinding",
        "criterion_field": "Blinding", "source": "sciscore.json",
    }), encoding="utf-8")

    config = PipelineConfig(
        corpus_dir=str(corpus_dir),
        criteria=["blinding"],
        adapters=[str(adapters_dir / "prerob.spec.json"),
                  str(adapters_dir / "sciscore.spec.json")],
        output_dir=str(root / "out"),
        control_size=0,
        seeds={"queue": 42, "controls": 43, "ensemble": 44},
    )
    (root / "config.json").write_text(json.dumps(config.to_dict(), indent=2),
                                      encoding="utf-8")

    pipeline = Pipeline(config)
    pipeline.ingest()
    pipeline.detect()
    pipeline.import_adapters()
    queued = pipeline.build_queues()
    assert queued == {"blinding": 12}, queued
    print(root / "config.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
