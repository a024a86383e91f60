#!/usr/bin/env python3
"""Generate a small synthetic study and drive the pipeline end to end.

Creates a corpus of JATS files, fake external-tool outputs with planted
agreements and disagreements, and a pipeline config. With --autolabel a
scripted curator resolves every queue item so reports can be built
immediately; without it, the queues are left for interactive curation via
`rigorscreen serve`.

Usage:
    python3 scripts/make_toy_study.py --root toy_study --autolabel
    rigorscreen serve --config toy_study/config.json
"""

import argparse
import json
import random
import sys
from pathlib import Path

from rigorscreen.config import PipelineConfig
from rigorscreen.curation import CurationLabel
from rigorscreen.pipeline import Pipeline

ARTICLE_SHELL = """\
<article>
  <front>
    <article-meta>
      <article-id pub-id-type="pmc">{digits}</article-id>
    </article-meta>
  </front>
  <body>
    <sec><title>Methods</title><p>{methods}</p></sec>
    <sec><title>Results</title><p>{results}</p></sec>
  </body>
</article>
"""


def build_corpus(corpus_dir: Path, n_papers: int, rng: random.Random) -> list[str]:
    corpus_dir.mkdir(parents=True, exist_ok=True)
    pmcids = []
    for i in range(1, n_papers + 1):
        pmcid = f"PMC90{i:05d}"
        pmcids.append(pmcid)
        methods = [f"Cohort {i} was assessed with standard instruments."]
        results = ["Outcomes are summarized in the tables."]
        roll = rng.random()
        if roll < 0.3:
            methods.append(
                f"The trial was registered as NCT{rng.randrange(10**7, 10**8)} "
                "prior to enrollment."
            )
        elif roll < 0.4:
            results.append("NCTC clone 929 cells were used as controls.")
        if rng.random() < 0.25:
            results.append(
                "All analysis code is available at "
                f"https://github.com/toylab/study{i}."
            )
        (corpus_dir / f"{pmcid}.xml").write_text(
            ARTICLE_SHELL.format(digits=pmcid[3:],
                                 methods=" ".join(methods),
                                 results=" ".join(results)),
            encoding="utf-8",
        )
    return pmcids


def build_blinding_outputs(adapters_dir: Path, pmcids: list[str],
                           rng: random.Random) -> list[str]:
    adapters_dir.mkdir(parents=True, exist_ok=True)
    prerob = ["pmcid,blind"]
    sciscore = {}
    for pmcid in pmcids:
        truly_blinded = rng.random() < 0.35
        # each tool is right most of the time; errors create disagreements
        prerob_positive = truly_blinded ^ (rng.random() < 0.12)
        sciscore_positive = truly_blinded ^ (rng.random() < 0.08)
        prerob.append(f"{pmcid},{0.5 + rng.random() / 2 if prerob_positive else rng.random() / 2:.3f}")
        sciscore[pmcid] = {
            "Blinding": "Investigators were blinded to group allocation."
            if sciscore_positive else "not detected"
        }
    (adapters_dir / "prerob_blind.csv").write_text("\n".join(prerob) + "\n",
                                                   encoding="utf-8")
    (adapters_dir / "sciscore_blind.json").write_text(json.dumps(sciscore, indent=1),
                                                      encoding="utf-8")
    entries = []
    for name, payload in [
        ("prerob_blind.spec.json", {
            "tool": "pre-rob", "format": "prerob_csv", "criterion": "blinding",
            "criterion_field": "blind", "source": "prerob_blind.csv",
        }),
        ("sciscore_blind.spec.json", {
            "tool": "SciScore", "format": "sciscore_json", "criterion": "blinding",
            "criterion_field": "Blinding", "source": "sciscore_blind.json",
        }),
    ]:
        path = adapters_dir / name
        path.write_text(json.dumps(payload, indent=1), encoding="utf-8")
        entries.append(str(path))
    return entries


def autolabel(pipeline: Pipeline, rng: random.Random):
    """Scripted curator: resolves all pending items, marking a few
    complicated on the first pass to exercise pass 2."""
    store = pipeline.label_store()
    ts = 1.0
    for _ in range(3):
        pending = []
        for criterion in pipeline.active_criteria():
            pending.extend(store.pending_items(criterion))
        if not pending:
            break
        for item in pending:
            if item.pass_number == 1 and rng.random() < 0.1:
                decision = "complicated"
            elif item.origin == "control_positive":
                decision = "yes"
            elif item.origin == "control_negative":
                decision = "no"
            else:
                decision = "yes" if item.displayed_evidence else "no"
            store.record_label(CurationLabel(
                item_id=item.item_id, decision=decision,
                curator="scripted", pass_number=item.pass_number,
                timestamp=ts,
            ))
            ts += 1.0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--root", default="toy_study")
    parser.add_argument("--papers", type=int, default=30)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--autolabel", action="store_true",
                        help="resolve all queue items with a scripted curator")
    args = parser.parse_args()

    root = Path(args.root)
    rng = random.Random(args.seed)
    pmcids = build_corpus(root / "corpus", args.papers, rng)
    adapter_entries = build_blinding_outputs(root / "adapters", pmcids, rng)

    config = PipelineConfig(
        corpus_dir=str(root / "corpus"),
        criteria=["registration", "blinding", "open_code"],
        adapters=adapter_entries,
        output_dir=str(root / "out"),
        control_size=10,
        seeds={"queue": args.seed, "controls": args.seed + 1,
               "ensemble": args.seed + 2},
    )
    (root / "config.json").write_text(json.dumps(config.to_dict(), indent=2),
                                      encoding="utf-8")

    pipeline = Pipeline(config)
    pipeline.ingest()
    pipeline.detect()
    pipeline.import_adapters()
    queued = pipeline.build_queues()
    print(f"corpus: {len(pmcids)} papers -> {root / 'corpus'}")
    for criterion, n in sorted(queued.items()):
        print(f"queued {criterion}: {n} items")

    if not args.autolabel:
        print(f"\nconfig written to {root / 'config.json'}")
        print("start curating with:  rigorscreen serve --config "
              f"{root / 'config.json'}")
        return 0

    autolabel(pipeline, rng)
    reports = {}
    store = pipeline.label_store()
    for criterion in pipeline.active_criteria():
        pipeline.build_gold(criterion, store)
        reports[criterion] = pipeline.evaluate(criterion, store)
    print()
    for criterion, report in sorted(reports.items()):
        print(f"== {criterion}")
        print(f"   Function learned: {report.rule}")
        if report.percent_same is not None:
            print(f"   Percent same with {int(report.fraction * 100)}% data "
                  f"splits: {int(round(report.percent_same))}%")
        if report.ensemble_eval:
            ev = report.ensemble_eval
            print(f"   ensemble accuracy={ev.accuracy:.2f} precision={ev.precision:.2f} "
                  f"recall={ev.recall:.2f} f1={ev.f1:.2f}")
    print(f"\nreports under {root / 'out' / 'reports'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
