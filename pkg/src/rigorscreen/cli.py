"""Command-line entry point: ingest, detect, import, queue, controls,
serve, evaluate, ensemble, report."""

from __future__ import annotations

import argparse
import json
import sys

from .config import PipelineConfig
from .curation import IncompleteCurationError
from .ensemble import extract_boolean_rule, stability_analysis, train_model
from .pipeline import Pipeline, PipelineIncompleteError
from .reports import render_report


def _load_config(args) -> PipelineConfig:
    if args.config:
        config = PipelineConfig.from_json_file(args.config)
    else:
        config = PipelineConfig()
    if getattr(args, "corpus", None):
        config.corpus_dir = args.corpus
    if getattr(args, "out", None):
        config.output_dir = args.out
    if getattr(args, "port", None):
        config.port = args.port
    if getattr(args, "seed", None) is not None:
        for stage in config.seeds:
            config.seeds[stage] = args.seed
    if getattr(args, "criterion", None):
        config.criteria = [args.criterion]
    return config


def cmd_ingest(args) -> int:
    pipeline = Pipeline(_load_config(args))
    corpus = pipeline.ingest()
    print(f"ingested {len(corpus.documents)} documents -> {pipeline.corpus_path}")
    return 0


def cmd_detect(args) -> int:
    pipeline = Pipeline(_load_config(args))
    counts = pipeline.detect()
    for criterion, n in sorted(counts.items()):
        print(f"{criterion}: {n} verdicts")
    return 0


def cmd_import(args) -> int:
    pipeline = Pipeline(_load_config(args))
    counts = pipeline.import_adapters()
    for criterion, n in sorted(counts.items()):
        print(f"{criterion}: {n} imported verdicts")
    return 0


def cmd_queue(args) -> int:
    pipeline = Pipeline(_load_config(args))
    counts = pipeline.build_queues()
    for criterion, n in sorted(counts.items()):
        print(f"{criterion}: {n} queued items -> {pipeline.queue_path(criterion)}")
    return 0


def cmd_controls(args) -> int:
    # control sets are built together with the queues so both land in one
    # queue file; this verb reports their composition
    pipeline = Pipeline(_load_config(args))
    pipeline.build_queues()
    for criterion in pipeline.active_criteria():
        items = pipeline.queue_items(criterion)
        pos = sum(1 for i in items if i.origin == "control_positive")
        neg = sum(1 for i in items if i.origin == "control_negative")
        print(f"{criterion}: {pos} control positives, {neg} control negatives")
    return 0


def cmd_serve(args) -> int:
    from .webapp import serve

    serve(_load_config(args))
    return 0


def cmd_evaluate(args) -> int:
    pipeline = Pipeline(_load_config(args))
    store = pipeline.label_store()
    criteria = ([args.criterion] if args.criterion
                else pipeline.active_criteria())
    status = 0
    for criterion in criteria:
        try:
            pipeline.build_gold(criterion, store)
            report = pipeline.evaluate(criterion, store)
        except IncompleteCurationError as exc:
            print(f"{criterion}: curation incomplete, {len(exc.item_ids)} items left")
            status = 1
            continue
        print(f"{criterion}: report written "
              f"({pipeline.report_path(criterion, 'md')})")
        if report.rule:
            print(f"  Function learned: {report.rule}")
    return status


def cmd_ensemble(args) -> int:
    pipeline = Pipeline(_load_config(args))
    config = pipeline.config
    store = pipeline.label_store()
    criteria = ([args.criterion] if args.criterion
                else pipeline.active_criteria())
    for criterion in criteria:
        matrix = pipeline.matrix(criterion)
        try:
            assembly = pipeline.build_gold(criterion, store)
        except IncompleteCurationError as exc:
            print(f"{criterion}: curation incomplete, {len(exc.item_ids)} items left")
            return 1
        gold = assembly.as_mapping()
        papers = [p for p in matrix.papers
                  if matrix.row_complete(p) and p in gold]
        features = [[bool(matrix.cell(p, t)) for t in matrix.tools] for p in papers]
        labels = [gold[p] for p in papers]
        model = train_model(features, labels, matrix.tools,
                            family=config.ensemble.family,
                            seed=config.seeds.get("ensemble", 0))
        rule = extract_boolean_rule(model)
        model_path = pipeline.report_path(criterion, "model.json")
        model_path.parent.mkdir(parents=True, exist_ok=True)
        model_path.write_text(model.to_json() + "\n", encoding="utf-8")
        print(f"{criterion}:")
        print(f"  Function learned: {rule.expression}")
        print(f"  model saved to {model_path}")
        if config.ensemble.trials > 0 and papers:
            report = stability_analysis(
                features, labels, matrix.tools,
                fraction=config.ensemble.fraction,
                trials=config.ensemble.trials,
                seed=config.seeds.get("ensemble", 0),
                family=config.ensemble.family,
            )
            pct = int(round(report.percent_same))
            print(f"  Percent same with {int(config.ensemble.fraction * 100)}% "
                  f"data splits: {pct}%")
    return 0


def cmd_report(args) -> int:
    pipeline = Pipeline(_load_config(args))
    report = pipeline.load_report(args.criterion)
    if report is None:
        print(f"no report built for {args.criterion}; run `evaluate` first",
              file=sys.stderr)
        return 1
    payload = render_report(report, args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(payload.decode("utf-8"))
    return 0


def cmd_run(args) -> int:
    pipeline = Pipeline(_load_config(args))
    try:
        reports = pipeline.run()
    except PipelineIncompleteError as exc:
        print(str(exc), file=sys.stderr)
        for criterion, n in sorted(exc.remaining.items()):
            print(f"  {criterion}: {n} items need labels", file=sys.stderr)
        return 1
    for criterion in sorted(reports):
        print(f"{criterion}: report written")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rigorscreen",
        description="Screen full texts for rigor criteria, curate tool "
                    "disagreements, and evaluate tools and ensembles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--config", help="pipeline config JSON")
        p.add_argument("--corpus", help="directory of JATS .xml files")
        p.add_argument("--criterion", help="restrict to one criterion")
        p.add_argument("--seed", type=int, help="override all stage seeds")
        p.add_argument("--out", help="output directory (or file for report)")
        p.add_argument("--format", default="md", choices=("md", "csv", "json"))
        p.add_argument("--port", type=int, help="HTTP port")
        p.set_defaults(fn=fn)
        return p

    add("ingest", cmd_ingest, help="parse the corpus directory")
    add("detect", cmd_detect, help="run built-in detectors")
    add("import", cmd_import, help="import external tool outputs")
    add("queue", cmd_queue, help="build blinded disagreement queues")
    add("controls", cmd_controls, help="build agreement control sets")
    add("serve", cmd_serve, help="run the curation HTTP service")
    add("evaluate", cmd_evaluate, help="assemble gold and score tools")
    add("ensemble", cmd_ensemble, help="train the ensemble and print its rule")
    add("report", cmd_report, help="render a built report")
    add("run", cmd_run, help="run the full pipeline end to end")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
