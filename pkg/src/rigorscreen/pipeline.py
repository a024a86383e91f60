"""End-to-end orchestration over an on-disk state directory.

Layout under the output directory:

    corpus.ndjson             document summaries
    results/{criterion}.ndjson  one ToolVerdict per paper-tool pair
    queue/{criterion}.ndjson    blinded curation items (disagreement + control)
    labels.ndjson             append-only curation label log
    gold/{criterion}.ndjson     assembled gold labels
    reports/{criterion}.{md,csv,json}

Every stage is deterministic given unchanged inputs and seeds, so reruns
rewrite byte-identical artifacts.
"""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from pathlib import Path

from . import criteria as criteria_mod
from .adapters import DetectionMatrix, import_tool_output, merge_into_matrix
from .boolexpr import expression_truth_table
from .config import PipelineConfig, load_adapter_entry
from .corpus import Corpus, load_corpus_dir, write_manifest
from .curation import (
    ORIGIN_DISAGREEMENT,
    CurationItem,
    LabelStore,
    assemble_gold_standard,
    build_control_set,
    build_disagreement_queue,
    control_decisions,
    read_queue,
    write_queue,
)
from .detectors import BUILTIN_DETECTORS, RegistryHit, ToolVerdict, run_detector
from .ensemble import extract_boolean_rule, predict, stability_analysis, train_model
from .metrics import (
    EmptyEvaluationError,
    adjusted_scores,
    confusion_counts,
    estimate_rates,
    gwet_ac1,
)
from .reports import (
    ENSEMBLE_LABEL,
    TRUTH_LABEL,
    CriterionReport,
    RegistryBreakdownRow,
    render_report,
)

log = logging.getLogger(__name__)

REPORT_FORMATS = ("md", "csv", "json")


class PipelineIncompleteError(RuntimeError):
    """Curation must finish before evaluation; carries remaining counts."""

    def __init__(self, remaining: dict[str, int]):
        self.remaining = remaining
        detail = ", ".join(f"{c}: {n} items" for c, n in sorted(remaining.items()))
        super().__init__(f"curation incomplete ({detail})")


class PipelineStageError(RuntimeError):
    """A stage failed; names the stage and keeps the cause chained."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        super().__init__(f"stage {stage!r} failed: {cause}")


class Pipeline:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.output_dir)
        self._corpus: Corpus | None = None

    # --- paths ----------------------------------------------------------

    @property
    def corpus_path(self) -> Path:
        return self.out / "corpus.ndjson"

    def results_path(self, criterion: str) -> Path:
        return self.out / "results" / f"{criterion}.ndjson"

    def queue_path(self, criterion: str) -> Path:
        return self.out / "queue" / f"{criterion}.ndjson"

    @property
    def labels_path(self) -> Path:
        return self.out / "labels.ndjson"

    def gold_path(self, criterion: str) -> Path:
        return self.out / "gold" / f"{criterion}.ndjson"

    def report_path(self, criterion: str, format: str) -> Path:
        return self.out / "reports" / f"{criterion}.{format}"

    # --- stages ----------------------------------------------------------

    def ingest(self) -> Corpus:
        corpus = load_corpus_dir(
            self.config.corpus_dir,
            seed=self.config.seeds.get("sample", 0),
            selection_rule="directory listing",
        )
        self.out.mkdir(parents=True, exist_ok=True)
        write_manifest(corpus, self.corpus_path)
        self._corpus = corpus
        return corpus

    def corpus(self) -> Corpus:
        if self._corpus is None:
            self.ingest()
        return self._corpus

    def read_verdicts(self, criterion: str) -> list[ToolVerdict]:
        path = self.results_path(criterion)
        if not path.exists():
            return []
        out = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                out.append(ToolVerdict.from_dict(json.loads(line)))
        return out

    def upsert_verdicts(self, criterion: str, verdicts: list[ToolVerdict]):
        """Merge verdicts into the criterion's results file; identical
        (paper, tool) pairs are replaced, everything else kept."""
        merged = {(v.pmcid, v.tool): v for v in self.read_verdicts(criterion)}
        for verdict in verdicts:
            merged[(verdict.pmcid, verdict.tool)] = verdict
        path = self.results_path(criterion)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for key in sorted(merged):
                fh.write(json.dumps(merged[key].to_dict(), sort_keys=True) + "\n")

    def detect(self) -> dict[str, int]:
        """Run the enabled built-in detectors over the corpus."""
        corpus = self.corpus()
        produced: dict[str, list[ToolVerdict]] = defaultdict(list)
        for spec in BUILTIN_DETECTORS:
            if spec.tool not in self.config.detectors:
                continue
            if self.config.criteria and spec.criterion not in self.config.criteria:
                continue
            for doc in corpus.documents:
                produced[spec.criterion].append(run_detector(spec, doc))
        for criterion, verdicts in produced.items():
            self.upsert_verdicts(criterion, verdicts)
        return {c: len(v) for c, v in produced.items()}

    def import_adapters(self) -> dict[str, int]:
        """Import every configured external tool output file."""
        produced: dict[str, list[ToolVerdict]] = defaultdict(list)
        for entry in self.config.adapters:
            spec, source = load_adapter_entry(entry)
            verdicts = import_tool_output(spec, source)
            produced[spec.criterion].extend(verdicts)
        for criterion, verdicts in produced.items():
            self.upsert_verdicts(criterion, verdicts)
        return {c: len(v) for c, v in produced.items()}

    def matrix(self, criterion: str) -> DetectionMatrix:
        verdicts = self.read_verdicts(criterion)
        return merge_into_matrix(verdicts, criterion)

    def active_criteria(self) -> list[str]:
        if self.config.criteria:
            return list(self.config.criteria)
        results_dir = self.out / "results"
        if not results_dir.is_dir():
            return []
        return sorted(p.stem for p in results_dir.glob("*.ndjson"))

    def build_queues(self) -> dict[str, int]:
        """Disagreement queue plus control set per criterion."""
        counts = {}
        for criterion in self.active_criteria():
            matrix = self.matrix(criterion)
            if len(matrix.tools) >= 2:
                items = list(build_disagreement_queue(
                    matrix, self.config.seeds.get("queue", 0),
                ))
            else:
                # a single tool cannot disagree with itself
                items = []
            selection = build_control_set(
                matrix, self.config.seeds.get("controls", 0),
                size=self.config.control_size,
            )
            if selection.shortfall:
                log.warning(
                    "%s: only %d all-agree papers for the control set",
                    criterion, len(selection.items),
                )
            items.extend(selection.items)
            write_queue(items, self.queue_path(criterion))
            counts[criterion] = len(items)
        return counts

    def label_store(self) -> LabelStore:
        store = LabelStore(self.labels_path)
        for criterion in self.active_criteria():
            path = self.queue_path(criterion)
            if path.exists():
                store.register_items(read_queue(path))
        return store

    def queue_items(self, criterion: str) -> list[CurationItem]:
        path = self.queue_path(criterion)
        return read_queue(path) if path.exists() else []

    def build_gold(self, criterion: str, store: LabelStore | None = None):
        store = store or self.label_store()
        matrix = self.matrix(criterion)
        items = self.queue_items(criterion)
        assembly = assemble_gold_standard(matrix, items, store)
        path = self.gold_path(criterion)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for gold in sorted(assembly.labels, key=lambda g: g.pmcid):
                fh.write(json.dumps(gold.to_dict(), sort_keys=True) + "\n")
        return assembly

    # --- evaluation -------------------------------------------------------

    def _ensemble_block(self, matrix, gold_map, rates, seeds):
        """Train, score and stability-check the ensemble; returns
        (evaluation, rule, truth_table, percent_same, predictions)."""
        papers = [p for p in matrix.papers
                  if matrix.row_complete(p) and p in gold_map]
        if not papers or not matrix.tools:
            return None, "", None, None, {}
        features = [[bool(matrix.cell(p, t)) for t in matrix.tools]
                    for p in papers]
        labels = [gold_map[p] for p in papers]
        model = train_model(
            features, labels, matrix.tools,
            family=self.config.ensemble.family,
            seed=seeds.get("ensemble", 0),
        )
        rule = extract_boolean_rule(model)
        predictions = {}
        for paper in matrix.papers:
            if matrix.row_complete(paper):
                inputs = [bool(matrix.cell(paper, t)) for t in matrix.tools]
                predictions[paper] = predict(model, inputs)
        try:
            counts, _ = confusion_counts(gold_map, predictions)
            evaluation = adjusted_scores(counts, rates)
        except EmptyEvaluationError:
            evaluation = None
        percent_same = None
        trials = self.config.ensemble.trials
        if trials > 0:
            min_rows = len(matrix.tools) + 1
            if self.config.ensemble.fraction * len(papers) >= min_rows:
                report = stability_analysis(
                    features, labels, matrix.tools,
                    fraction=self.config.ensemble.fraction,
                    trials=trials,
                    seed=seeds.get("ensemble", 0),
                    family=self.config.ensemble.family,
                )
                percent_same = report.percent_same
        return evaluation, rule.expression, rule.truth_table, percent_same, predictions

    def _agreement_matrix(self, matrix, gold_map, predictions):
        """Pairwise AC1, upper triangle; each pair uses the papers where
        both raters are defined."""
        sources: dict[str, dict[str, bool]] = {}
        for tool in matrix.tools:
            sources[tool] = {p: v for p, v in matrix.column(tool).items()
                             if v is not None}
        if predictions:
            sources[ENSEMBLE_LABEL] = dict(predictions)
        sources[TRUTH_LABEL] = dict(gold_map)
        labels = tuple(list(matrix.tools)
                       + ([ENSEMBLE_LABEL] if predictions else [])
                       + [TRUTH_LABEL])
        grid = []
        for i, a in enumerate(labels):
            row: list[float | None] = []
            for j, b in enumerate(labels):
                if j < i:
                    row.append(None)
                elif i == j:
                    row.append(1.0)
                else:
                    shared = sorted(set(sources[a]) & set(sources[b]))
                    if not shared:
                        row.append(None)
                    else:
                        r1 = [sources[a][p] for p in shared]
                        r2 = [sources[b][p] for p in shared]
                        row.append(round(gwet_ac1(r1, r2).ac1, 6))
            grid.append(tuple(row))
        return labels, tuple(grid)

    def _registration_breakdown(self, criterion) -> tuple[RegistryBreakdownRow, ...]:
        if criterion != criteria_mod.REGISTRATION:
            return ()
        verdicts = self.read_verdicts(criterion)
        found: dict[tuple[str, str], str] = {}
        per_tool: dict[str, set[tuple[str, str]]] = defaultdict(set)
        for verdict in verdicts:
            for entity in verdict.entities:
                if isinstance(entity, RegistryHit):
                    key = (verdict.pmcid, entity.identifier)
                    found[key] = entity.registry
                    per_tool[verdict.tool].add(key)
        if not found:
            return ()
        rows = []
        total_row = RegistryBreakdownRow(
            registry="TRN (total)",
            total=len(found),
            per_tool={t: len(keys) for t, keys in sorted(per_tool.items())},
        )
        rows.append(total_row)
        by_registry: dict[str, set[tuple[str, str]]] = defaultdict(set)
        for key, registry in found.items():
            by_registry[registry].add(key)
        for registry in sorted(by_registry, key=lambda r: (-len(by_registry[r]), r)):
            keys = by_registry[registry]
            rows.append(RegistryBreakdownRow(
                registry=registry,
                total=len(keys),
                per_tool={
                    t: len(keys & per_tool[t])
                    for t in sorted(per_tool)
                    if keys & per_tool[t]
                },
            ))
        return tuple(rows)

    def evaluate(self, criterion: str, store: LabelStore | None = None) -> CriterionReport:
        """Gold, rates, per-tool and ensemble scores, agreement, report."""
        store = store or self.label_store()
        matrix = self.matrix(criterion)
        items = self.queue_items(criterion)
        assembly = assemble_gold_standard(matrix, items, store)
        gold_map = assembly.as_mapping()

        control_items = [i for i in items if i.origin != ORIGIN_DISAGREEMENT]
        positive, negative = control_decisions(control_items, store)
        rates = estimate_rates(positive, negative)

        per_tool = {}
        for tool in matrix.tools:
            counts, _ = confusion_counts(gold_map, matrix.column(tool))
            per_tool[tool] = adjusted_scores(counts, rates)

        seeds = dict(self.config.seeds)
        (ensemble_eval, rule, rule_table, percent_same,
         predictions) = self._ensemble_block(matrix, gold_map, rates, seeds)
        agreement_labels, agreement = self._agreement_matrix(
            matrix, gold_map, predictions
        )

        report = CriterionReport(
            criterion=criterion,
            tools=matrix.tools,
            per_tool=per_tool,
            ensemble_eval=ensemble_eval,
            rule=rule,
            rule_truth_table=rule_table,
            percent_same=percent_same,
            fraction=self.config.ensemble.fraction,
            trials=self.config.ensemble.trials,
            agreement_labels=agreement_labels,
            agreement=agreement,
            rates=rates,
            n_curated=assembly.n_curated,
            n_presumed=assembly.n_presumed,
            n_excluded_complicated=len(assembly.excluded_complicated),
            n_absent=len(assembly.absent_excluded),
            seeds=seeds,
            registration_breakdown=self._registration_breakdown(criterion),
        )
        if rule and rule_table is not None:
            # the rendered rule must parse back to the extracted table
            parsed = expression_truth_table(rule, matrix.tools)
            if parsed != rule_table:
                raise AssertionError("rendered rule does not reproduce its truth table")
        self.write_report(report)
        return report

    def write_report(self, report: CriterionReport):
        for format in REPORT_FORMATS:
            path = self.report_path(report.criterion, format)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(render_report(report, format))

    def load_report(self, criterion: str) -> CriterionReport | None:
        path = self.report_path(criterion, "json")
        if not path.exists():
            return None
        return CriterionReport.from_dict(json.loads(path.read_text(encoding="utf-8")))

    # --- full run ---------------------------------------------------------

    def run(self) -> dict[str, CriterionReport]:
        """ingest -> detect -> import -> queues -> (labels complete?) ->
        gold -> evaluations -> reports."""

        def stage(name, fn, *args):
            try:
                return fn(*args)
            except (PipelineIncompleteError, PipelineStageError):
                raise
            except Exception as exc:
                raise PipelineStageError(name, exc) from exc

        stage("config", self.config.validate_paths)
        stage("ingest", self.ingest)
        stage("detect", self.detect)
        stage("import", self.import_adapters)
        stage("queue", self.build_queues)
        store = stage("labels", self.label_store)
        remaining = {}
        for criterion in self.active_criteria():
            pending = [i for i in store.pending_items(criterion)
                       if i.origin == ORIGIN_DISAGREEMENT]
            if pending:
                remaining[criterion] = len(pending)
        if remaining:
            raise PipelineIncompleteError(remaining)
        reports = {}
        for criterion in self.active_criteria():
            stage("gold", self.build_gold, criterion, store)
            reports[criterion] = stage("evaluate", self.evaluate, criterion, store)
        return reports


def run_pipeline(config: PipelineConfig) -> dict[str, CriterionReport]:
    return Pipeline(config).run()
