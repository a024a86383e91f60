"""rigorscreen: screen scientific full texts for rigor and transparency
criteria, curate tool disagreements blind, and evaluate tools and
ensembles with presumption-adjusted metrics."""

__version__ = "0.1.0"

from .adapters import AdapterSpec, DetectionMatrix, import_tool_output, merge_into_matrix
from .boolexpr import BooleanRule
from .config import PipelineConfig
from .corpus import Corpus, Document, Section, parse_document, sample_corpus
from .curation import (
    CurationItem,
    CurationLabel,
    GoldLabel,
    LabelStore,
    assemble_gold_standard,
    build_control_set,
    build_disagreement_queue,
    select_display_evidence,
)
from .detectors import (
    RegistryHit,
    ToolVerdict,
    detect_nct_naive,
    detect_open_code,
    scan_registration_identifiers,
)
from .ensemble import (
    EnsembleModel,
    StabilityReport,
    extract_boolean_rule,
    predict,
    stability_analysis,
    train_logistic,
)
from .metrics import (
    AdjustedEvaluation,
    AgreementResult,
    ConfusionCounts,
    RateEstimates,
    adjusted_scores,
    bland_altman,
    compare_accuracies,
    confusion_counts,
    estimate_rates,
    gwet_ac1,
)
from .pipeline import Pipeline, run_pipeline
from .reports import CriterionReport, render_report

__all__ = [
    "AdapterSpec",
    "AdjustedEvaluation",
    "AgreementResult",
    "BooleanRule",
    "ConfusionCounts",
    "Corpus",
    "CriterionReport",
    "CurationItem",
    "CurationLabel",
    "DetectionMatrix",
    "Document",
    "EnsembleModel",
    "GoldLabel",
    "LabelStore",
    "Pipeline",
    "PipelineConfig",
    "RateEstimates",
    "RegistryHit",
    "Section",
    "StabilityReport",
    "ToolVerdict",
    "adjusted_scores",
    "assemble_gold_standard",
    "bland_altman",
    "build_control_set",
    "build_disagreement_queue",
    "compare_accuracies",
    "confusion_counts",
    "detect_nct_naive",
    "detect_open_code",
    "estimate_rates",
    "extract_boolean_rule",
    "gwet_ac1",
    "import_tool_output",
    "merge_into_matrix",
    "parse_document",
    "predict",
    "render_report",
    "run_pipeline",
    "sample_corpus",
    "scan_registration_identifiers",
    "select_display_evidence",
    "stability_analysis",
    "train_logistic",
]
