"""Blinded curation: disagreement queues, agreement control sets, an
append-only label log with two passes, and gold-standard assembly.

Curation items never carry tool identity; the evidence sentence shown to
the curator comes from one tool drawn uniformly at random, and nothing in
the serialized item reveals which. Papers with absent matrix cells are
excluded from both the queue and the presumed stratum rather than
imputed.
"""

from __future__ import annotations

import csv
import json
import os
import random
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

from . import criteria
from .adapters import DetectionMatrix
from .detectors import ToolVerdict

ORIGIN_DISAGREEMENT = "disagreement"
ORIGIN_CONTROL_POSITIVE = "control_positive"
ORIGIN_CONTROL_NEGATIVE = "control_negative"
ORIGINS = (ORIGIN_DISAGREEMENT, ORIGIN_CONTROL_POSITIVE, ORIGIN_CONTROL_NEGATIVE)

DECISION_YES = "yes"
DECISION_NO = "no"
DECISION_COMPLICATED = "complicated"
DECISIONS = (DECISION_YES, DECISION_NO, DECISION_COMPLICATED)

PROVENANCE_CURATED = "curated"
PROVENANCE_PRESUMED = "presumed_agreement"


class UnknownItemError(KeyError):
    pass


class DuplicateLabelError(ValueError):
    pass


class PassOrderError(ValueError):
    pass


class IncompleteCurationError(ValueError):
    def __init__(self, item_ids: list[str]):
        self.item_ids = item_ids
        super().__init__(
            f"{len(item_ids)} curation items unresolved: {', '.join(item_ids[:10])}"
            + ("..." if len(item_ids) > 10 else "")
        )


def pmc_paper_link(pmcid: str) -> str:
    return f"https://www.ncbi.nlm.nih.gov/pmc/articles/{pmcid}/"


@dataclass(frozen=True)
class CurationItem:
    item_id: str
    pmcid: str
    criterion: str
    paper_link: str
    origin: str
    pass_number: int = 1
    displayed_evidence: str | None = None

    def __post_init__(self):
        criteria.validate_criterion(self.criterion)
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")
        if self.pass_number not in (1, 2):
            raise ValueError("pass_number must be 1 or 2")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "CurationItem":
        return cls(**obj)


@dataclass(frozen=True)
class CurationLabel:
    item_id: str
    decision: str
    curator: str
    pass_number: int = 1
    notes: str = ""
    notes2: str = ""
    timestamp: float = 0.0

    def __post_init__(self):
        if self.decision not in DECISIONS:
            raise ValueError(f"unknown decision {self.decision!r}")
        if self.pass_number not in (1, 2):
            raise ValueError("pass_number must be 1 or 2")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "CurationLabel":
        return cls(**obj)


@dataclass(frozen=True)
class GoldLabel:
    pmcid: str
    criterion: str
    truth: bool
    provenance: str

    def __post_init__(self):
        if self.provenance not in (PROVENANCE_CURATED, PROVENANCE_PRESUMED):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "GoldLabel":
        return cls(**obj)


# --- evidence selection ------------------------------------------------------


def _pick_display(candidates: list[tuple[bool, str | None]], rng: random.Random) -> str | None:
    """Uniform draw over the tools that reported; the drawn tool's sentence
    is shown only if it flagged presence and extracted one."""
    if not candidates:
        return None
    present, sentence = rng.choice(candidates)
    if present and sentence:
        return sentence
    return None


def select_display_evidence(verdicts: list[ToolVerdict], seed) -> str | None:
    ordered = sorted(verdicts, key=lambda v: v.tool)
    candidates = [
        (v.present, v.evidence[0] if v.evidence else None) for v in ordered
    ]
    return _pick_display(candidates, random.Random(seed))


def _display_from_matrix(matrix: DetectionMatrix, paper: str, rng: random.Random) -> str | None:
    candidates = []
    for tool in matrix.tools:
        cell = matrix.cell(paper, tool)
        if cell is None:
            continue
        candidates.append((cell, matrix.evidence.get((paper, tool))))
    return _pick_display(candidates, rng)


# --- queue construction ------------------------------------------------------


def build_disagreement_queue(
    matrix: DetectionMatrix,
    seed: int,
    *,
    link_for=pmc_paper_link,
) -> list[CurationItem]:
    """One blinded item per fully-reported paper on which any two tools
    differ; order randomized by seed."""
    if len(matrix.tools) < 2:
        raise ValueError("disagreement needs at least two tools")
    items = []
    for paper in matrix.disagreement_papers():
        evidence = _display_from_matrix(
            matrix, paper, random.Random(f"{seed}:{matrix.criterion}:{paper}")
        )
        items.append(CurationItem(
            item_id=f"{matrix.criterion}-{paper}",
            pmcid=paper,
            criterion=matrix.criterion,
            paper_link=link_for(paper),
            origin=ORIGIN_DISAGREEMENT,
            pass_number=1,
            displayed_evidence=evidence,
        ))
    random.Random(seed).shuffle(items)
    return items


@dataclass(frozen=True)
class ControlSelection:
    items: tuple[CurationItem, ...]
    shortfall: bool  # fewer all-agree papers than requested


def build_control_set(
    matrix: DetectionMatrix,
    seed: int,
    *,
    size: int = 100,
    exclude: Iterable[str] = (),
    link_for=pmc_paper_link,
) -> ControlSelection:
    """Sample all-tools-agree papers, half agreed-positive and half
    agreed-negative; a thin stratum is topped up from the other."""
    excluded = set(exclude)
    positives, negatives = [], []
    for paper in matrix.unanimous_papers():
        if paper in excluded:
            continue
        if matrix.cell(paper, matrix.tools[0]):
            positives.append(paper)
        else:
            negatives.append(paper)

    rng = random.Random(seed)
    total_available = len(positives) + len(negatives)
    shortfall = total_available < size
    if shortfall:
        take_pos, take_neg = len(positives), len(negatives)
    else:
        half = size // 2
        take_pos = min(half, len(positives))
        take_neg = min(size - take_pos, len(negatives))
        if take_pos + take_neg < size:
            take_pos = min(size - take_neg, len(positives))

    chosen = [
        (paper, ORIGIN_CONTROL_POSITIVE)
        for paper in sorted(rng.sample(sorted(positives), take_pos))
    ] + [
        (paper, ORIGIN_CONTROL_NEGATIVE)
        for paper in sorted(rng.sample(sorted(negatives), take_neg))
    ]
    items = []
    for paper, origin in chosen:
        evidence = _display_from_matrix(
            matrix, paper, random.Random(f"{seed}:{matrix.criterion}:{paper}:control")
        )
        items.append(CurationItem(
            item_id=f"{matrix.criterion}-{paper}-control",
            pmcid=paper,
            criterion=matrix.criterion,
            paper_link=link_for(paper),
            origin=origin,
            pass_number=1,
            displayed_evidence=evidence,
        ))
    rng.shuffle(items)
    return ControlSelection(items=tuple(items), shortfall=shortfall)


# --- label store -------------------------------------------------------------


class LabelStore:
    """Append-only label log with one label per (item, curator, pass).

    Writes go to an ndjson file and are flushed before acknowledgment;
    replaying the file reconstructs identical state (latest entry wins per
    key, so a crashed-then-replayed log converges).
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._items: dict[str, CurationItem] = {}
        self._labels: dict[tuple[str, str, int], CurationLabel] = {}
        if self.path and self.path.exists():
            self._replay(self.path)

    def _replay(self, path: Path):
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            label = CurationLabel.from_dict(json.loads(line))
            key = (label.item_id, label.curator, label.pass_number)
            self._labels[key] = label  # latest wins on replay

    def reload(self):
        """Re-read the log, picking up labels appended by other writers."""
        self._labels.clear()
        if self.path and self.path.exists():
            self._replay(self.path)

    def register_items(self, items: Iterable[CurationItem]):
        for item in items:
            existing = self._items.get(item.item_id)
            if existing is not None and existing != item:
                raise ValueError(f"item {item.item_id} already registered differently")
            self._items[item.item_id] = item

    @property
    def items(self) -> dict[str, CurationItem]:
        return dict(self._items)

    def labels(self) -> list[CurationLabel]:
        return list(self._labels.values())

    def labels_for_item(self, item_id: str) -> list[CurationLabel]:
        return [l for l in self._labels.values() if l.item_id == item_id]

    def pass1_decision(self, item_id: str) -> str | None:
        latest = None
        for label in self._labels.values():
            if label.item_id == item_id and label.pass_number == 1:
                if latest is None or label.timestamp >= latest.timestamp:
                    latest = label
        return latest.decision if latest else None

    def pass2_decision(self, item_id: str) -> str | None:
        latest = None
        for label in self._labels.values():
            if label.item_id == item_id and label.pass_number == 2:
                if latest is None or label.timestamp >= latest.timestamp:
                    latest = label
        return latest.decision if latest else None

    def final_decision(self, item_id: str) -> str | None:
        """Pass-2 resolution when present, else the pass-1 decision."""
        return self.pass2_decision(item_id) or self.pass1_decision(item_id)

    def needs_pass2(self, item_id: str) -> bool:
        return (self.pass1_decision(item_id) == DECISION_COMPLICATED
                and self.pass2_decision(item_id) is None)

    def pending_items(self, criterion: str | None = None) -> list[CurationItem]:
        """Items still awaiting a label. The first pass runs on all rows
        before any pass-2 re-entry is dispatched."""
        first_pass, second_pass = [], []
        for item in self._items.values():
            if criterion and item.criterion != criterion:
                continue
            if self.pass1_decision(item.item_id) is None:
                first_pass.append(item)
            elif self.needs_pass2(item.item_id):
                second_pass.append(CurationItem(
                    item_id=item.item_id,
                    pmcid=item.pmcid,
                    criterion=item.criterion,
                    paper_link=item.paper_link,
                    origin=item.origin,
                    pass_number=2,
                    displayed_evidence=item.displayed_evidence,
                ))
        return first_pass + second_pass

    def record_label(self, label: CurationLabel) -> CurationLabel:
        if label.item_id not in self._items:
            raise UnknownItemError(label.item_id)
        key = (label.item_id, label.curator, label.pass_number)
        if key in self._labels:
            raise DuplicateLabelError(
                f"label already recorded for {key}"
            )
        if label.pass_number == 2 and self.pass1_decision(label.item_id) != DECISION_COMPLICATED:
            raise PassOrderError(
                f"item {label.item_id} has no complicated pass-1 decision"
            )
        if label.timestamp == 0.0:
            label = CurationLabel(
                item_id=label.item_id, decision=label.decision,
                curator=label.curator, pass_number=label.pass_number,
                notes=label.notes, notes2=label.notes2,
                timestamp=time.time(),
            )
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            # durable before acknowledgment
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(label.to_dict(), sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        self._labels[(label.item_id, label.curator, label.pass_number)] = label
        return label

    def progress(self, criterion: str | None = None) -> dict:
        """Labeled/total per origin class and per-pass breakdown."""
        items = [i for i in self._items.values()
                 if criterion is None or i.criterion == criterion]
        disagreement = [i for i in items if i.origin == ORIGIN_DISAGREEMENT]
        control = [i for i in items if i.origin != ORIGIN_DISAGREEMENT]

        def done(pool):
            return sum(
                1 for i in pool
                if self.pass1_decision(i.item_id) is not None
                and not self.needs_pass2(i.item_id)
            )

        pass2_open = sum(1 for i in items if self.needs_pass2(i.item_id))
        pass2_done = sum(1 for i in items if self.pass2_decision(i.item_id) is not None)
        return {
            "disagreement_total": len(disagreement),
            "disagreement_done": done(disagreement),
            "control_total": len(control),
            "control_done": done(control),
            "pass2_pending": pass2_open,
            "pass2_done": pass2_done,
        }


# --- gold assembly -----------------------------------------------------------


@dataclass(frozen=True)
class GoldAssembly:
    labels: tuple[GoldLabel, ...]
    n_curated: int
    n_presumed: int
    excluded_complicated: tuple[str, ...]  # item ids still complicated after pass 2
    absent_excluded: tuple[str, ...]  # papers dropped for absent cells

    def as_mapping(self) -> dict[str, bool]:
        return {g.pmcid: g.truth for g in self.labels}


def assemble_gold_standard(
    matrix: DetectionMatrix,
    items: Iterable[CurationItem],
    store: LabelStore,
) -> GoldAssembly:
    """Presumed labels for unanimous papers, curated labels for resolved
    disagreements; items still complicated after pass 2 are excluded and
    counted. Unresolved items are an error."""
    disagreement_items = [i for i in items if i.origin == ORIGIN_DISAGREEMENT
                          and i.criterion == matrix.criterion]
    unresolved = []
    for item in disagreement_items:
        p1 = store.pass1_decision(item.item_id)
        if p1 is None:
            unresolved.append(item.item_id)
        elif p1 == DECISION_COMPLICATED and store.pass2_decision(item.item_id) is None:
            unresolved.append(item.item_id)
    if unresolved:
        raise IncompleteCurationError(sorted(unresolved))

    gold: list[GoldLabel] = []
    excluded_complicated = []
    for item in disagreement_items:
        decision = store.final_decision(item.item_id)
        if decision == DECISION_COMPLICATED:
            excluded_complicated.append(item.item_id)
            continue
        gold.append(GoldLabel(
            pmcid=item.pmcid,
            criterion=matrix.criterion,
            truth=decision == DECISION_YES,
            provenance=PROVENANCE_CURATED,
        ))

    curated_papers = {g.pmcid for g in gold} | {
        i.pmcid for i in disagreement_items
    }
    for paper in matrix.unanimous_papers():
        if paper in curated_papers:
            continue
        gold.append(GoldLabel(
            pmcid=paper,
            criterion=matrix.criterion,
            truth=bool(matrix.cell(paper, matrix.tools[0])),
            provenance=PROVENANCE_PRESUMED,
        ))

    return GoldAssembly(
        labels=tuple(gold),
        n_curated=sum(1 for g in gold if g.provenance == PROVENANCE_CURATED),
        n_presumed=sum(1 for g in gold if g.provenance == PROVENANCE_PRESUMED),
        excluded_complicated=tuple(sorted(excluded_complicated)),
        absent_excluded=tuple(matrix.absent_cell_papers()),
    )


def control_decisions(
    items: Iterable[CurationItem], store: LabelStore
) -> tuple[list[str], list[str]]:
    """Final decisions for the two control strata, for rate estimation."""
    positive, negative = [], []
    for item in items:
        decision = store.final_decision(item.item_id)
        if decision is None:
            continue
        if item.origin == ORIGIN_CONTROL_POSITIVE:
            positive.append(decision)
        elif item.origin == ORIGIN_CONTROL_NEGATIVE:
            negative.append(decision)
    return positive, negative


# --- persistence -------------------------------------------------------------


def write_queue(items: Iterable[CurationItem], path: str | Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_dict(), sort_keys=True) + "\n")


def read_queue(path: str | Path) -> list[CurationItem]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(CurationItem.from_dict(json.loads(line)))
    return out


def export_curation_sheet(
    items: Iterable[CurationItem], store: LabelStore, path: str | Path
):
    """CSV sheet: one row per item with decision plus the two notes
    columns."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item_id", "paper_link", "displayed_evidence",
                         "decision", "notes", "notes2"])
        for item in items:
            latest = None
            for label in store.labels_for_item(item.item_id):
                if latest is None or label.timestamp >= latest.timestamp:
                    latest = label
            writer.writerow([
                item.item_id,
                item.paper_link,
                item.displayed_evidence or "",
                latest.decision if latest else "",
                latest.notes if latest else "",
                latest.notes2 if latest else "",
            ])
