"""Adapters that normalize external tools' native output files into
ToolVerdict records, and the papers-by-tools detection matrix.

Each supported format carries exactly one positivity rule. Papers missing
from a tool's output become explicit "absent" cells, distinct from
negative verdicts; downstream analyses exclude them rather than imputing.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from . import criteria
from .detectors import ToolVerdict

PREROB_CSV = "prerob_csv"
SCISCORE_JSON = "sciscore_json"
CONSORT_TM_CSV = "consort_tm_csv"
BARZOOKA_CSV = "barzooka_csv"
ODDPUB_CSV = "oddpub_csv"
SOFTCITE_JSON = "softcite_json"

RULE_THRESHOLD = "threshold"
RULE_SENTENCE_PRESENT = "sentence-present"
RULE_FLAG_TRUE = "flag-true"
RULE_COLUMN_INDEX = "column-index"

# one positivity rule per format
FORMAT_RULES = {
    PREROB_CSV: RULE_THRESHOLD,
    SCISCORE_JSON: RULE_SENTENCE_PRESENT,
    CONSORT_TM_CSV: RULE_FLAG_TRUE,
    BARZOOKA_CSV: RULE_COLUMN_INDEX,
    ODDPUB_CSV: RULE_FLAG_TRUE,
    SOFTCITE_JSON: RULE_SENTENCE_PRESENT,
}

# rigor-table values that count as negative despite being non-empty
_SCISCORE_NEGATIVE_VALUES = {"not required", "not detected"}

_TRUTHY = {"true", "1", "yes", "t"}
_FALSY = {"false", "0", "no", "f", ""}


class AdapterSchemaError(ValueError):
    """Source file does not expose an expected column or path."""


class AdapterValueError(ValueError):
    """A cell value cannot be interpreted under the positivity rule."""


class MatrixConflictError(ValueError):
    def __init__(self, pairs: list[tuple[str, str]]):
        self.pairs = pairs
        listed = ", ".join(f"({p}, {t})" for p, t in pairs)
        super().__init__(f"conflicting duplicate verdicts for: {listed}")


@dataclass(frozen=True)
class AdapterSpec:
    tool: str
    format: str
    criterion: str
    criterion_field: str
    pmcid_field: str = "pmcid"
    evidence_field: str = ""
    threshold: float = 0.5

    def __post_init__(self):
        if self.format not in FORMAT_RULES:
            raise ValueError(f"unknown adapter format {self.format!r}")
        criteria.validate_criterion(self.criterion)
        if not self.criterion_field:
            raise ValueError("criterion_field must be non-empty")

    @property
    def positivity_rule(self) -> str:
        return FORMAT_RULES[self.format]

    @classmethod
    def from_json_file(cls, path: str | Path) -> "AdapterSpec":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**obj)


def _read_csv_rows(path: Path) -> tuple[list[str], list[dict]]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise AdapterSchemaError(f"{path}: empty file, no header row")
        return list(reader.fieldnames), list(reader)


def _require_column(fieldnames: list[str], column: str, path: Path):
    if column not in fieldnames:
        raise AdapterSchemaError(
            f"{path}: missing column {column!r} (have {fieldnames})"
        )


def _parse_flag(value: str, where: str) -> bool:
    low = (value or "").strip().lower()
    if low in _TRUTHY:
        return True
    if low in _FALSY:
        return False
    raise AdapterValueError(f"{where}: cannot read {value!r} as a boolean flag")


def _import_prerob(spec: AdapterSpec, path: Path) -> list[ToolVerdict]:
    fieldnames, rows = _read_csv_rows(path)
    _require_column(fieldnames, spec.pmcid_field, path)
    _require_column(fieldnames, spec.criterion_field, path)
    verdicts = {}
    for lineno, row in enumerate(rows, start=2):
        pmcid = row[spec.pmcid_field].strip()
        raw = row[spec.criterion_field]
        try:
            score = float(raw)
        except (TypeError, ValueError):
            raise AdapterValueError(
                f"{path} row {lineno}: score {raw!r} is not numeric"
            ) from None
        if pmcid in verdicts:
            raise AdapterSchemaError(f"{path} row {lineno}: duplicate paper {pmcid}")
        present = score > spec.threshold  # strictly greater; ties negative
        evidence = ()
        if present and spec.evidence_field and row.get(spec.evidence_field):
            evidence = (row[spec.evidence_field],)
        verdicts[pmcid] = ToolVerdict(
            tool=spec.tool, criterion=spec.criterion, pmcid=pmcid,
            present=present, evidence=evidence,
            score=min(max(score, 0.0), 1.0),
        )
    return list(verdicts.values())


def _import_sciscore(spec: AdapterSpec, path: Path) -> list[ToolVerdict]:
    data = json.loads(path.read_text(encoding="utf-8"))
    if isinstance(data, list):
        try:
            data = {entry["pmcid"]: entry for entry in data}
        except (TypeError, KeyError):
            raise AdapterSchemaError(f"{path}: list entries need a 'pmcid' key") from None
    if not isinstance(data, dict):
        raise AdapterSchemaError(f"{path}: expected a JSON object or list")
    verdicts = []
    for pmcid, record in data.items():
        if not isinstance(record, dict):
            raise AdapterSchemaError(f"{path}: entry for {pmcid} is not an object")
        if spec.criterion_field not in record:
            raise AdapterSchemaError(
                f"{path}: entry for {pmcid} lacks field {spec.criterion_field!r}"
            )
        value = (record[spec.criterion_field] or "").strip()
        present = bool(value) and value.lower() not in _SCISCORE_NEGATIVE_VALUES
        verdicts.append(ToolVerdict(
            tool=spec.tool, criterion=spec.criterion, pmcid=pmcid,
            present=present, evidence=(value,) if present else (),
        ))
    return verdicts


def _import_consort_tm(spec: AdapterSpec, path: Path) -> list[ToolVerdict]:
    fieldnames, rows = _read_csv_rows(path)
    _require_column(fieldnames, spec.pmcid_field, path)
    _require_column(fieldnames, spec.criterion_field, path)
    sentence_field = spec.evidence_field or "sentence"
    flagged: dict[str, list[str]] = {}
    seen: list[str] = []
    for lineno, row in enumerate(rows, start=2):
        pmcid = row[spec.pmcid_field].strip()
        if pmcid not in flagged:
            flagged[pmcid] = []
            seen.append(pmcid)
        if _parse_flag(row[spec.criterion_field], f"{path} row {lineno}"):
            sentence = row.get(sentence_field, "")
            if sentence:
                flagged[pmcid].append(sentence)
            else:
                flagged[pmcid].append(f"(row {lineno} flagged)")
    return [
        ToolVerdict(
            tool=spec.tool, criterion=spec.criterion, pmcid=pmcid,
            present=bool(flagged[pmcid]), evidence=tuple(flagged[pmcid]),
        )
        for pmcid in seen
    ]


def _import_barzooka(spec: AdapterSpec, path: Path) -> list[ToolVerdict]:
    # positivity comes from a 1-based column position, not a header name
    try:
        index = int(spec.criterion_field) - 1
    except ValueError:
        raise AdapterSchemaError(
            f"{spec.criterion_field!r} is not a column position"
        ) from None
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise AdapterSchemaError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if index >= len(header):
        raise AdapterSchemaError(
            f"{path}: column {index + 1} out of range ({len(header)} columns)"
        )
    verdicts = {}
    for lineno, row in enumerate(body, start=2):
        pmcid = row[0].strip()
        if pmcid in verdicts:
            raise AdapterSchemaError(f"{path} row {lineno}: duplicate paper {pmcid}")
        present = _parse_flag(row[index], f"{path} row {lineno}")
        verdicts[pmcid] = ToolVerdict(
            tool=spec.tool, criterion=spec.criterion, pmcid=pmcid,
            present=present,
        )
    return list(verdicts.values())


def _import_oddpub(spec: AdapterSpec, path: Path) -> list[ToolVerdict]:
    fieldnames, rows = _read_csv_rows(path)
    _require_column(fieldnames, spec.pmcid_field, path)
    _require_column(fieldnames, spec.criterion_field, path)
    verdicts = {}
    for lineno, row in enumerate(rows, start=2):
        pmcid = row[spec.pmcid_field].strip()
        if pmcid in verdicts:
            raise AdapterSchemaError(f"{path} row {lineno}: duplicate paper {pmcid}")
        present = _parse_flag(row[spec.criterion_field], f"{path} row {lineno}")
        evidence = ()
        if present and spec.evidence_field and row.get(spec.evidence_field):
            evidence = (row[spec.evidence_field],)
        verdicts[pmcid] = ToolVerdict(
            tool=spec.tool, criterion=spec.criterion, pmcid=pmcid,
            present=present, evidence=evidence,
        )
    return list(verdicts.values())


def _import_softcite(spec: AdapterSpec, path: Path) -> list[ToolVerdict]:
    data = json.loads(path.read_text(encoding="utf-8"))
    if isinstance(data, list):
        try:
            data = {entry["pmcid"]: entry.get(spec.criterion_field, [])
                    for entry in data}
        except (TypeError, KeyError):
            raise AdapterSchemaError(f"{path}: list entries need a 'pmcid' key") from None
    if not isinstance(data, dict):
        raise AdapterSchemaError(f"{path}: expected a JSON object or list")
    verdicts = []
    for pmcid, mentions in data.items():
        if isinstance(mentions, dict):
            mentions = mentions.get(spec.criterion_field, [])
        if mentions is None:
            mentions = []
        if not isinstance(mentions, list):
            raise AdapterSchemaError(
                f"{path}: mentions for {pmcid} must be a list"
            )
        evidence = []
        names = []
        for mention in mentions:
            if isinstance(mention, dict):
                if mention.get("context"):
                    evidence.append(mention["context"])
                names.append(mention.get("name", ""))
            else:
                names.append(str(mention))
        present = len(mentions) >= 1
        verdicts.append(ToolVerdict(
            tool=spec.tool, criterion=spec.criterion, pmcid=pmcid,
            present=present,
            evidence=tuple(evidence) if present else (),
            entities=tuple(n for n in names if n),
        ))
    return verdicts


_IMPORTERS = {
    PREROB_CSV: _import_prerob,
    SCISCORE_JSON: _import_sciscore,
    CONSORT_TM_CSV: _import_consort_tm,
    BARZOOKA_CSV: _import_barzooka,
    ODDPUB_CSV: _import_oddpub,
    SOFTCITE_JSON: _import_softcite,
}


def import_tool_output(spec: AdapterSpec, source: str | Path) -> list[ToolVerdict]:
    """Normalize one tool's native output file into verdict records."""
    return _IMPORTERS[spec.format](spec, Path(source))


# --- detection matrix --------------------------------------------------------


@dataclass
class DetectionMatrix:
    """Per-criterion papers-by-tools grid of binary verdicts.

    Missing cells are absent (None), an explicit state distinct from a
    negative verdict.
    """

    criterion: str
    papers: tuple[str, ...]
    tools: tuple[str, ...]
    cells: dict = field(default_factory=dict)
    evidence: dict = field(default_factory=dict)

    def cell(self, paper: str, tool: str) -> bool | None:
        return self.cells.get((paper, tool))

    def row(self, paper: str) -> dict[str, bool | None]:
        return {tool: self.cell(paper, tool) for tool in self.tools}

    def grid(self) -> list[list[bool | None]]:
        return [[self.cell(p, t) for t in self.tools] for p in self.papers]

    def column(self, tool: str) -> dict[str, bool | None]:
        return {paper: self.cell(paper, tool) for paper in self.papers}

    def row_complete(self, paper: str) -> bool:
        return all(self.cell(paper, tool) is not None for tool in self.tools)

    def unanimous_papers(self) -> list[str]:
        """Papers where every tool reported and all verdicts agree."""
        out = []
        for paper in self.papers:
            values = [self.cell(paper, tool) for tool in self.tools]
            if None not in values and len(set(values)) == 1:
                out.append(paper)
        return out

    def disagreement_papers(self) -> list[str]:
        """Papers where every tool reported and any two verdicts differ."""
        out = []
        for paper in self.papers:
            values = [self.cell(paper, tool) for tool in self.tools]
            if None not in values and len(set(values)) > 1:
                out.append(paper)
        return out

    def absent_cell_papers(self) -> list[str]:
        return [p for p in self.papers if not self.row_complete(p)]


def merge_into_matrix(verdicts: Iterable[ToolVerdict], criterion: str) -> DetectionMatrix:
    """Union verdicts into a matrix; conflicting duplicates are an error."""
    cells: dict[tuple[str, str], bool] = {}
    evidence: dict[tuple[str, str], str] = {}
    conflicts: list[tuple[str, str]] = []
    papers: set[str] = set()
    tools: set[str] = set()
    for verdict in verdicts:
        if verdict.criterion != criterion:
            raise ValueError(
                f"verdict criterion {verdict.criterion!r} does not match {criterion!r}"
            )
        key = (verdict.pmcid, verdict.tool)
        if key in cells:
            if cells[key] != verdict.present:
                conflicts.append(key)
            continue
        cells[key] = verdict.present
        if verdict.evidence:
            evidence[key] = verdict.evidence[0]
        papers.add(verdict.pmcid)
        tools.add(verdict.tool)
    if conflicts:
        raise MatrixConflictError(sorted(set(conflicts)))
    return DetectionMatrix(
        criterion=criterion,
        papers=tuple(sorted(papers)),
        tools=tuple(sorted(tools)),
        cells=cells,
        evidence=evidence,
    )
