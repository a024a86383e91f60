"""JATS-style XML ingestion: body text extraction, methods-section slicing,
and reproducible corpus sampling.

Text assembly is block-aware: paragraphs, titles, table cells and captions
are separated by single spaces, while inline markup (italic, xref, ...)
concatenates without injected whitespace, so identifiers split by inline
tags survive intact. Runs of whitespace collapse to single spaces.
"""

from __future__ import annotations

import json
import logging
import random
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

log = logging.getLogger(__name__)

PMCID_RE = re.compile(r"^PMC\d+$")

# titles whose sections feed methods_text
METHODS_TITLE_WORDS = ("method", "procedure")

# block-level JATS elements: a space separates their text from neighbors
_BLOCK_TAGS = {
    "body", "sec", "p", "title", "label", "caption", "abstract",
    "table-wrap", "table", "thead", "tbody", "tfoot", "tr", "td", "th",
    "fig", "fig-group", "list", "list-item", "def-list", "def-item",
    "term", "def", "disp-quote", "disp-formula", "statement",
    "boxed-text", "fn", "fn-group", "ack", "supplementary-material",
}


class DocumentError(ValueError):
    pass


class ParseFailure(DocumentError):
    """Malformed XML, with the failure position."""

    def __init__(self, message: str, line: int, column: int, offset: int):
        super().__init__(f"{message} (line {line}, column {column}, offset {offset})")
        self.line = line
        self.column = column
        self.offset = offset


class NoBodyError(DocumentError):
    """The XML parsed but contains no body element."""


class SampleSizeError(ValueError):
    pass


@dataclass(frozen=True)
class Section:
    title: str
    text: str
    depth: int
    start: int
    end: int


@dataclass
class Document:
    pmcid: str
    full_text: str
    methods_text: str
    sections: list[Section]
    source_path: str = ""
    pdf_path: str = ""

    def __post_init__(self):
        if self.pmcid and not PMCID_RE.match(self.pmcid):
            raise DocumentError(f"pmcid {self.pmcid!r} must be PMC followed by digits")


@dataclass
class Corpus:
    documents: list[Document]
    sample_seed: int = 0
    selection_rule: str = ""

    def __post_init__(self):
        seen = set()
        for doc in self.documents:
            if doc.pmcid in seen:
                raise DocumentError(f"duplicate pmcid in corpus: {doc.pmcid}")
            seen.add(doc.pmcid)

    def get(self, pmcid: str) -> Document:
        for doc in self.documents:
            if doc.pmcid == pmcid:
                return doc
        raise KeyError(pmcid)


def _localname(tag) -> str:
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1]


def title_matches_methods(title: str) -> bool:
    low = title.lower()
    return any(word in low for word in METHODS_TITLE_WORDS)


def title_is_abstract(title: str) -> bool:
    return "abstract" in title.lower()


class _Assembler:
    """Accumulates body text as space-joined blocks and records section spans."""

    def __init__(self):
        self.blocks: list[str] = []
        self._buffer: list[str] = []
        self.sections: list[dict] = []

    def flush(self):
        raw = "".join(self._buffer)
        self._buffer.clear()
        text = re.sub(r"\s+", " ", raw).strip()
        if text:
            self.blocks.append(text)

    def add(self, text: str | None):
        if text:
            self._buffer.append(text)

    def block_cursor(self) -> int:
        return len(self.blocks)

    def finish(self) -> tuple[str, list[Section]]:
        self.flush()
        offsets = []
        pos = 0
        for block in self.blocks:
            offsets.append(pos)
            pos += len(block) + 1
        full_text = " ".join(self.blocks)
        sections = []
        for rec in self.sections:
            first, last = rec["block_start"], rec["block_end"]
            if first >= last:
                start = end = offsets[first] if first < len(offsets) else len(full_text)
            else:
                start = offsets[first]
                end = offsets[last - 1] + len(self.blocks[last - 1])
            sections.append(
                Section(
                    title=rec["title"],
                    text=full_text[start:end],
                    depth=rec["depth"],
                    start=start,
                    end=end,
                )
            )
        return full_text, sections


def _walk(elem, assembler: _Assembler, depth: int):
    tag = _localname(elem.tag)
    is_block = tag in _BLOCK_TAGS
    record = None
    if is_block:
        assembler.flush()
    if tag == "sec":
        title_el = next(
            (c for c in elem if _localname(c.tag) == "title"), None
        )
        title = re.sub(r"\s+", " ", "".join(title_el.itertext())).strip() if title_el is not None else ""
        record = {
            "title": title,
            "depth": depth,
            "block_start": assembler.block_cursor(),
            "block_end": None,
        }
        assembler.sections.append(record)
        depth += 1
    assembler.add(elem.text)
    for child in elem:
        _walk(child, assembler, depth)
        assembler.add(child.tail)
    if is_block:
        assembler.flush()
    if record is not None:
        record["block_end"] = assembler.block_cursor()


def _extract_pmcid(root) -> str:
    for el in root.iter():
        if _localname(el.tag) == "article-id":
            kind = (el.get("pub-id-type") or "").lower()
            if kind in ("pmcid", "pmc"):
                value = (el.text or "").strip()
                if value.isdigit():
                    value = f"PMC{value}"
                if PMCID_RE.match(value):
                    return value
    return ""


def parse_document(xml: str, *, source_path: str = "", pmcid: str | None = None) -> Document:
    """Parse one JATS article into a Document.

    Raises ParseFailure for malformed XML (with position) and NoBodyError
    when no body element exists; callers exclude such files rather than
    crash.
    """
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as exc:
        line, column = exc.position
        preceding = sum(len(l) + 1 for l in xml.split("\n")[: line - 1])
        raise ParseFailure(str(exc.msg), line, column, preceding + column) from exc

    body = next((el for el in root.iter() if _localname(el.tag) == "body"), None)
    if body is None:
        raise NoBodyError("no body element in document")

    assembler = _Assembler()
    _walk(body, assembler, depth=0)
    full_text, sections = assembler.finish()
    if pmcid is None:
        pmcid = _extract_pmcid(root)

    doc = Document(
        pmcid=pmcid,
        full_text=full_text,
        methods_text="",
        sections=sections,
        source_path=source_path,
    )
    doc.methods_text = extract_methods_text(doc)
    return doc


def extract_methods_text(doc: Document) -> str:
    """Concatenated text of sections whose title names methods or
    procedures, nested subsections included, in document order."""
    picked: list[Section] = []
    for section in doc.sections:
        if not title_matches_methods(section.title):
            continue
        if any(s.start <= section.start and section.end <= s.end for s in picked):
            continue  # nested inside an already-selected section
        picked.append(section)
    return " ".join(s.text for s in picked if s.text)


def methods_source_spans(doc: Document) -> list[tuple[int, int]]:
    """Character spans of the sections feeding methods_text."""
    spans: list[tuple[int, int]] = []
    for section in doc.sections:
        if not title_matches_methods(section.title):
            continue
        if any(a <= section.start and section.end <= b for a, b in spans):
            continue
        spans.append((section.start, section.end))
    return spans


def sample_corpus(candidates: Iterable[str], n: int, seed: int) -> list[str]:
    """Draw n distinct ids uniformly without replacement, reproducibly."""
    pool = list(candidates)
    if n > len(pool):
        raise SampleSizeError(f"cannot sample {n} from {len(pool)} candidates")
    return random.Random(seed).sample(pool, n)


def load_corpus_dir(directory: str | Path, *, seed: int = 0,
                    selection_rule: str = "") -> Corpus:
    """Parse every .xml file in a directory; record .pdf siblings as paths.

    Files that fail to parse or lack a body are excluded with a log line.
    """
    directory = Path(directory)
    documents = []
    for path in sorted(directory.glob("*.xml")):
        try:
            doc = parse_document(
                path.read_text(encoding="utf-8"),
                source_path=str(path),
            )
        except DocumentError as exc:
            log.warning("excluding %s: %s", path.name, exc)
            continue
        if not doc.pmcid:
            stem = path.stem
            if PMCID_RE.match(stem):
                doc.pmcid = stem
            else:
                log.warning("excluding %s: no pmcid in XML or filename", path.name)
                continue
        pdf = path.with_suffix(".pdf")
        if pdf.exists():
            doc.pdf_path = str(pdf)
        documents.append(doc)
    return Corpus(documents=documents, sample_seed=seed,
                  selection_rule=selection_rule)


def write_manifest(corpus: Corpus, path: str | Path) -> None:
    """Newline-delimited JSON manifest, one document summary per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            fh.write(json.dumps({
                "pmcid": doc.pmcid,
                "source_path": doc.source_path,
                "has_methods": bool(doc.methods_text),
                "n_sections": len(doc.sections),
            }, sort_keys=True) + "\n")
