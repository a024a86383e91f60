"""Built-in reference detectors and the verdict contract all tools satisfy.

The registration scanner carries one pattern per supported registry,
authored from each registry's published identifier format and anchored on
both sides so grant numbers, catalog numbers and similar look-alikes do
not bleed through. The naive NCT detector is deliberately a bare substring
check; its false-positive mode on strings like "NCTC clone 929" is part of
its contract.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Callable

from .corpus import Document, methods_source_spans, title_is_abstract
from . import criteria

LOCATION_ABSTRACT = "abstract"
LOCATION_METHODS = "methods"
LOCATION_OTHER = "other"

# curated false-positive taxonomy for registration hits
FP_CATEGORIES = (
    "funding_id",
    "drug_id",
    "datapoint",
    "catalog_id",
    "medical_acronym",
    "medical_device",
)

_GUARD_L = r"(?<![A-Za-z0-9])"
_GUARD_R = r"(?![A-Za-z0-9])"

# identifier shapes per registry; see each registry's public format notes
_REGISTRY_FORMATS = {
    "ctgov": r"NCT\d{8}",
    "umin": r"UMIN\d{9}",
    "drks": r"DRKS\d{8}",
    "irct": r"IRCT\d{8,14}N\d{1,3}",
    "chictr": r"ChiCTR(?:-[A-Za-z]{2,5}-\d{8}|\d{10})",
    "isrctn": r"ISRCTN\d{8}",
    "ctri": r"CTRI/\d{4}/\d{2,3}/\d{6}",
    # bare year-serial-check shape; extra hyphen guards keep longer
    # hyphenated strings (grant ids, serials) from matching inside
    "eudract": r"(?<!-)\d{4}-\d{6}-\d{2}(?!-)",
    "actrn": r"ACTRN\d{14}",
    "jrct": r"jRCT[a-z]?\d{9,10}",
    "kct": r"KCT\d{7}",
    "ntr": r"NTR\d{2,4}",
    "pactr": r"PACTR\d{15,16}",
}

REGISTRIES = tuple(_REGISTRY_FORMATS)

_REGISTRY_PATTERNS = {
    registry: re.compile(_GUARD_L + pattern + _GUARD_R)
    for registry, pattern in _REGISTRY_FORMATS.items()
}


@dataclass(frozen=True)
class RegistryHit:
    registry: str
    identifier: str
    char_span: tuple[int, int]
    location: str = LOCATION_OTHER

    def __post_init__(self):
        if self.registry not in REGISTRIES:
            raise ValueError(f"unknown registry {self.registry!r}")
        if self.location not in (LOCATION_ABSTRACT, LOCATION_METHODS, LOCATION_OTHER):
            raise ValueError(f"unknown location {self.location!r}")


@dataclass(frozen=True)
class ToolVerdict:
    tool: str
    criterion: str
    pmcid: str
    present: bool
    evidence: tuple[str, ...] = ()
    score: float | None = None
    entities: tuple = ()

    def __post_init__(self):
        criteria.validate_criterion(self.criterion)
        if not self.present and self.evidence:
            raise ValueError("a negative verdict cannot carry evidence")
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")

    def to_dict(self) -> dict:
        entities = []
        for ent in self.entities:
            if isinstance(ent, RegistryHit):
                entities.append({
                    "registry": ent.registry,
                    "identifier": ent.identifier,
                    "char_span": list(ent.char_span),
                    "location": ent.location,
                })
            else:
                entities.append(ent)
        return {
            "tool": self.tool,
            "criterion": self.criterion,
            "pmcid": self.pmcid,
            "present": self.present,
            "evidence": list(self.evidence),
            "score": self.score,
            "entities": entities,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ToolVerdict":
        entities = []
        for ent in obj.get("entities", []):
            if isinstance(ent, dict):
                entities.append(RegistryHit(
                    registry=ent["registry"],
                    identifier=ent["identifier"],
                    char_span=tuple(ent["char_span"]),
                    location=ent.get("location", LOCATION_OTHER),
                ))
            else:
                entities.append(ent)
        return cls(
            tool=obj["tool"],
            criterion=obj["criterion"],
            pmcid=obj["pmcid"],
            present=bool(obj["present"]),
            evidence=tuple(obj.get("evidence", ())),
            score=obj.get("score"),
            entities=tuple(entities),
        )


# --- sentence handling -------------------------------------------------------

_SENTENCE_BREAK = re.compile(r"(?<=[.?!])\s+(?=[A-Z])")


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Deterministic sentence spans: break after ./?/! followed by
    whitespace and an uppercase letter."""
    spans = []
    start = 0
    for match in _SENTENCE_BREAK.finditer(text):
        spans.append((start, match.start()))
        start = match.end()
    if start < len(text):
        spans.append((start, len(text)))
    return spans


def sentence_containing(text: str, span: tuple[int, int]) -> str:
    for start, end in split_sentences(text):
        if start <= span[0] and span[1] <= end:
            return text[start:end]
    return text[span[0]:span[1]]


# --- registration ------------------------------------------------------------


def scan_registration_identifiers(text: str) -> list[RegistryHit]:
    """All registry-identifier matches, deduplicated and sorted
    alphabetically by identifier. Spans index into the given text, which
    therefore literally contains each identifier."""
    raw: list[RegistryHit] = []
    for registry, pattern in _REGISTRY_PATTERNS.items():
        for match in pattern.finditer(text):
            raw.append(RegistryHit(
                registry=registry,
                identifier=match.group(0),
                char_span=(match.start(), match.end()),
            ))
    # drop overlaps, preferring the earlier/longer match
    raw.sort(key=lambda h: (h.char_span[0], -(h.char_span[1] - h.char_span[0])))
    taken: list[RegistryHit] = []
    last_end = -1
    for hit in raw:
        if hit.char_span[0] >= last_end:
            taken.append(hit)
            last_end = hit.char_span[1]
    # dedup on identifier, keep first occurrence, then order alphabetically
    unique: dict[str, RegistryHit] = {}
    for hit in taken:
        unique.setdefault(hit.identifier, hit)
    return sorted(unique.values(), key=lambda h: h.identifier)


def detect_nct_naive(text: str) -> bool:
    """True iff the exact substring "NCT" occurs anywhere."""
    return "NCT" in text


def classify_hit_location(doc: Document, hit: RegistryHit) -> str:
    """Locate a hit: methods-source sections, then abstract-titled
    sections, else other."""
    start, end = hit.char_span
    if not (0 <= start <= end <= len(doc.full_text)):
        raise ValueError(f"span {hit.char_span} outside document bounds")
    for span_start, span_end in methods_source_spans(doc):
        if span_start <= start and end <= span_end:
            return LOCATION_METHODS
    for section in doc.sections:
        if section.start <= start and end <= section.end and title_is_abstract(section.title):
            return LOCATION_ABSTRACT
    return LOCATION_OTHER


# --- open code ---------------------------------------------------------------


@dataclass(frozen=True)
class OpenCodeConfig:
    """Keyword lists for the open-code conjunction; editable configuration
    data, shipped with defaults."""

    code_words: tuple[str, ...] = (
        "code", "codes", "script", "scripts", "software", "source code",
        "analysis pipeline",
    )
    repository_hosts: tuple[str, ...] = (
        "github.com", "gitlab.com", "bitbucket.org", "zenodo.org", "osf.io",
        "figshare.com", "codeocean.com", "sourceforge.net",
    )
    availability_words: tuple[str, ...] = (
        "available", "deposited", "released", "hosted", "accessible",
        "can be found", "provided at", "uploaded", "shared at", "archived",
    )
    request_phrases: tuple[str, ...] = (
        "upon request", "on request", "upon reasonable request",
    )
    reuse_phrases: tuple[str, ...] = (
        "we used", "was used", "were used", "obtained from",
        "downloaded from", "adapted from", "as previously described",
    )
    negation_phrases: tuple[str, ...] = (
        "no code", "no original code", "no custom code", "not available",
        "not publicly available",
    )

    def sentence_is_open_code(self, sentence: str) -> bool:
        low = sentence.lower()
        has_code = any(w in low for w in self.code_words)
        has_repo = (
            any(h in low for h in self.repository_hosts)
            or re.search(r"https?://\S+", low) is not None
        )
        has_availability = any(w in low for w in self.availability_words)
        on_request = any(p in low for p in self.request_phrases)
        reused = any(p in low for p in self.reuse_phrases)
        negated = any(p in low for p in self.negation_phrases)
        return (has_code and has_repo and has_availability
                and not on_request and not reused and not negated)

    @classmethod
    def from_json_file(cls, path) -> "OpenCodeConfig":
        """Load keyword lists from a JSON object; absent keys keep the
        shipped defaults."""
        import json
        from pathlib import Path

        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        defaults = cls()
        kwargs = {}
        for name in ("code_words", "repository_hosts", "availability_words",
                     "request_phrases", "reuse_phrases", "negation_phrases"):
            kwargs[name] = tuple(obj.get(name, getattr(defaults, name)))
        return cls(**kwargs)


DEFAULT_OPEN_CODE_CONFIG = OpenCodeConfig()


def detect_open_code(doc: Document, config: OpenCodeConfig = DEFAULT_OPEN_CODE_CONFIG,
                     *, tool: str = "opencode-screener") -> ToolVerdict:
    """Positive iff some sentence states author-written code at an open,
    resolvable location; on-request availability and third-party reuse do
    not count."""
    matched = []
    for start, end in split_sentences(doc.full_text):
        sentence = doc.full_text[start:end]
        if config.sentence_is_open_code(sentence):
            matched.append(sentence)
    return ToolVerdict(
        tool=tool,
        criterion=criteria.OPEN_CODE,
        pmcid=doc.pmcid,
        present=bool(matched),
        evidence=tuple(matched),
    )


# --- detector registry -------------------------------------------------------

INPUT_FULL_TEXT = "full_text"
INPUT_METHODS_TEXT = "methods_text"


@dataclass(frozen=True)
class DetectorSpec:
    tool: str
    criterion: str
    input: str
    run: Callable[[Document], ToolVerdict] = field(repr=False, compare=False, default=None)


def _run_trn_scanner(doc: Document) -> ToolVerdict:
    hits = scan_registration_identifiers(doc.full_text)
    hits = [replace(h, location=classify_hit_location(doc, h)) for h in hits]
    evidence = []
    for hit in hits:
        sentence = sentence_containing(doc.full_text, hit.char_span)
        if sentence not in evidence:
            evidence.append(sentence)
    return ToolVerdict(
        tool="trn-scanner",
        criterion=criteria.REGISTRATION,
        pmcid=doc.pmcid,
        present=bool(hits),
        evidence=tuple(evidence),
        entities=tuple(hits),
    )


def _run_nct_naive(doc: Document) -> ToolVerdict:
    present = detect_nct_naive(doc.full_text)
    evidence = ()
    if present:
        idx = doc.full_text.index("NCT")
        evidence = (sentence_containing(doc.full_text, (idx, idx + 3)),)
    return ToolVerdict(
        tool="nct-naive",
        criterion=criteria.REGISTRATION,
        pmcid=doc.pmcid,
        present=present,
        evidence=evidence,
    )


BUILTIN_DETECTORS = (
    DetectorSpec("trn-scanner", criteria.REGISTRATION, INPUT_FULL_TEXT,
                 _run_trn_scanner),
    DetectorSpec("nct-naive", criteria.REGISTRATION, INPUT_FULL_TEXT,
                 _run_nct_naive),
    DetectorSpec("opencode-screener", criteria.OPEN_CODE, INPUT_FULL_TEXT,
                 detect_open_code),
)


def run_detector(spec: DetectorSpec, doc: Document) -> ToolVerdict:
    return spec.run(doc)
