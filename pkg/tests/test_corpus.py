import collections
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigorscreen.corpus import (
    Corpus,
    Document,
    DocumentError,
    NoBodyError,
    ParseFailure,
    SampleSizeError,
    extract_methods_text,
    load_corpus_dir,
    parse_document,
    sample_corpus,
    write_manifest,
)

from .conftest import jats


def oracle_body_text(xml: str) -> str:
    """Independent walker: per-block itertext joined with single spaces."""
    block = {"body", "sec", "p", "title", "caption", "table-wrap", "table",
             "tr", "td", "th", "label", "list", "list-item"}
    root = ET.fromstring(xml)
    body = next(el for el in root.iter() if el.tag.rsplit("}", 1)[-1] == "body")
    blocks, buf = [], []

    def flush():
        text = " ".join("".join(buf).split())
        buf.clear()
        if text:
            blocks.append(text)

    def rec(el):
        tag = el.tag.rsplit("}", 1)[-1]
        if tag in block:
            flush()
        buf.append(el.text or "")
        for child in el:
            rec(child)
            buf.append(child.tail or "")
        if tag in block:
            flush()

    rec(body)
    flush()
    return " ".join(blocks)


class TestParseDocument:
    def test_two_paragraphs_single_space_joined(self):
        doc = parse_document("<article><body><p>A.</p><p>B.</p></body></article>")
        assert doc.full_text == "A. B."

    def test_missing_body(self):
        with pytest.raises(NoBodyError):
            parse_document("<article><front/></article>")

    def test_malformed_xml_reports_offset(self):
        bad = "<article><body><p>A.</p>\n<p>B.</banana></body></article>"
        with pytest.raises(ParseFailure) as err:
            parse_document(bad)
        assert err.value.offset > 0
        assert "offset" in str(err.value)

    def test_realistic_sample_matches_independent_walker(self, realistic_xml):
        doc = parse_document(realistic_xml)
        oracle = oracle_body_text(realistic_xml)
        assert doc.full_text == oracle
        assert len(doc.full_text) == len(oracle)

    def test_inline_markup_does_not_split_words(self):
        doc = parse_document(
            "<article><body><p>Registered at Clini<italic>calTrials</italic>.gov"
            " (NCT01234567).</p></body></article>"
        )
        assert "ClinicalTrials.gov" in doc.full_text

    def test_whitespace_collapsed(self):
        doc = parse_document(
            "<article><body><p>Two\n\n   spaced    words.</p></body></article>"
        )
        assert doc.full_text == "Two spaced words."

    def test_front_abstract_excluded_from_full_text(self, realistic_xml):
        doc = parse_document(realistic_xml)
        assert "Front-matter abstract" not in doc.full_text

    def test_table_text_included(self, realistic_xml):
        doc = parse_document(realistic_xml)
        assert "Baseline characteristics." in doc.full_text
        assert "63.5" in doc.full_text

    def test_sections_depths_and_spans(self, realistic_xml):
        doc = parse_document(realistic_xml)
        titles = [s.title for s in doc.sections]
        assert titles == ["Abstract", "Introduction", "Materials and Methods",
                          "Statistical analysis", "Results", "Discussion"]
        by_title = {s.title: s for s in doc.sections}
        assert by_title["Materials and Methods"].depth == 0
        assert by_title["Statistical analysis"].depth == 1
        for section in doc.sections:
            assert doc.full_text[section.start:section.end] == section.text

    def test_pmcid_extracted_and_prefixed(self, realistic_xml):
        doc = parse_document(realistic_xml)
        assert doc.pmcid == "PMC8000001"

    def test_parse_is_deterministic(self, realistic_xml):
        a = parse_document(realistic_xml)
        b = parse_document(realistic_xml)
        assert a.full_text == b.full_text
        assert a.sections == b.sections
        assert a.methods_text == b.methods_text

    def test_bad_pmcid_rejected(self):
        with pytest.raises(DocumentError):
            Document(pmcid="NOT-AN-ID", full_text="x", methods_text="",
                     sections=[])


class TestMethodsExtraction:
    def test_only_methods_section_returned(self):
        doc = parse_document(jats(
            "<sec><title>Introduction</title><p>intro text</p></sec>"
            "<sec><title>Materials and Methods</title><p>methods text</p></sec>"
            "<sec><title>Results</title><p>results text</p></sec>"
        ))
        assert "methods text" in doc.methods_text
        assert "intro text" not in doc.methods_text
        assert "results text" not in doc.methods_text

    def test_procedures_title_included(self):
        doc = parse_document(jats(
            "<sec><title>Experimental Procedures</title><p>proc text</p></sec>"
        ))
        assert "proc text" in doc.methods_text

    def test_case_insensitive_matching(self):
        doc = parse_document(jats(
            "<sec><title>Methodology</title><p>aaa</p></sec>"
            "<sec><title>METHODS</title><p>bbb</p></sec>"
            "<sec><title>Results</title><p>ccc</p></sec>"
        ))
        # oracle: lowercase substring check over the title list
        titles = ["Methodology", "METHODS", "Results"]
        expected = [t for t in titles
                    if "method" in t.lower() or "procedure" in t.lower()]
        assert expected == ["Methodology", "METHODS"]
        assert "aaa" in doc.methods_text and "bbb" in doc.methods_text
        assert "ccc" not in doc.methods_text

    def test_nested_subsections_included_once(self, realistic_xml):
        doc = parse_document(realistic_xml)
        assert "ISRCTN12345678" in doc.methods_text
        assert doc.methods_text.count("ISRCTN12345678") == 1
        assert "Participants were recruited" in doc.methods_text

    def test_no_match_yields_empty(self):
        doc = parse_document(jats("<sec><title>Results</title><p>r</p></sec>"))
        assert doc.methods_text == ""

    def test_methods_text_is_substring_union_of_sections(self, realistic_xml):
        doc = parse_document(realistic_xml)
        recomputed = extract_methods_text(doc)
        assert recomputed == doc.methods_text
        # every character of methods_text comes from matching sections
        matching = [s.text for s in doc.sections
                    if "method" in s.title.lower() or "procedure" in s.title.lower()]
        leftover = doc.methods_text
        for text in matching:
            leftover = leftover.replace(text, "", 1)
        assert leftover.strip() == ""


class TestSampling:
    def test_exhaustive_sample(self):
        assert set(sample_corpus(["a", "b", "c"], 3, seed=99)) == {"a", "b", "c"}

    def test_deterministic_across_runs(self):
        ids = [f"PMC008{i:05d}" for i in range(5000)]
        first = sample_corpus(ids, 1500, seed=42)
        second = sample_corpus(ids, 1500, seed=42)
        assert first == second
        assert len(set(first)) == 1500

    def test_size_error(self):
        with pytest.raises(SampleSizeError):
            sample_corpus(["a"], 2, seed=0)

    def test_uniform_frequency(self):
        counts = collections.Counter()
        for seed in range(40_000):
            counts[sample_corpus(["a", "b", "c", "d"], 1, seed)[0]] += 1
        for candidate in "abcd":
            assert abs(counts[candidate] / 40_000 - 0.25) < 0.01

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 30))
    def test_no_duplicates_property(self, seed, n):
        ids = [f"PMC{i:07d}" for i in range(30)]
        picked = sample_corpus(ids, n, seed)
        assert len(picked) == len(set(picked)) == n


class TestCorpusAssembly:
    def test_duplicate_pmcids_rejected(self):
        doc = Document(pmcid="PMC1", full_text="x", methods_text="", sections=[])
        other = Document(pmcid="PMC1", full_text="y", methods_text="", sections=[])
        with pytest.raises(DocumentError):
            Corpus(documents=[doc, other])

    def test_load_corpus_dir(self, corpus_dir):
        corpus = load_corpus_dir(corpus_dir, seed=7, selection_rule="fixture")
        ids = [d.pmcid for d in corpus.documents]
        assert ids == ["PMC8000010", "PMC8000011", "PMC8000012"]
        assert corpus.get("PMC8000010").pdf_path.endswith("PMC8000010.pdf")
        assert corpus.get("PMC8000011").pdf_path == ""

    def test_manifest_lines(self, corpus_dir, tmp_path):
        corpus = load_corpus_dir(corpus_dir)
        out = tmp_path / "out" / "corpus.ndjson"
        write_manifest(corpus, out)
        import json
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(lines) == 3
        assert lines[0] == {
            "pmcid": "PMC8000010",
            "source_path": str(corpus_dir / "PMC8000010.xml"),
            "has_methods": True,
            "n_sections": 1,
        }
        assert lines[2]["has_methods"] is False
