import json

import pytest

from deidkit.corpus import (
    SyntheticSpec,
    generate_synthetic,
    load_corpus,
    save_corpus,
)
from deidkit.errors import CorpusFormatError


def test_roundtrip_identity(tmp_path):
    corpus = generate_synthetic(SyntheticSpec(n_domains=2, notes_per_domain=8, seed=3))
    p = tmp_path / "p.jsonl"
    q = tmp_path / "q.jsonl"
    save_corpus(corpus, p)
    loaded = load_corpus(p)
    save_corpus(loaded, q)
    assert load_corpus(q).documents == loaded.documents == corpus.documents
    assert load_corpus(q).domains == corpus.domains


def test_missing_field_reports_line_number(tmp_path):
    p = tmp_path / "bad.jsonl"
    good = {"id": "a", "note_type": "n", "domain": "d", "text": "x", "annotations": []}
    bad = {"id": "b", "note_type": "n", "domain": "d", "annotations": []}
    p.write_text(json.dumps(good) + "\n" + json.dumps(bad) + "\n")
    with pytest.raises(CorpusFormatError, match="line 2.*'text'"):
        load_corpus(p)


def test_malformed_json_reports_line_number(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"id": "a"\n')
    with pytest.raises(CorpusFormatError, match="line 1"):
        load_corpus(p)


def test_overlapping_annotations_rejected_with_doc_id(tmp_path):
    p = tmp_path / "bad.jsonl"
    record = {
        "id": "doc-3",
        "note_type": "n",
        "domain": "d",
        "text": "Jane Doe here",
        "annotations": [
            {"start": 0, "end": 8, "type": "Patient"},
            {"start": 5, "end": 13, "type": "Doctor"},
        ],
    }
    p.write_text(json.dumps(record) + "\n")
    with pytest.raises(CorpusFormatError, match="doc-3"):
        load_corpus(p)


def test_duplicate_ids_rejected(tmp_path):
    p = tmp_path / "bad.jsonl"
    record = {"id": "a", "note_type": "n", "domain": "d", "text": "x", "annotations": []}
    p.write_text(json.dumps(record) + "\n" + json.dumps(record) + "\n")
    with pytest.raises(CorpusFormatError, match="duplicate"):
        load_corpus(p)


def test_unicode_offsets_count_scalar_values(tmp_path):
    text = "résumé for Renée"
    record = {
        "id": "u",
        "note_type": "n",
        "domain": "d",
        "text": text,
        "annotations": [{"start": 11, "end": 16, "type": "Patient"}],
    }
    p = tmp_path / "u.jsonl"
    p.write_text(json.dumps(record, ensure_ascii=False) + "\n", encoding="utf-8")
    corpus = load_corpus(p)
    assert corpus.documents[0].annotations[0].text == "Renée"


def test_thousand_record_corpus(tmp_path):
    corpus = generate_synthetic(SyntheticSpec(n_domains=2, notes_per_domain=500, seed=1))
    p = tmp_path / "big.jsonl"
    save_corpus(corpus, p)
    assert len(load_corpus(p).documents) == 1000
