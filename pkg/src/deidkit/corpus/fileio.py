"""Corpus, rules, and synthetic-spec file I/O.

Corpus files are UTF-8 JSON lines, one record per document:
{"id": ..., "note_type": ..., "domain": ..., "text": ...,
 "annotations": [{"start": int, "end": int, "type": str}, ...]}
Offsets count Unicode scalar values.
"""

from __future__ import annotations

import json
from pathlib import Path

from .harmonize import HarmonizationRules
from .model import Annotation, Corpus, Document
from .synthetic import SyntheticSpec
from ..errors import AnnotationError, ConfigError, CorpusFormatError

_REQUIRED_FIELDS = ("id", "note_type", "domain", "text", "annotations")


def _parse_record(record: dict, line_no: int) -> tuple[Document, str]:
    for name in _REQUIRED_FIELDS:
        if name not in record:
            raise CorpusFormatError(f"line {line_no}: missing field {name!r}")
    annotations = []
    for i, raw in enumerate(record["annotations"]):
        for name in ("start", "end", "type"):
            if name not in raw:
                raise CorpusFormatError(
                    f"line {line_no}: annotation {i} missing field {name!r}"
                )
        start, end = raw["start"], raw["end"]
        if not (isinstance(start, int) and isinstance(end, int)):
            raise CorpusFormatError(
                f"line {line_no}: annotation offsets must be integers"
            )
        text = record["text"][start:end]
        annotations.append(Annotation(start, end, raw["type"], text))
    annotations.sort(key=lambda a: (a.start, a.end))
    doc = Document(
        id=record["id"],
        note_type=record["note_type"],
        domain_id=-1,  # patched by the caller once the registry is known
        text=record["text"],
        annotations=annotations,
    )
    return doc, record["domain"]


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSONL corpus; domain ids follow first occurrence order."""
    documents: list[Document] = []
    domains: list[str] = []
    domain_ids: dict[str, int] = {}
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {line_no}: invalid record: {exc}") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"line {line_no}: record is not an object")
            doc, domain = _parse_record(record, line_no)
            if doc.id in seen_ids:
                raise CorpusFormatError(
                    f"line {line_no}: duplicate document id {doc.id!r}"
                )
            seen_ids.add(doc.id)
            if domain not in domain_ids:
                domain_ids[domain] = len(domains)
                domains.append(domain)
            doc.domain_id = domain_ids[domain]
            try:
                doc.validate()
            except AnnotationError as exc:
                raise CorpusFormatError(f"line {line_no}: {exc}") from exc
            documents.append(doc)
    return Corpus(documents, domains)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for doc in corpus.documents:
            record = {
                "id": doc.id,
                "note_type": doc.note_type,
                "domain": corpus.domains[doc.domain_id],
                "text": doc.text,
                "annotations": [
                    {"start": a.start, "end": a.end, "type": a.phi_type}
                    for a in sorted(doc.annotations, key=lambda a: (a.start, a.end))
                ],
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_rules(path: str | Path) -> HarmonizationRules:
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    kwargs = {}
    if "type_map" in raw:
        kwargs["type_map"] = dict(raw["type_map"])
    if "dropped_types" in raw:
        kwargs["dropped_types"] = frozenset(raw["dropped_types"])
    if "age_threshold" in raw:
        kwargs["age_threshold"] = int(raw["age_threshold"])
    if "year_pattern" in raw:
        kwargs["year_pattern"] = raw["year_pattern"]
    return HarmonizationRules(**kwargs)


def load_synthetic_spec(path: str | Path) -> SyntheticSpec:
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, dict):
        raise ConfigError("synthetic spec must be a JSON object")
    known = {
        "n_domains",
        "notes_per_domain",
        "phi_density",
        "vocab_skew",
        "template_inventory",
        "seed",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown synthetic spec keys: {sorted(unknown)}")
    return SyntheticSpec(**raw)
