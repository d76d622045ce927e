"""Label harmonization: many-to-one type mapping, age filtering, year excision.

Aligns heterogeneous source label inventories onto the eight adjusted PHI
types. Date spans lose their year components (four-digit years anywhere, or a
trailing two-digit year after a second date separator); ages under the
threshold are dropped entirely.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import Annotation, Corpus, Document, PHI_TYPES
from ..errors import HarmonizationError

DEFAULT_TYPE_MAP: dict[str, str] = {
    "Patient": "Patient",
    "Doctor": "Doctor",
    "Hospital": "Hospital",
    "ID": "ID",
    "MedicalRecord": "ID",
    "Device": "ID",
    "HealthPlan": "ID",
    "License": "ID",
    "BioID": "ID",
    "IDNUM": "ID",
    "Username": "ID",
    "Date": "Date",
    "Location": "Location",
    "Street": "Location",
    "City": "Location",
    "State": "Location",
    "Zip": "Location",
    "Country": "Location",
    "Location-Other": "Location",
    "Phone": "Phone",
    "Fax": "Phone",
    "Age": "Age",
}

DEFAULT_DROPPED_TYPES: frozenset[str] = frozenset(
    {"Email", "URL", "Organization", "Profession"}
)

# Four-digit years anywhere, or the trailing two-digit year of d/m/yy-style
# dates (second separator required so "01/02" is never touched).
DEFAULT_YEAR_PATTERN = (
    r"(?P<y4>\b(?:1[89]\d\d|20\d\d)\b)"
    r"|\b\d{1,2}[/.-]\d{1,2}[/.-](?P<y2>\d\d)(?!\d)"
)

_SEPARATOR_CHARS = " \t,/.-"


@dataclass(frozen=True)
class HarmonizationRules:
    type_map: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_TYPE_MAP))
    dropped_types: frozenset[str] = DEFAULT_DROPPED_TYPES
    age_threshold: int = 90
    year_pattern: str = DEFAULT_YEAR_PATTERN

    def __post_init__(self) -> None:
        twice = set(self.type_map) & self.dropped_types
        if twice:
            raise HarmonizationError(
                f"labels mapped and dropped at the same time: {sorted(twice)}"
            )
        bad_targets = set(self.type_map.values()) - set(PHI_TYPES)
        if bad_targets:
            raise HarmonizationError(
                f"type map targets outside the adjusted label set: "
                f"{sorted(bad_targets)}"
            )


@dataclass(frozen=True)
class HarmonizationChange:
    """One dropped or modified annotation, for the validation report."""

    doc_id: str
    action: str  # relabel | drop_type | drop_age | strip_year | drop_date
    start: int
    end: int
    phi_type: str
    detail: str


def default_rules() -> HarmonizationRules:
    return HarmonizationRules()


def _year_regions(text: str, year_re: re.Pattern[str]) -> list[tuple[int, int]]:
    """Character regions to excise: year digits plus one adjacent separator run."""
    regions = []
    for m in year_re.finditer(text):
        group = "y4" if m.group("y4") is not None else "y2"
        lo, hi = m.span(group)
        ext = lo
        while ext > 0 and text[ext - 1] in _SEPARATOR_CHARS:
            ext -= 1
        if ext < lo:
            lo = ext
        else:  # year leads the span: absorb the separators after it instead
            while hi < len(text) and text[hi] in _SEPARATOR_CHARS:
                hi += 1
        regions.append((lo, hi))
    merged: list[tuple[int, int]] = []
    for lo, hi in sorted(regions):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return merged


def strip_year(ann: Annotation, doc_text: str, year_re: re.Pattern[str]) -> list[Annotation]:
    """Shrink or split a Date annotation so no remaining span covers year digits."""
    regions = _year_regions(ann.text, year_re)
    if not regions:
        return [ann]
    segments: list[tuple[int, int]] = []
    cursor = 0
    for lo, hi in regions:
        if lo > cursor:
            segments.append((cursor, lo))
        cursor = hi
    if cursor < len(ann.text):
        segments.append((cursor, len(ann.text)))
    out = []
    for lo, hi in segments:
        while lo < hi and ann.text[lo].isspace():
            lo += 1
        while hi > lo and ann.text[hi - 1].isspace():
            hi -= 1
        if lo < hi:
            start, end = ann.start + lo, ann.start + hi
            out.append(Annotation(start, end, ann.phi_type, doc_text[start:end]))
    return out


def harmonize_with_report(
    doc: Document, rules: HarmonizationRules
) -> tuple[Document, list[HarmonizationChange]]:
    """Apply the rules to one document, reporting every change made."""
    year_re = re.compile(rules.year_pattern)
    changes: list[HarmonizationChange] = []
    kept: list[Annotation] = []
    for ann in sorted(doc.annotations, key=lambda a: (a.start, a.end)):
        if ann.phi_type in rules.dropped_types:
            changes.append(
                HarmonizationChange(
                    doc.id, "drop_type", ann.start, ann.end, ann.phi_type,
                    "label not used after adjustment",
                )
            )
            continue
        if ann.phi_type not in rules.type_map:
            raise HarmonizationError(
                f"document {doc.id!r}: unknown source label {ann.phi_type!r}"
            )
        mapped = rules.type_map[ann.phi_type]
        if mapped != ann.phi_type:
            changes.append(
                HarmonizationChange(
                    doc.id, "relabel", ann.start, ann.end, ann.phi_type,
                    f"mapped to {mapped}",
                )
            )
        ann = Annotation(ann.start, ann.end, mapped, ann.text)
        if mapped == "Age":
            digits = re.search(r"\d+", ann.text)
            if digits is not None and int(digits.group()) < rules.age_threshold:
                changes.append(
                    HarmonizationChange(
                        doc.id, "drop_age", ann.start, ann.end, "Age",
                        f"age {digits.group()} under {rules.age_threshold}",
                    )
                )
                continue
        if mapped == "Date":
            pieces = strip_year(ann, doc.text, year_re)
            if pieces != [ann]:
                action = "drop_date" if not pieces else "strip_year"
                spans = ", ".join(f"[{p.start},{p.end})" for p in pieces) or "none"
                changes.append(
                    HarmonizationChange(
                        doc.id, action, ann.start, ann.end, "Date",
                        f"year removed; remaining spans: {spans}",
                    )
                )
            kept.extend(pieces)
            continue
        kept.append(ann)
    out = Document(doc.id, doc.note_type, doc.domain_id, doc.text, kept)
    out.validate()
    return out, changes


def harmonize(doc: Document, rules: HarmonizationRules) -> Document:
    return harmonize_with_report(doc, rules)[0]


def harmonize_corpus(
    corpus: Corpus, rules: HarmonizationRules
) -> tuple[Corpus, list[HarmonizationChange]]:
    docs = []
    changes: list[HarmonizationChange] = []
    for doc in corpus.documents:
        new_doc, doc_changes = harmonize_with_report(doc, rules)
        docs.append(new_doc)
        changes.extend(doc_changes)
    return Corpus(docs, list(corpus.domains)), changes
