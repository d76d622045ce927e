"""Text, token, and PHI annotation data model."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from ..errors import AnnotationError

# Adjusted label inventory after harmonization, in fixed order.
PHI_TYPES: tuple[str, ...] = (
    "Patient",
    "Doctor",
    "Hospital",
    "ID",
    "Date",
    "Location",
    "Phone",
    "Age",
)


@dataclass(frozen=True)
class Annotation:
    """One PHI span: [start, end) character offsets into the document text."""

    start: int
    end: int
    phi_type: str
    text: str

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise AnnotationError(
                f"invalid annotation span [{self.start}, {self.end})"
            )

    def validate_against(self, doc_text: str, doc_id: str) -> None:
        if self.end > len(doc_text):
            raise AnnotationError(
                f"document {doc_id!r}: annotation [{self.start}, {self.end}) "
                f"exceeds text length {len(doc_text)}"
            )
        covered = doc_text[self.start : self.end]
        if covered != self.text:
            raise AnnotationError(
                f"document {doc_id!r}: annotation text {self.text!r} does not "
                f"match covered substring {covered!r} at offset {self.start}"
            )


@dataclass(frozen=True)
class Token:
    start: int
    end: int
    surface: str


@dataclass(frozen=True)
class Sentence:
    """Ordered, non-overlapping tokens plus the source-domain index."""

    tokens: tuple[Token, ...]
    domain_id: int = 0

    def __post_init__(self) -> None:
        if not self.tokens:
            raise AnnotationError("sentence must contain at least one token")

    @property
    def start(self) -> int:
        return self.tokens[0].start

    @property
    def end(self) -> int:
        return self.tokens[-1].end


@dataclass
class Document:
    id: str
    note_type: str
    domain_id: int
    text: str
    annotations: list[Annotation] = field(default_factory=list)

    @cached_property
    def sentences(self) -> list[Sentence]:
        """Tokenized sentences with tokens split at annotation boundaries."""
        from .tokenize import document_sentences

        return document_sentences(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Document):
            return NotImplemented
        return (
            self.id == other.id
            and self.note_type == other.note_type
            and self.domain_id == other.domain_id
            and self.text == other.text
            and self.annotations == other.annotations
        )

    def validate(self) -> None:
        ordered = sorted(self.annotations, key=lambda a: (a.start, a.end))
        for ann in ordered:
            ann.validate_against(self.text, self.id)
        for prev, cur in zip(ordered, ordered[1:]):
            if cur.start < prev.end:
                raise AnnotationError(
                    f"document {self.id!r}: overlapping annotations "
                    f"[{prev.start},{prev.end}) and [{cur.start},{cur.end})"
                )


@dataclass
class Corpus:
    """Documents plus the ordered domain-name registry their ids index."""

    documents: list[Document]
    domains: list[str]

    def domain_name(self, domain_id: int) -> str:
        return self.domains[domain_id]

    def note_types(self) -> dict[str, str]:
        return {doc.id: doc.note_type for doc in self.documents}


@dataclass(frozen=True)
class LabelSet:
    """The harmonized PHI types and their BIO tag inventory (O first)."""

    phi_types: tuple[str, ...] = PHI_TYPES
    scheme: str = "BIO"

    @cached_property
    def tags(self) -> tuple[str, ...]:
        out = ["O"]
        for phi_type in self.phi_types:
            out.append(f"B-{phi_type}")
            out.append(f"I-{phi_type}")
        return tuple(out)

    @cached_property
    def tag_to_id(self) -> dict[str, int]:
        return {tag: i for i, tag in enumerate(self.tags)}

    @property
    def n_tags(self) -> int:
        return 2 * len(self.phi_types) + 1
