"""BIO2 tag codec between token-aligned annotations and per-token tag ids."""

from __future__ import annotations

from .model import Annotation, LabelSet, Sentence

from ..errors import AnnotationError


def encode_bio(
    sentence: Sentence,
    annotations: list[Annotation],
    labels: LabelSet,
    doc_id: str = "?",
) -> list[int]:
    """Encode annotations over one sentence as BIO tag ids.

    Annotation boundaries must coincide with token boundaries; anything else
    is reported with the document id and offending offset.
    """
    start_index = {tok.start: i for i, tok in enumerate(sentence.tokens)}
    end_index = {tok.end: i for i, tok in enumerate(sentence.tokens)}
    tags = [0] * len(sentence.tokens)
    for ann in annotations:
        if ann.start not in start_index:
            raise AnnotationError(
                f"document {doc_id!r}: annotation start {ann.start} is not a "
                f"token boundary"
            )
        if ann.end not in end_index:
            raise AnnotationError(
                f"document {doc_id!r}: annotation end {ann.end} is not a "
                f"token boundary"
            )
        first, last = start_index[ann.start], end_index[ann.end]
        if ann.phi_type not in labels.phi_types:
            raise AnnotationError(
                f"document {doc_id!r}: phi type {ann.phi_type!r} is not in "
                f"the active label set"
            )
        if any(tags[i] != 0 for i in range(first, last + 1)):
            raise AnnotationError(
                f"document {doc_id!r}: overlapping annotations at offset "
                f"{ann.start}"
            )
        tags[first] = labels.tag_to_id[f"B-{ann.phi_type}"]
        for i in range(first + 1, last + 1):
            tags[i] = labels.tag_to_id[f"I-{ann.phi_type}"]
    return tags


def decode_bio(
    tags: list[int],
    sentence: Sentence,
    labels: LabelSet,
    text: str | None = None,
) -> list[Annotation]:
    """Decode tag ids back into annotations.

    An I- tag without a preceding same-type B-/I- opens a new entity
    (conservative repair). When the document text is not supplied, covered
    text is reconstructed from token surfaces and offsets, padding gaps with
    spaces.
    """
    if len(tags) != len(sentence.tokens):
        raise AnnotationError(
            f"tag count {len(tags)} does not match token count "
            f"{len(sentence.tokens)}"
        )
    spans: list[tuple[int, int, str]] = []  # (first_token, last_token, type)
    open_type: str | None = None
    for i, tag_id in enumerate(tags):
        tag = labels.tags[tag_id]
        if tag == "O":
            open_type = None
            continue
        prefix, phi_type = tag.split("-", 1)
        if prefix == "B" or open_type != phi_type:
            spans.append((i, i, phi_type))
            open_type = phi_type
        else:
            first, _, _ = spans[-1]
            spans[-1] = (first, i, phi_type)
    out = []
    for first, last, phi_type in spans:
        start = sentence.tokens[first].start
        end = sentence.tokens[last].end
        if text is not None:
            covered = text[start:end]
        else:
            buf = [" "] * (end - start)
            for tok in sentence.tokens[first : last + 1]:
                buf[tok.start - start : tok.end - start] = tok.surface
            covered = "".join(buf)
        out.append(Annotation(start, end, phi_type, covered))
    return out
