"""Offset-preserving tokenizer and sentence splitter.

Words are maximal alphanumeric runs, every other non-space character is its
own token, and a small abbreviation list keeps forms like "Dr." as single
tokens so they never trigger a sentence break. Sentences break at newlines
and after . ! ? followed by whitespace and an uppercase letter.
"""

from __future__ import annotations

import re

from .model import Document, Sentence, Token

ABBREVIATIONS: tuple[str, ...] = (
    "M.D.",
    "Mrs.",
    "Dr.",
    "Mr.",
    "Ms.",
    "e.g.",
    "i.e.",
    "vs.",
)

_TOKEN_RE = re.compile(
    "|".join([re.escape(a) for a in ABBREVIATIONS] + [r"[^\W_]+", r"\S"])
)

_SENTENCE_END = frozenset({".", "!", "?"})


def tokenize(text: str, domain_id: int = 0) -> list[Sentence]:
    """Split text into sentences of offset-exact tokens.

    Whitespace-only text yields zero sentences. Token surfaces always equal
    text[start:end], so the original text is reconstructible from offsets.
    """
    tokens = [Token(m.start(), m.end(), m.group()) for m in _TOKEN_RE.finditer(text)]
    sentences: list[Sentence] = []
    current: list[Token] = []
    for i, token in enumerate(tokens):
        current.append(token)
        if i + 1 >= len(tokens):
            break
        gap = text[token.end : tokens[i + 1].start]
        breaks = "\n" in gap or (
            token.surface in _SENTENCE_END
            and gap != ""
            and tokens[i + 1].surface[0].isupper()
        )
        if breaks:
            sentences.append(Sentence(tuple(current), domain_id))
            current = []
    if current:
        sentences.append(Sentence(tuple(current), domain_id))
    return sentences


def _split_at_boundaries(sentence: Sentence, boundaries: set[int]) -> Sentence:
    """Split any token that an annotation boundary falls strictly inside."""
    out: list[Token] = []
    for token in sentence.tokens:
        cuts = sorted(b for b in boundaries if token.start < b < token.end)
        if not cuts:
            out.append(token)
            continue
        edges = [token.start] + cuts + [token.end]
        for lo, hi in zip(edges, edges[1:]):
            out.append(Token(lo, hi, token.surface[lo - token.start : hi - token.start]))
    return Sentence(tuple(out), sentence.domain_id)


def document_sentences(doc: Document) -> list[Sentence]:
    """Tokenize a document, aligning token boundaries to its annotations."""
    sentences = tokenize(doc.text, doc.domain_id)
    boundaries = {a.start for a in doc.annotations} | {a.end for a in doc.annotations}
    if not boundaries:
        return sentences
    return [_split_at_boundaries(s, boundaries) for s in sentences]
