"""Word/character vocabularies with reserved padding and OOV rows.

Word lookup is case-lowered; the character stream preserves case so the
char-level network can exploit capitalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ..corpus.model import Corpus
from ..errors import NumericsError

PAD_TOKEN = "<pad>"
OOV_TOKEN = "<unk>"
PAD_ID = 0
OOV_ID = 1


@dataclass
class Vocabulary:
    words: list[str]
    chars: list[str]
    _word_index: dict[str, int] = field(init=False, repr=False)
    _char_index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._word_index = {w: i for i, w in enumerate(self.words)}
        self._char_index = {c: i for i, c in enumerate(self.chars)}

    @classmethod
    def build(cls, corpora: Iterable[Corpus]) -> "Vocabulary":
        """Union vocabulary in deterministic first-occurrence order."""
        words = [PAD_TOKEN, OOV_TOKEN]
        chars = [PAD_TOKEN, OOV_TOKEN]
        seen_words = set(words)
        seen_chars = set(chars)
        empty = True
        for corpus in corpora:
            for doc in corpus.documents:
                for sentence in doc.sentences:
                    empty = False
                    for token in sentence.tokens:
                        word = token.surface.lower()
                        if word not in seen_words:
                            seen_words.add(word)
                            words.append(word)
                        for ch in token.surface:
                            if ch not in seen_chars:
                                seen_chars.add(ch)
                                chars.append(ch)
        if empty:
            raise NumericsError("cannot build a vocabulary from an empty corpus")
        return cls(words, chars)

    def word_id(self, surface: str) -> int:
        return self._word_index.get(surface.lower(), OOV_ID)

    def char_ids(self, surface: str) -> list[int]:
        return [self._char_index.get(ch, OOV_ID) for ch in surface]

    @property
    def n_words(self) -> int:
        return len(self.words)

    @property
    def n_chars(self) -> int:
        return len(self.chars)

    def to_dict(self) -> dict:
        return {"words": self.words, "chars": self.chars}

    @classmethod
    def from_dict(cls, raw: dict) -> "Vocabulary":
        return cls(list(raw["words"]), list(raw["chars"]))


def load_word_vectors(path: str, dim: int) -> dict[str, np.ndarray]:
    """Read `token v1 ... v_dim` lines; any other width is an error."""
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise NumericsError(
                    f"{path}:{line_no}: expected {dim} vector components, "
                    f"found {len(parts) - 1}"
                )
            try:
                values = np.array([float(v) for v in parts[1:]])
            except ValueError as exc:
                raise NumericsError(f"{path}:{line_no}: {exc}") from exc
            vectors[parts[0].lower()] = values
    return vectors
