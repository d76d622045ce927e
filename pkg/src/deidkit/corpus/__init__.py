"""Corpus data model, tokenization, BIO codec, harmonization, I/O, synthesis."""

from .bio import decode_bio, encode_bio
from .fileio import load_corpus, load_rules, load_synthetic_spec, save_corpus
from .harmonize import (
    HarmonizationChange,
    HarmonizationRules,
    default_rules,
    harmonize,
    harmonize_corpus,
    harmonize_with_report,
)
from .model import (
    Annotation,
    Corpus,
    Document,
    LabelSet,
    PHI_TYPES,
    Sentence,
    Token,
)
from .synthetic import SyntheticSpec, generate_synthetic, split_by_domain
from .tokenize import tokenize

__all__ = [
    "Annotation",
    "Corpus",
    "Document",
    "HarmonizationChange",
    "HarmonizationRules",
    "LabelSet",
    "PHI_TYPES",
    "Sentence",
    "SyntheticSpec",
    "Token",
    "decode_bio",
    "default_rules",
    "encode_bio",
    "generate_synthetic",
    "harmonize",
    "harmonize_corpus",
    "harmonize_with_report",
    "load_corpus",
    "load_rules",
    "load_synthetic_spec",
    "save_corpus",
    "split_by_domain",
    "tokenize",
]
