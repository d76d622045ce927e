"""biLSTM-CRF network: embeddings, recurrent layers, CRF, and the tagger."""

from .crf import (
    BIG_NEG,
    crf_forward,
    crf_log_likelihood,
    crf_log_likelihood_with_grads,
    crf_path_score,
    crf_viterbi,
    forbidden_transitions,
    init_transitions,
)
from .lstm import BiLstm, LstmDirection
from .tagger import SentenceFeatures, Tagger, encode_sentence
from .vocab import OOV_ID, PAD_ID, Vocabulary, load_word_vectors

__all__ = [
    "BIG_NEG",
    "BiLstm",
    "LstmDirection",
    "OOV_ID",
    "PAD_ID",
    "SentenceFeatures",
    "Tagger",
    "Vocabulary",
    "crf_forward",
    "crf_log_likelihood",
    "crf_log_likelihood_with_grads",
    "crf_path_score",
    "crf_viterbi",
    "encode_sentence",
    "forbidden_transitions",
    "init_transitions",
    "load_word_vectors",
]
