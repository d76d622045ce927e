"""The sequence tagger: char biLSTM -> token biLSTM -> emissions -> CRF.

One class hosts all three output heads. Training mode computes the
head-specific loss and writes analytic gradients into the parameter store;
prediction always runs the shared path (common emission weights into Viterbi)
and consumes no domain input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crf import (
    crf_log_likelihood_with_grads,
    crf_viterbi,
    init_transitions,
)
from .lstm import BiLstm
from .vocab import PAD_ID, Vocabulary, load_word_vectors
from ..corpus.bio import decode_bio
from ..corpus.model import Annotation, Document, LabelSet, Sentence
from ..errors import ConfigError, NumericsError
from ..heads import (
    HeadConfig,
    combine_specific,
    csd_emissions,
    csd_loss,
    csd_orth_penalty_with_grads,
    jdl_combined_loss,
    jdl_domain_logits,
    orthogonalize_specific,
    softmax_cross_entropy,
)
from ..numerics import (
    ParameterStore,
    TrainingConfig,
    dropout_mask,
    glorot_uniform,
    seeded_rng,
)

_INIT_STREAM = 101


@dataclass
class SentenceFeatures:
    word_ids: np.ndarray  # (tokens,)
    char_matrix: np.ndarray  # (max_chars, tokens), padded with PAD_ID
    char_lengths: np.ndarray  # (tokens,)
    n_tokens: int


def encode_sentence(vocab: Vocabulary, sentence: Sentence) -> SentenceFeatures:
    surfaces = [t.surface for t in sentence.tokens]
    word_ids = np.array([vocab.word_id(s) for s in surfaces], dtype=np.int64)
    lengths = np.array([len(s) for s in surfaces], dtype=np.int64)
    chars = np.full((int(lengths.max()), len(surfaces)), PAD_ID, dtype=np.int64)
    for i, surface in enumerate(surfaces):
        chars[: lengths[i], i] = vocab.char_ids(surface)
    return SentenceFeatures(word_ids, chars, lengths, len(surfaces))


class Tagger:
    def __init__(
        self,
        labels: LabelSet,
        vocab: Vocabulary,
        n_domains: int,
        config: TrainingConfig,
        head: HeadConfig,
        init_seed: int | None = None,
    ):
        if n_domains < 1:
            raise ConfigError("at least one domain is required")
        if head.kind in ("csd", "jdl") and n_domains < 2:
            raise ConfigError(
                f"the {head.kind} head requires two or more domains, got {n_domains}"
            )
        self.labels = labels
        self.vocab = vocab
        self.n_domains = n_domains
        self.config = config
        self.head = head
        dtype = config.dtype
        seed = config.seed if init_seed is None else init_seed
        rng = seeded_rng(seed, _INIT_STREAM)
        store = ParameterStore(rng_seed=seed)

        char_table = glorot_uniform(rng, (vocab.n_chars, config.char_emb_dim), dtype)
        char_table[PAD_ID] = 0.0
        self.char_emb = store.add("char_emb", char_table)
        word_table = glorot_uniform(rng, (vocab.n_words, config.word_emb_dim), dtype)
        word_table[PAD_ID] = 0.0
        self.word_emb = store.add("word_emb", word_table)

        self.char_bilstm = BiLstm(
            store, "char_lstm", config.char_emb_dim, config.char_hidden, rng, dtype
        )
        token_input = config.word_emb_dim + 2 * config.char_hidden
        self.token_bilstm = BiLstm(
            store, "token_lstm", token_input, config.token_hidden, rng, dtype
        )

        hidden_dim = 2 * config.token_hidden
        self.emit_w = store.add("emit.W", glorot_uniform(rng, (hidden_dim, labels.n_tags), dtype))
        self.emit_b = store.add("emit.b", np.zeros(labels.n_tags, dtype=dtype))
        trans, trainable = init_transitions(rng, labels, dtype)
        self.trans = store.add("crf.trans", trans)
        self.trans_trainable = trainable

        if head.kind == "csd":
            spec = glorot_uniform(rng, (head.rank, hidden_dim, labels.n_tags), dtype)
            spec = orthogonalize_specific(self.emit_w.values, spec)
            self.csd_spec = store.add("csd.W_spec", spec)
            self.csd_gamma = store.add(
                "csd.gamma", glorot_uniform(rng, (n_domains, head.rank), dtype)
            )
        elif head.kind == "jdl":
            self.jdl_v = store.add("jdl.V", glorot_uniform(rng, (hidden_dim, n_domains), dtype))
            self.jdl_c = store.add("jdl.c", np.zeros(n_domains, dtype=dtype))
        self.store = store

        if config.word_vectors:
            self.apply_word_vectors(config.word_vectors)

    def apply_word_vectors(self, path: str) -> int:
        """Overwrite embedding rows for vocabulary words found in the file."""
        vectors = load_word_vectors(path, self.config.word_emb_dim)
        applied = 0
        for i, word in enumerate(self.vocab.words):
            if word in vectors:
                self.word_emb.values[i] = vectors[word]
                applied += 1
        return applied

    # -- forward / backward ------------------------------------------------

    def _forward(self, feats: SentenceFeatures, train: bool, rng: np.random.Generator | None):
        cfg = self.config
        n_tokens = feats.n_tokens
        hc = cfg.char_hidden

        x_char = self.char_emb.values[feats.char_matrix]
        char_out, char_cache = self.char_bilstm.forward(x_char, feats.char_lengths)
        fw_final = char_out[feats.char_lengths - 1, np.arange(n_tokens), :hc]
        bw_final = char_out[0, :, hc:]
        summary = np.concatenate([fw_final, bw_final], axis=1)

        words = self.word_emb.values[feats.word_ids]
        rep = np.concatenate([words, summary], axis=1)
        rep_mask = None
        if train and cfg.dropout > 0.0:
            rep_mask = dropout_mask(rep.size, cfg.dropout, rng).reshape(rep.shape)
            rep = rep * rep_mask

        tok_out, tok_cache = self.token_bilstm.forward(
            rep[:, None, :], np.array([n_tokens])
        )
        hidden = tok_out[:, 0, :]
        hidden_mask = None
        if train and cfg.dropout > 0.0:
            hidden_mask = dropout_mask(hidden.size, cfg.dropout, rng).reshape(hidden.shape)
            hidden = hidden * hidden_mask
        cache = (feats, char_cache, tok_cache, rep_mask, hidden_mask)
        return hidden, cache

    def _backward(self, cache, d_hidden: np.ndarray) -> None:
        feats, char_cache, tok_cache, rep_mask, hidden_mask = cache
        cfg = self.config
        if hidden_mask is not None:
            d_hidden = d_hidden * hidden_mask
        d_rep = self.token_bilstm.backward(tok_cache, d_hidden[:, None, :])[:, 0, :]
        if rep_mask is not None:
            d_rep = d_rep * rep_mask
        word_dim = cfg.word_emb_dim
        np.add.at(self.word_emb.grad, feats.word_ids, d_rep[:, :word_dim])
        d_summary = d_rep[:, word_dim:]
        hc = cfg.char_hidden
        steps = feats.char_matrix.shape[0]
        d_char_out = np.zeros((steps, feats.n_tokens, 2 * hc), dtype=d_rep.dtype)
        d_char_out[feats.char_lengths - 1, np.arange(feats.n_tokens), :hc] = d_summary[:, :hc]
        d_char_out[0, :, hc:] = d_summary[:, hc:]
        dx_char = self.char_bilstm.backward(char_cache, d_char_out)
        np.add.at(self.char_emb.grad, feats.char_matrix, dx_char)

    # -- losses --------------------------------------------------------------

    def loss_and_grads(
        self,
        feats: SentenceFeatures,
        tag_ids: np.ndarray,
        domain_id: int = 0,
        rng: np.random.Generator | None = None,
    ) -> float:
        """Training loss for one sentence; accumulates gradients in the store."""
        hidden, cache = self._forward(feats, train=True, rng=rng)
        head = self.head
        trans = self.trans.values
        if head.kind == "plain":
            emissions = hidden @ self.emit_w.values + self.emit_b.values
            loss, d_e, d_tr = crf_log_likelihood_with_grads(emissions, tag_ids, trans)
            self.emit_w.grad += hidden.T @ d_e
            self.emit_b.grad += d_e.sum(axis=0)
            self.trans.grad += np.where(self.trans_trainable, d_tr, 0.0)
            d_hidden = d_e @ self.emit_w.values.T
        elif head.kind == "csd":
            loss, d_hidden = self._csd_loss(hidden, tag_ids, domain_id)
        else:  # jdl
            loss, d_hidden = self._jdl_loss(hidden, tag_ids, domain_id)
        self._backward(cache, d_hidden)
        return loss

    def _csd_loss(self, hidden, tag_ids, domain_id):
        head, trans = self.head, self.trans.values
        w_common, bias = self.emit_w.values, self.emit_b.values
        w_spec, gamma = self.csd_spec.values, self.csd_gamma.values
        e_common, e_specific = csd_emissions(
            hidden, w_common, bias, w_spec, gamma, domain_id, training=True
        )
        loss_c, d_ec, d_tr_c = crf_log_likelihood_with_grads(e_common, tag_ids, trans)
        loss_s, d_es, d_tr_s = crf_log_likelihood_with_grads(e_specific, tag_ids, trans)
        penalty, d_p_common, d_p_spec = csd_orth_penalty_with_grads(w_common, w_spec)
        alpha, lam = head.alpha_spec, head.lambda_orth
        loss = csd_loss(loss_c, loss_s, penalty, alpha, lam)

        d_ec = d_ec * (1.0 - alpha)
        d_es = d_es * alpha
        w_domain = combine_specific(w_common, w_spec, gamma[domain_id])
        d_w_domain = hidden.T @ d_es
        self.emit_w.grad += hidden.T @ d_ec + d_w_domain + lam * d_p_common
        self.emit_b.grad += d_ec.sum(axis=0) + d_es.sum(axis=0)
        for r in range(head.rank):
            self.csd_spec.grad[r] += gamma[domain_id, r] * d_w_domain
            self.csd_gamma.grad[domain_id, r] += float(np.sum(d_w_domain * w_spec[r]))
        self.csd_spec.grad += lam * d_p_spec
        d_tr = (1.0 - alpha) * d_tr_c + alpha * d_tr_s
        self.trans.grad += np.where(self.trans_trainable, d_tr, 0.0)
        return loss, d_ec @ w_common.T + d_es @ w_domain.T

    def _jdl_loss(self, hidden, tag_ids, domain_id):
        head, trans = self.head, self.trans.values
        if not 0 <= domain_id < self.n_domains:
            raise NumericsError(
                f"invalid domain id {domain_id!r} for {self.n_domains} domains"
            )
        emissions = hidden @ self.emit_w.values + self.emit_b.values
        label_loss, d_e, d_tr = crf_log_likelihood_with_grads(emissions, tag_ids, trans)
        logits, pool = jdl_domain_logits(hidden, self.jdl_v.values, self.jdl_c.values)
        domain_loss, d_logits = softmax_cross_entropy(logits, domain_id)
        loss = jdl_combined_loss(label_loss, domain_loss, head.rho)

        d_e = d_e * head.rho
        self.emit_w.grad += hidden.T @ d_e
        self.emit_b.grad += d_e.sum(axis=0)
        self.trans.grad += np.where(self.trans_trainable, head.rho * d_tr, 0.0)
        d_logits = d_logits * (1.0 - head.rho)
        self.jdl_v.grad += np.outer(pool, d_logits)
        self.jdl_c.grad += d_logits
        d_pool = self.jdl_v.values @ d_logits
        d_hidden = d_e @ self.emit_w.values.T + d_pool[None, :] / hidden.shape[0]
        return loss, d_hidden

    # -- prediction ----------------------------------------------------------

    def predict_tags(self, feats: SentenceFeatures) -> list[int]:
        """Viterbi tags through the shared prediction path (all heads)."""
        hidden, _ = self._forward(feats, train=False, rng=None)
        emissions = csd_emissions(
            hidden, self.emit_w.values, self.emit_b.values, training=False
        )
        path, _ = crf_viterbi(emissions, self.trans.values)
        return path

    def predict_document(self, doc: Document) -> list[Annotation]:
        out: list[Annotation] = []
        for sentence in doc.sentences:
            feats = encode_sentence(self.vocab, sentence)
            tags = self.predict_tags(feats)
            out.extend(decode_bio(tags, sentence, self.labels, text=doc.text))
        return out
