"""Linear-chain CRF: log-space forward algorithm, gradients, Viterbi.

The transition matrix has two virtual states appended after the real tags:
start at index n_tags, end at n_tags + 1. Structurally impossible BIO moves
are pinned to a large negative constant instead of -inf to keep all
arithmetic finite.
"""

from __future__ import annotations

import numpy as np

from ..corpus.model import LabelSet
from ..errors import NumericsError
from ..numerics import glorot_uniform

BIG_NEG = -1.0e4


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    peak = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(a - peak), axis=axis)) + np.squeeze(peak, axis=axis)
    return out


def forbidden_transitions(labels: LabelSet) -> np.ndarray:
    """Boolean (n_tags+2)^2 matrix, True where a transition is impossible."""
    n = labels.n_tags
    start, end = n, n + 1
    forbidden = np.zeros((n + 2, n + 2), dtype=bool)
    forbidden[:, start] = True  # nothing enters the start state
    forbidden[end, :] = True  # nothing leaves the end state
    forbidden[start, end] = True  # sentences are non-empty
    def entity_of(tag: str) -> str | None:
        return tag.split("-", 1)[1] if "-" in tag else None

    for j, to_tag in enumerate(labels.tags):
        if not to_tag.startswith("I-"):
            continue
        to_entity = entity_of(to_tag)
        forbidden[start, j] = True
        for i, from_tag in enumerate(labels.tags):
            if from_tag == "O" or entity_of(from_tag) != to_entity:
                forbidden[i, j] = True
    return forbidden


def init_transitions(
    rng: np.random.Generator, labels: LabelSet, dtype=np.float64
) -> tuple[np.ndarray, np.ndarray]:
    """Random finite transitions with impossible moves pinned to BIG_NEG.

    Returns (values, trainable_mask); pinned entries must keep zero grads.
    """
    forbidden = forbidden_transitions(labels)
    values = glorot_uniform(rng, forbidden.shape, dtype)
    values[forbidden] = BIG_NEG
    return values, ~forbidden


def crf_path_score(emissions: np.ndarray, tags: np.ndarray, trans: np.ndarray) -> float:
    n = emissions.shape[1]
    start, end = n, n + 1
    score = trans[start, tags[0]] + emissions[0, tags[0]]
    for t in range(1, len(tags)):
        score += trans[tags[t - 1], tags[t]] + emissions[t, tags[t]]
    return float(score + trans[tags[-1], end])


def crf_forward(emissions: np.ndarray, trans: np.ndarray) -> tuple[float, np.ndarray]:
    """Log partition function and the per-step forward log potentials."""
    steps, n = emissions.shape
    start, end = n, n + 1
    inner = trans[:n, :n]
    alphas = np.empty((steps, n), dtype=emissions.dtype)
    alphas[0] = trans[start, :n] + emissions[0]
    for t in range(1, steps):
        alphas[t] = _logsumexp(alphas[t - 1][:, None] + inner, axis=0) + emissions[t]
    log_z = float(_logsumexp(alphas[-1] + trans[:n, end], axis=0))
    return log_z, alphas


def _crf_backward(emissions: np.ndarray, trans: np.ndarray) -> np.ndarray:
    steps, n = emissions.shape
    end = n + 1
    inner = trans[:n, :n]
    betas = np.empty((steps, n), dtype=emissions.dtype)
    betas[-1] = trans[:n, end]
    for t in range(steps - 2, -1, -1):
        betas[t] = _logsumexp(inner + (emissions[t + 1] + betas[t + 1])[None, :], axis=1)
    return betas


def crf_log_likelihood(emissions: np.ndarray, tags, trans: np.ndarray) -> float:
    """Negative log likelihood of the tag sequence: logZ - path score (>= 0)."""
    tags = np.asarray(tags)
    if emissions.shape[0] != len(tags):
        raise NumericsError(
            f"emission count {emissions.shape[0]} does not match tag count {len(tags)}"
        )
    if emissions.shape[0] < 1:
        raise NumericsError("CRF needs at least one step")
    log_z, _ = crf_forward(emissions, trans)
    return log_z - crf_path_score(emissions, tags, trans)


def crf_log_likelihood_with_grads(
    emissions: np.ndarray, tags, trans: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """NLL plus gradients w.r.t. emissions and the full transition matrix."""
    tags = np.asarray(tags)
    steps, n = emissions.shape
    if steps != len(tags):
        raise NumericsError(
            f"emission count {steps} does not match tag count {len(tags)}"
        )
    start, end = n, n + 1
    log_z, alphas = crf_forward(emissions, trans)
    betas = _crf_backward(emissions, trans)
    node = np.exp(alphas + betas - log_z)  # (steps, n): P(y_t = j)

    d_emissions = node.copy()
    d_emissions[np.arange(steps), tags] -= 1.0

    d_trans = np.zeros_like(trans)
    d_trans[start, :n] += node[0]
    d_trans[start, tags[0]] -= 1.0
    d_trans[:n, end] += node[-1]
    d_trans[tags[-1], end] -= 1.0
    inner = trans[:n, :n]
    for t in range(steps - 1):
        pair = np.exp(
            alphas[t][:, None] + inner + (emissions[t + 1] + betas[t + 1])[None, :] - log_z
        )
        d_trans[:n, :n] += pair
        d_trans[tags[t], tags[t + 1]] -= 1.0

    loss = log_z - crf_path_score(emissions, tags, trans)
    return loss, d_emissions, d_trans


def crf_viterbi(emissions: np.ndarray, trans: np.ndarray) -> tuple[list[int], float]:
    """Highest-scoring tag sequence; ties resolve to the lowest tag index."""
    steps, n = emissions.shape
    start, end = n, n + 1
    inner = trans[:n, :n]
    delta = trans[start, :n] + emissions[0]
    backpointers = np.empty((steps - 1, n), dtype=np.int64) if steps > 1 else None
    for t in range(1, steps):
        scores = delta[:, None] + inner
        best_from = np.argmax(scores, axis=0)  # first max = lowest index
        backpointers[t - 1] = best_from
        delta = scores[best_from, np.arange(n)] + emissions[t]
    final = delta + trans[:n, end]
    last = int(np.argmax(final))
    best_score = float(final[last])
    path = [last]
    for t in range(steps - 2, -1, -1):
        path.append(int(backpointers[t][path[-1]]))
    path.reverse()
    return path, best_score
