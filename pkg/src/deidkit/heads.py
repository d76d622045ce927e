"""Output-head math: plain emissions, common-specific decomposition of the
emission layer, and the auxiliary sentence-domain classifier.

All functions operate on plain arrays; the tagger wires them to its
parameter store. The prediction path is identical for every head: shared
emission weights into the CRF, no domain input consumed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NumericsError

HEAD_KINDS = ("plain", "csd", "jdl")


@dataclass(frozen=True)
class HeadConfig:
    kind: str = "plain"
    rank: int = 1  # number of specific components in the decomposition
    alpha_spec: float = 0.5  # weight of the specific-path tagging loss
    lambda_orth: float = 0.25  # weight of the orthogonality penalty
    rho: float = 0.85  # share of the loss taken by label prediction

    def __post_init__(self) -> None:
        if self.kind not in HEAD_KINDS:
            raise ConfigError(f"unknown head kind {self.kind!r}")
        if self.rank < 1:
            raise ConfigError("decomposition rank must be >= 1")
        if not 0.0 <= self.alpha_spec <= 1.0:
            raise ConfigError("alpha_spec must be in [0, 1]")
        if self.lambda_orth < 0:
            raise ConfigError("lambda_orth must be non-negative")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError("rho must be in (0, 1)")

    def replace(self, **kwargs) -> "HeadConfig":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rank": self.rank,
            "alpha_spec": self.alpha_spec,
            "lambda_orth": self.lambda_orth,
            "rho": self.rho,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "HeadConfig":
        known = set(cls().to_dict())
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown head config keys: {sorted(unknown)}")
        return cls(**raw)


def combine_specific(w_common: np.ndarray, w_spec: np.ndarray, gamma_row: np.ndarray) -> np.ndarray:
    """Domain emission weights: W_common + sum_r gamma[r] * W_spec[r]."""
    return w_common + np.tensordot(gamma_row, w_spec, axes=(0, 0))


def csd_emissions(
    hidden: np.ndarray,
    w_common: np.ndarray,
    bias: np.ndarray,
    w_spec: np.ndarray | None = None,
    gamma: np.ndarray | None = None,
    domain_id: int | None = None,
    training: bool = False,
):
    """Common emissions, plus domain-specific emissions while training.

    At prediction time the specific parameters are dropped entirely and
    domain_id is ignored; training additionally scores the sentence under the
    reconstructed per-domain weights.
    """
    common = hidden @ w_common + bias
    if not training:
        return common
    if w_spec is None or gamma is None:
        raise NumericsError("training-mode emissions need the specific parameters")
    if domain_id is None or not 0 <= domain_id < gamma.shape[0]:
        raise NumericsError(f"invalid domain id {domain_id!r} for {gamma.shape[0]} domains")
    w_domain = combine_specific(w_common, w_spec, gamma[domain_id])
    return common, hidden @ w_domain + bias


def csd_orth_penalty(w_common: np.ndarray, w_spec: np.ndarray) -> float:
    """||K^T K - I||_F^2 over unit-normalized flattened components."""
    penalty, _, _ = csd_orth_penalty_with_grads(w_common, w_spec)
    return penalty


def csd_orth_penalty_with_grads(
    w_common: np.ndarray, w_spec: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    columns = [w_common.reshape(-1)] + [w_spec[r].reshape(-1) for r in range(w_spec.shape[0])]
    norms = [float(np.linalg.norm(c)) for c in columns]
    for i, n in enumerate(norms):
        if n == 0.0:
            which = "common" if i == 0 else f"specific[{i - 1}]"
            raise NumericsError(f"zero-norm {which} component in orthogonality penalty")
    k = np.stack([c / n for c, n in zip(columns, norms)], axis=1)  # (m, rank+1)
    gram = k.T @ k - np.eye(k.shape[1])
    penalty = float(np.sum(gram * gram))
    dk = 4.0 * (k @ gram)  # gram is symmetric
    d_columns = []
    for i, (c, n) in enumerate(zip(columns, norms)):
        u = c / n
        du = dk[:, i]
        d_columns.append((du - u * float(u @ du)) / n)
    d_common = d_columns[0].reshape(w_common.shape)
    d_spec = np.stack([d.reshape(w_common.shape) for d in d_columns[1:]], axis=0)
    return penalty, d_common, d_spec


def csd_loss(
    common_nll: float,
    specific_nll: float,
    penalty: float,
    alpha_spec: float,
    lambda_orth: float,
) -> float:
    return (1.0 - alpha_spec) * common_nll + alpha_spec * specific_nll + lambda_orth * penalty


def jdl_domain_logits(
    hidden: np.ndarray, v: np.ndarray, c: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Mean-pool token states, then an affine map to per-domain logits."""
    pool = hidden.mean(axis=0)
    return pool @ v + c, pool


def softmax_cross_entropy(logits: np.ndarray, target: int) -> tuple[float, np.ndarray]:
    shifted = logits - np.max(logits)
    exp = np.exp(shifted)
    probs = exp / exp.sum()
    loss = -float(np.log(probs[target]))
    d_logits = probs.copy()
    d_logits[target] -= 1.0
    return loss, d_logits


def jdl_combined_loss(label_loss: float, domain_loss: float, rho: float = 0.85) -> float:
    return rho * label_loss + (1.0 - rho) * domain_loss


def orthogonalize_specific(
    w_common: np.ndarray, w_spec: np.ndarray
) -> np.ndarray:
    """Gram-Schmidt each specific component against the common weights and
    against earlier components, so the penalty starts at ~0."""
    base = w_common.reshape(-1)
    basis = [base / np.linalg.norm(base)]
    out = np.empty_like(w_spec)
    for r in range(w_spec.shape[0]):
        vec = w_spec[r].reshape(-1).copy()
        for b in basis:
            vec -= b * float(b @ vec)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise NumericsError("specific component vanished during orthogonalization")
        basis.append(vec / norm)
        out[r] = vec.reshape(w_spec[r].shape)
    return out
