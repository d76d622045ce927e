"""Trainable-parameter storage, SGD, dropout, and the gradient oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

import numpy as np

from .errors import ConfigError, NumericsError


@dataclass
class ParamArray:
    """One named trainable array plus its gradient buffer."""

    name: str
    values: np.ndarray
    grad: np.ndarray

    @classmethod
    def create(cls, name: str, values: np.ndarray) -> "ParamArray":
        values = np.asarray(values)
        return cls(name, values, np.zeros_like(values))


class ParameterStore:
    """Insertion-ordered mapping of unique ParamArrays."""

    def __init__(self, rng_seed: int = 0):
        self.rng_seed = rng_seed
        self._arrays: dict[str, ParamArray] = {}

    def add(self, name: str, values: np.ndarray) -> ParamArray:
        if name in self._arrays:
            raise NumericsError(f"duplicate parameter name {name!r}")
        array = ParamArray.create(name, values)
        self._arrays[name] = array
        return array

    def __getitem__(self, name: str) -> ParamArray:
        return self._arrays[name]

    def __contains__(self, name: str) -> bool:
        return name in self._arrays

    def __iter__(self) -> Iterator[ParamArray]:
        return iter(self._arrays.values())

    def __len__(self) -> int:
        return len(self._arrays)

    def names(self) -> list[str]:
        return list(self._arrays)

    def zero_grads(self) -> None:
        for array in self:
            array.grad[...] = 0.0

    def clone(self) -> "ParameterStore":
        out = ParameterStore(self.rng_seed)
        for array in self:
            out.add(array.name, array.values.copy())
            out[array.name].grad[...] = array.grad
        return out

    def copy_values_from(self, other: "ParameterStore") -> None:
        for array in self:
            array.values[...] = other[array.name].values

    def equal_values(self, other: "ParameterStore") -> bool:
        if self.names() != other.names():
            return False
        return all(
            np.array_equal(array.values, other[array.name].values) for array in self
        )


@dataclass(frozen=True)
class TrainingConfig:
    char_emb_dim: int = 25
    word_emb_dim: int = 100
    char_hidden: int = 25
    token_hidden: int = 100
    dropout: float = 0.5
    lr: float = 0.005
    max_epochs: int = 100
    patience: int = 10
    dev_fraction: float = 0.1
    clip_norm: float = 5.0
    precision: str = "float64"
    word_vectors: str | None = None
    seed: int = 42

    def __post_init__(self) -> None:
        dims = (self.char_emb_dim, self.word_emb_dim, self.char_hidden, self.token_hidden)
        if any(d <= 0 for d in dims):
            raise ConfigError("all dimensions must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must satisfy 0 <= rate < 1")
        if self.lr <= 0:
            raise ConfigError("learning rate must be positive")
        if self.max_epochs < 1 or self.patience < 0:
            raise ConfigError("invalid epoch budget")
        if not 0.0 <= self.dev_fraction <= 1.0:
            raise ConfigError("dev_fraction must be in [0, 1]")
        if self.precision not in ("float64", "float32"):
            raise ConfigError("precision must be float64 or float32")

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(self.precision)

    def replace(self, **kwargs) -> "TrainingConfig":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return {
            "char_emb_dim": self.char_emb_dim,
            "word_emb_dim": self.word_emb_dim,
            "char_hidden": self.char_hidden,
            "token_hidden": self.token_hidden,
            "dropout": self.dropout,
            "lr": self.lr,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "dev_fraction": self.dev_fraction,
            "clip_norm": self.clip_norm,
            "precision": self.precision,
            "word_vectors": self.word_vectors,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TrainingConfig":
        known = set(cls().to_dict())
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown training config keys: {sorted(unknown)}")
        return cls(**raw)


def seeded_rng(*keys: int) -> np.random.Generator:
    """Deterministic generator derived from a tuple of integer keys."""
    return np.random.default_rng(np.random.SeedSequence(list(keys)))


def glorot_uniform(rng: np.random.Generator, shape: tuple[int, ...], dtype=np.float64) -> np.ndarray:
    """Uniform in +-sqrt(6/(fan_in+fan_out)) over the trailing two dims."""
    fan_in, fan_out = (shape[-2], shape[-1]) if len(shape) >= 2 else (shape[0], shape[0])
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def sgd_step(store: ParameterStore, lr: float) -> None:
    """v <- v - lr * g for every parameter; grads are zeroed afterward."""
    for array in store:
        if not np.all(np.isfinite(array.grad)):
            raise NumericsError(f"non-finite gradient in {array.name}")
        array.values -= lr * array.grad
    store.zero_grads()


def clip_gradients(store: ParameterStore, max_norm: float) -> float:
    """Scale all gradients so their global norm is at most max_norm."""
    total = 0.0
    for array in store:
        total += float(np.sum(array.grad * array.grad))
    norm = math.sqrt(total)
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for array in store:
            array.grad *= scale
    return norm


def dropout_mask(n: int, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: 0 with probability rate, else 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError("dropout rate must satisfy 0 <= rate < 1")
    if rate == 0.0:
        return np.ones(n)
    return (rng.random(n) >= rate) / (1.0 - rate)


def finite_diff_check(
    loss_fn: Callable[[ParameterStore], float],
    store: ParameterStore,
    eps: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    loss_fn(store) must return the scalar loss and leave dL/dtheta in each
    array's grad buffer; it must be a pure function of the parameter values.
    Relative error is |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
    """
    store.zero_grads()
    loss_fn(store)
    analytic = {array.name: array.grad.copy() for array in store}
    worst = 0.0
    for array in store:
        flat = array.values.reshape(-1)
        grads = analytic[array.name].reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            plus = loss_fn(store)
            flat[i] = original - eps
            minus = loss_fn(store)
            flat[i] = original
            numeric = (plus - minus) / (2.0 * eps)
            denom = max(1e-8, abs(grads[i]) + abs(numeric))
            worst = max(worst, abs(grads[i] - numeric) / denom)
    for array in store:  # leave the analytic gradients in place
        array.grad[...] = analytic[array.name]
    return worst
