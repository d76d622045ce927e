"""Masked, batched LSTM directions and the biLSTM wrapper.

Arrays are time-major: inputs (steps, batch, dim). Variable lengths are
handled by carry masking, so the state at the final step equals the state at
each row's own length and padded steps contribute no gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import ParameterStore, glorot_uniform


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # past +-60 the sigmoid and its derivative are exactly 0/1 in float64
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


def length_mask(lengths: np.ndarray, steps: int, dtype=np.float64) -> np.ndarray:
    """(steps, batch) mask with 1.0 while t < length."""
    t = np.arange(steps)[:, None]
    return (t < lengths[None, :]).astype(dtype)


def _reverse_index(lengths: np.ndarray, steps: int) -> np.ndarray:
    t = np.arange(steps)[:, None]
    return np.where(t < lengths[None, :], lengths[None, :] - 1 - t, t)


def reverse_time(a: np.ndarray, lengths: np.ndarray, idx: np.ndarray | None = None) -> np.ndarray:
    """Reverse the first `length` steps of each row; padded steps stay put."""
    if idx is None:
        idx = _reverse_index(lengths, a.shape[0])
    return a[idx, np.arange(a.shape[1])[None, :]]


@dataclass
class _StepCache:
    x: np.ndarray
    mask: np.ndarray
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    tanh_c: np.ndarray
    c_prev: np.ndarray
    h_prev: np.ndarray


class LstmDirection:
    """One LSTM direction with gates ordered input/forget/output/candidate."""

    def __init__(
        self,
        store: ParameterStore,
        prefix: str,
        input_dim: int,
        hidden_dim: int,
        rng: np.random.Generator,
        dtype=np.float64,
    ):
        self.hidden_dim = hidden_dim
        h = hidden_dim
        self.W = store.add(f"{prefix}.W", glorot_uniform(rng, (4 * h, input_dim), dtype))
        self.U = store.add(f"{prefix}.U", glorot_uniform(rng, (4 * h, h), dtype))
        bias = np.zeros(4 * h, dtype=dtype)
        bias[h : 2 * h] = 1.0  # forget-gate bias starts open
        self.b = store.add(f"{prefix}.b", bias)

    def forward(self, x: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, list[_StepCache]]:
        steps, batch, _ = x.shape
        h_dim = self.hidden_dim
        w, u, b = self.W.values, self.U.values, self.b.values
        xw = x @ w.T + b
        h = np.zeros((batch, h_dim), dtype=x.dtype)
        c = np.zeros((batch, h_dim), dtype=x.dtype)
        hs = np.empty((steps, batch, h_dim), dtype=x.dtype)
        caches: list[_StepCache] = []
        for t in range(steps):
            pre = xw[t] + h @ u.T
            gates = _sigmoid(pre[:, : 3 * h_dim])
            i = gates[:, :h_dim]
            f = gates[:, h_dim : 2 * h_dim]
            o = gates[:, 2 * h_dim :]
            g = np.tanh(pre[:, 3 * h_dim :])
            c_new = f * c + i * g
            tanh_c = np.tanh(c_new)
            h_new = o * tanh_c
            m = mask[t][:, None]
            caches.append(_StepCache(x[t], m, i, f, o, g, tanh_c, c, h))
            c = m * c_new + (1.0 - m) * c
            h = m * h_new + (1.0 - m) * h
            hs[t] = h
        return hs, caches

    def backward(self, caches: list[_StepCache], d_hs: np.ndarray) -> np.ndarray:
        steps, batch, _ = d_hs.shape
        h_dim = self.hidden_dim
        w, u = self.W.values, self.U.values
        dh = np.zeros((batch, h_dim), dtype=d_hs.dtype)
        dc = np.zeros((batch, h_dim), dtype=d_hs.dtype)
        dx = np.empty((steps, batch, w.shape[1]), dtype=d_hs.dtype)
        for t in range(steps - 1, -1, -1):
            cache = caches[t]
            m = cache.mask
            dh_total = dh + d_hs[t]
            dh_new = m * dh_total
            dc_new = m * dc + dh_new * cache.o * (1.0 - cache.tanh_c**2)
            do = dh_new * cache.tanh_c
            di = dc_new * cache.g
            df = dc_new * cache.c_prev
            dg = dc_new * cache.i
            dpre = np.empty((batch, 4 * h_dim), dtype=d_hs.dtype)
            dpre[:, :h_dim] = di * cache.i * (1.0 - cache.i)
            dpre[:, h_dim : 2 * h_dim] = df * cache.f * (1.0 - cache.f)
            dpre[:, 2 * h_dim : 3 * h_dim] = do * cache.o * (1.0 - cache.o)
            dpre[:, 3 * h_dim :] = dg * (1.0 - cache.g**2)
            self.W.grad += dpre.T @ cache.x
            self.U.grad += dpre.T @ cache.h_prev
            self.b.grad += dpre.sum(axis=0)
            dx[t] = dpre @ w
            dh = (1.0 - m) * dh_total + dpre @ u
            dc = (1.0 - m) * dc + dc_new * cache.f
        return dx


class BiLstm:
    """Forward + backward directions; output is their per-step concatenation.

    out[t, b, :H] is the forward state after reading tokens 0..t, and
    out[t, b, H:] is the backward state after reading tokens end..t. Hence
    out[length-1, b, :H] / out[0, b, H:] are the two final summaries.
    """

    def __init__(
        self,
        store: ParameterStore,
        prefix: str,
        input_dim: int,
        hidden_dim: int,
        rng: np.random.Generator,
        dtype=np.float64,
    ):
        self.hidden_dim = hidden_dim
        self.fw = LstmDirection(store, f"{prefix}.fw", input_dim, hidden_dim, rng, dtype)
        self.bw = LstmDirection(store, f"{prefix}.bw", input_dim, hidden_dim, rng, dtype)

    def forward(self, x: np.ndarray, lengths: np.ndarray):
        steps = x.shape[0]
        mask = length_mask(lengths, steps, dtype=x.dtype)
        idx = _reverse_index(lengths, steps)
        hs_f, cache_f = self.fw.forward(x, mask)
        hs_b_rev, cache_b = self.bw.forward(reverse_time(x, lengths, idx), mask)
        hs_b = reverse_time(hs_b_rev, lengths, idx)
        out = np.concatenate([hs_f, hs_b], axis=2)
        return out, (cache_f, cache_b, lengths, idx)

    def backward(self, cache, d_out: np.ndarray) -> np.ndarray:
        cache_f, cache_b, lengths, idx = cache
        h = self.hidden_dim
        dx_f = self.fw.backward(cache_f, np.ascontiguousarray(d_out[:, :, :h]))
        d_b_rev = reverse_time(np.ascontiguousarray(d_out[:, :, h:]), lengths, idx)
        dx_b_rev = self.bw.backward(cache_b, d_b_rev)
        return dx_f + reverse_time(dx_b_rev, lengths, idx)
