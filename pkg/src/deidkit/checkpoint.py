"""Versioned binary checkpoint container.

Layout: 8-byte magic, u32 version, u64 header length, UTF-8 JSON header,
then each parameter array's raw little-endian bytes in manifest order.
Loading rejects unknown versions and any name/shape/size mismatch.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .corpus.model import LabelSet
from .errors import NumericsError
from .heads import HeadConfig
from .network.tagger import Tagger
from .network.vocab import Vocabulary
from .numerics import TrainingConfig

MAGIC = b"DEIDCKP1"
VERSION = 1

_DTYPES = {"float64": "<f8", "float32": "<f4"}


def save_checkpoint(
    path: str | Path,
    tagger: Tagger,
    domains: list[str],
    meta: dict | None = None,
) -> None:
    wire_dtype = _DTYPES[tagger.config.precision]
    arrays = [
        {"name": a.name, "shape": list(a.values.shape), "dtype": wire_dtype}
        for a in tagger.store
    ]
    header = {
        "version": VERSION,
        "config": tagger.config.to_dict(),
        "head": tagger.head.to_dict(),
        "labels": list(tagger.labels.phi_types),
        "vocab": tagger.vocab.to_dict(),
        "domains": list(domains),
        "n_domains": tagger.n_domains,
        "meta": meta or {},
        "arrays": arrays,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    encoded = blob.encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<I", VERSION))
        handle.write(struct.pack("<Q", len(encoded)))
        handle.write(encoded)
        for array in tagger.store:
            handle.write(np.ascontiguousarray(array.values, dtype=wire_dtype).tobytes())


def load_checkpoint(path: str | Path) -> tuple[Tagger, dict]:
    with open(path, "rb") as handle:
        magic = handle.read(len(MAGIC))
        if magic != MAGIC:
            raise NumericsError(f"{path}: not a checkpoint file")
        (version,) = struct.unpack("<I", handle.read(4))
        if version != VERSION:
            raise NumericsError(
                f"{path}: unsupported checkpoint version {version} (expected {VERSION})"
            )
        (header_len,) = struct.unpack("<Q", handle.read(8))
        header = json.loads(handle.read(header_len).decode("utf-8"))
        config = TrainingConfig.from_dict(header["config"])
        head = HeadConfig.from_dict(header["head"])
        labels = LabelSet(phi_types=tuple(header["labels"]))
        vocab = Vocabulary.from_dict(header["vocab"])
        # word vectors were already baked into the embedding table at save time
        tagger = Tagger(
            labels,
            vocab,
            header["n_domains"],
            config.replace(word_vectors=None),
            head,
        )
        expected = set(tagger.store.names())
        manifest = {entry["name"] for entry in header["arrays"]}
        if manifest != expected:
            raise NumericsError(
                f"{path}: parameter names do not match this configuration: "
                f"missing {sorted(expected - manifest)}, "
                f"unexpected {sorted(manifest - expected)}"
            )
        for entry in header["arrays"]:
            array = tagger.store[entry["name"]]
            shape = tuple(entry["shape"])
            if shape != array.values.shape:
                raise NumericsError(
                    f"{path}: shape mismatch for {entry['name']}: "
                    f"{shape} vs expected {array.values.shape}"
                )
            dtype = np.dtype(entry["dtype"])
            raw = handle.read(int(np.prod(shape)) * dtype.itemsize)
            if len(raw) != int(np.prod(shape)) * dtype.itemsize:
                raise NumericsError(f"{path}: truncated array data for {entry['name']}")
            array.values[...] = np.frombuffer(raw, dtype=dtype).reshape(shape)
        trailing = handle.read(1)
        if trailing:
            raise NumericsError(f"{path}: trailing bytes after array data")
    return tagger, header["meta"] | {"domains": header["domains"]}
