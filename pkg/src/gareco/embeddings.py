"""Fixed-dimension embedding store with a compact binary file format.

Vectors are stored as 32-bit floats on disk and in memory; all similarity
math accumulates in 64-bit. The store is read-only by convention once built:
nothing mutates entries after load.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmbeddingFormatError,
    MissingEmbeddingError,
    ZeroNormError,
)

MAGIC = b"SGEM"
FORMAT_VERSION = 1

KINDS = ("abstract", "figure", "subfigure", "caption", "ga", "adapter")


def _join(kind: str, *parts: str) -> str:
    for part in parts:
        if not part:
            raise ValueError(f"empty id component in {kind} key")
    return f"{kind}:" + "/".join(parts)


def abstract_key(paper_id: str) -> str:
    return _join("abstract", paper_id)


def figure_key(paper_id: str, figure_id: str) -> str:
    return _join("figure", paper_id, figure_id)


def subfigure_key(paper_id: str, figure_id: str, subfigure_id: str) -> str:
    return _join("subfigure", paper_id, figure_id, subfigure_id)


def caption_key(paper_id: str, figure_id: str, subfigure_id: str | None = None) -> str:
    if subfigure_id is None:
        return _join("caption", paper_id, figure_id)
    return _join("caption", paper_id, figure_id, subfigure_id)


def ga_key(paper_id: str) -> str:
    return _join("ga", paper_id)


def adapter_row_key(i: int) -> str:
    return f"adapter:row:{i}"


class EmbeddingStore:
    """Exact-key map from "kind:id" strings to fixed-dimension vectors."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = int(dim)
        self._entries: dict[str, np.ndarray] = {}

    def __len__(self):
        return len(self._entries)

    def __contains__(self, key):
        return key in self._entries

    def keys(self):
        return self._entries.keys()

    def add(self, key: str, vector) -> None:
        if key in self._entries:
            raise EmbeddingFormatError(f"duplicate key '{key}'")
        vec = np.asarray(vector, dtype=np.float32)
        if vec.ndim != 1 or vec.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"key '{key}': expected {self.dim} components, got {vec.shape}"
            )
        if not np.all(np.isfinite(vec)):
            raise EmbeddingFormatError(f"key '{key}': non-finite component")
        self._entries[key] = vec

    def get(self, key: str) -> np.ndarray:
        try:
            return self._entries[key]
        except KeyError:
            raise MissingEmbeddingError(key) from None


def load_embeddings(path) -> EmbeddingStore:
    """Read an embedding file, binary or the one-record-per-line text form."""
    data = Path(path).read_bytes()
    if data[:4] == MAGIC:
        return _load_binary(data, str(path))
    return _load_text(data, str(path))


def _load_binary(data: bytes, name: str) -> EmbeddingStore:
    if len(data) < 20:
        raise EmbeddingFormatError(f"{name}: truncated header")
    version, dim = struct.unpack_from("<II", data, 4)
    (count,) = struct.unpack_from("<Q", data, 12)
    if version != FORMAT_VERSION:
        raise EmbeddingFormatError(f"{name}: unsupported format version {version}")
    if dim < 1:
        raise EmbeddingFormatError(f"{name}: invalid dim {dim}")
    store = EmbeddingStore(dim)
    offset = 20
    vec_bytes = 4 * dim
    for i in range(count):
        if offset + 2 > len(data):
            raise EmbeddingFormatError(f"{name}: truncated at record {i + 1}")
        (keylen,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + keylen + vec_bytes > len(data):
            raise EmbeddingFormatError(f"{name}: truncated at record {i + 1}")
        try:
            key = data[offset:offset + keylen].decode("utf-8")
        except UnicodeDecodeError:
            raise EmbeddingFormatError(f"{name}: record {i + 1} key is not valid UTF-8") from None
        offset += keylen
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset)
        offset += vec_bytes
        store.add(key, vec)
    if offset != len(data):
        raise EmbeddingFormatError(f"{name}: {len(data) - offset} trailing bytes after last record")
    return store


def _load_text(data: bytes, name: str) -> EmbeddingStore:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise EmbeddingFormatError(f"{name}: neither binary magic nor UTF-8 text") from None
    store = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, rest = line.partition("\t")
        if not sep or not key:
            raise EmbeddingFormatError(f"{name}: line {lineno}: expected 'key<TAB>components'")
        try:
            vec = [float(c) for c in rest.split()]
        except ValueError:
            raise EmbeddingFormatError(f"{name}: line {lineno}: non-numeric component") from None
        if not vec:
            raise EmbeddingFormatError(f"{name}: line {lineno}: empty vector")
        if store is None:
            store = EmbeddingStore(len(vec))
        elif len(vec) != store.dim:
            raise EmbeddingFormatError(
                f"{name}: key '{key}': expected {store.dim} components, got {len(vec)}"
            )
        store.add(key, vec)
    if store is None:
        raise EmbeddingFormatError(f"{name}: no records")
    return store


def save_embeddings(store: EmbeddingStore, path, fmt: str = "binary") -> None:
    """Write the store; binary round-trips every component bit-exactly."""
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<IIQ", FORMAT_VERSION, store.dim, len(store)))
            for key in store.keys():
                kb = key.encode("utf-8")
                fh.write(struct.pack("<H", len(kb)))
                fh.write(kb)
                fh.write(store.get(key).astype("<f4").tobytes())
    elif fmt == "text":
        with open(path, "w", encoding="utf-8") as fh:
            for key in store.keys():
                comps = " ".join(repr(float(c)) for c in store.get(key))
                fh.write(f"{key}\t{comps}\n")
    else:
        raise ValueError(f"unknown format '{fmt}' (expected 'binary' or 'text')")


def cosine(u, v) -> float:
    """Cosine similarity, 64-bit accumulation, clamped to [-1, 1]."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cosine: shapes {a.shape} and {b.shape} differ")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroNormError("cosine of a zero-norm vector is undefined")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def fuse_hadamard(figure_vec, caption_vec) -> np.ndarray:
    """Componentwise product; no normalization (cosine normalizes internally)."""
    a = np.asarray(figure_vec, dtype=np.float64)
    b = np.asarray(caption_vec, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"fuse_hadamard: shapes {a.shape} and {b.shape} differ")
    return a * b
