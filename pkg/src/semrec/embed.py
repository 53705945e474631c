"""Chunk embeddings: pluggable embedder contract, deterministic hash embedder, vector file format.

The binary vector format ("RMV1") is fixed little-endian so vectors computed
by any external model can be imported byte-exactly:

    magic   4 bytes   b"RMV1"
    dim     u32 LE
    count   u64 LE
    ids     count x (u16 LE byte length + UTF-8 bytes)
    values  count x dim float32 LE
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, Protocol

import numpy as np

from .corpus import Chunk

UNIT_NORM_TOL = 1e-4

_MAGIC = b"RMV1"

# trigram -> (bucket, sign) memo; blake2b is stable across runs and platforms
_FEATURE_CACHE: dict[tuple[str, int], tuple[int, float]] = {}


class VectorFormatError(ValueError):
    """Base error for malformed vector payloads."""


class BadMagicError(VectorFormatError):
    pass


class DimMismatchError(VectorFormatError):
    pass


class TruncatedPayloadError(VectorFormatError):
    pass


@dataclass
class EmbeddingVector:
    id: str
    values: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


class Embedder(Protocol):
    name: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


def _feature(gram: str, dim: int) -> tuple[int, float]:
    key = (gram, dim)
    cached = _FEATURE_CACHE.get(key)
    if cached is None:
        value = int.from_bytes(
            hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest(), "little"
        )
        cached = (value % dim, 1.0 if value >> 63 == 0 else -1.0)
        _FEATURE_CACHE[key] = cached
    return cached


def hash_embed(text: str, dim: int = 256) -> np.ndarray:
    """Signed feature-hash of lowercased character trigrams, L2-normalized.

    Texts shorter than 3 characters have no trigrams and map to the unit
    vector e_0.
    """
    if dim < 8:
        raise ValueError(f"dim must be >= 8, got {dim}")
    raw = np.zeros(dim, dtype=np.float64)
    lowered = text.lower()
    for i in range(len(lowered) - 2):
        bucket, sign = _feature(lowered[i : i + 3], dim)
        raw[bucket] += sign
    norm = float(np.linalg.norm(raw))
    if norm == 0.0:
        raw[0] = 1.0
        norm = 1.0
    return (raw / norm).astype(np.float32)


class HashEmbedder:
    """Deterministic offline embedder; stand-in for any external encoder."""

    def __init__(self, dim: int = 256):
        if dim < 8:
            raise ValueError(f"dim must be >= 8, got {dim}")
        self.name = f"hash-trigram-{dim}"
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        return hash_embed(text, self.dim)


class VectorSet:
    """An ordered id-addressable collection of unit-norm float32 vectors of one dim."""

    def __init__(self, ids: list[str], matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float32)
        if matrix.ndim != 2:
            raise ValueError("matrix must be 2-dimensional")
        if len(ids) != matrix.shape[0]:
            raise ValueError(f"{len(ids)} ids for {matrix.shape[0]} vectors")
        self.ids = list(ids)
        self.matrix = matrix
        self._row_by_id = {vec_id: row for row, vec_id in enumerate(self.ids)}

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[EmbeddingVector]:
        for row, vec_id in enumerate(self.ids):
            yield EmbeddingVector(vec_id, self.matrix[row])

    def get(self, vec_id: str) -> np.ndarray:
        return self.matrix[self._row_by_id[vec_id]]

    def validate_norms(self, where: str = "vector") -> None:
        if len(self.ids) == 0:
            return
        norms = np.linalg.norm(self.matrix.astype(np.float64), axis=1)
        worst = int(np.argmax(np.abs(norms - 1.0)))
        if abs(norms[worst] - 1.0) > UNIT_NORM_TOL:
            raise VectorFormatError(
                f"{where} {self.ids[worst]!r} has norm {norms[worst]:.6f}, expected 1.0"
            )


def embed_chunks(chunks: Iterable[Chunk], embedder: Embedder) -> VectorSet:
    """One vector per chunk, id = chunk_id, input order preserved."""
    chunk_list = list(chunks)
    matrix = np.zeros((len(chunk_list), embedder.dim), dtype=np.float32)
    ids = []
    for row, chunk in enumerate(chunk_list):
        matrix[row] = embedder.embed(chunk.text)
        ids.append(chunk.chunk_id)
    collection = VectorSet(ids, matrix)
    collection.validate_norms("embedded chunk")
    return collection


def embed_texts(items: Iterable[tuple[str, str]], embedder: Embedder) -> VectorSet:
    """Embed (id, text) pairs; used for query quotes."""
    pairs = list(items)
    matrix = np.zeros((len(pairs), embedder.dim), dtype=np.float32)
    ids = []
    for row, (item_id, text) in enumerate(pairs):
        matrix[row] = embedder.embed(text)
        ids.append(item_id)
    return VectorSet(ids, matrix)


def save_vectors(collection: VectorSet) -> bytes:
    out = bytearray()
    out += _MAGIC
    out += struct.pack("<I", collection.dim)
    out += struct.pack("<Q", len(collection))
    for vec_id in collection.ids:
        encoded = vec_id.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValueError(f"id too long for format: {vec_id[:32]!r}...")
        out += struct.pack("<H", len(encoded))
        out += encoded
    out += np.ascontiguousarray(collection.matrix, dtype="<f4").tobytes()
    return bytes(out)


def load_vectors(data: bytes, expected_dim: int | None = None) -> VectorSet:
    """Parse an RMV1 payload; errors distinguish bad magic, dim mismatch, truncation."""
    if len(data) < 4 or data[:4] != _MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}, expected {_MAGIC!r}")
    if len(data) < 16:
        raise TruncatedPayloadError("header truncated")
    dim = struct.unpack_from("<I", data, 4)[0]
    count = struct.unpack_from("<Q", data, 8)[0]
    if expected_dim is not None and dim != expected_dim:
        raise DimMismatchError(f"payload dim {dim}, expected {expected_dim}")
    offset = 16
    ids = []
    for _ in range(count):
        if offset + 2 > len(data):
            raise TruncatedPayloadError("id table truncated")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len > len(data):
            raise TruncatedPayloadError("id table truncated")
        ids.append(data[offset : offset + id_len].decode("utf-8"))
        offset += id_len
    need = count * dim * 4
    if len(data) - offset < need:
        raise TruncatedPayloadError(
            f"value block truncated: need {need} bytes, have {len(data) - offset}"
        )
    matrix = np.frombuffer(data, dtype="<f4", count=count * dim, offset=offset)
    collection = VectorSet(ids, matrix.reshape(count, dim).copy())
    collection.validate_norms("loaded vector")
    return collection


def save_vectors_path(collection: VectorSet, path) -> None:
    with open(path, "wb") as handle:
        handle.write(save_vectors(collection))


def load_vectors_path(path, expected_dim: int | None = None) -> VectorSet:
    with open(path, "rb") as handle:
        return load_vectors(handle.read(), expected_dim)
