"""Exact top-k retrieval over a vector collection.

Corpora in the hundred-thousand-chunk range fit comfortably in memory as a
single float32 matrix, so search is one matmul per query batch; no
approximate structure is worth its recall risk at this scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .corpus import Chunk
from .embed import UNIT_NORM_TOL, VectorSet


@dataclass(frozen=True)
class RankedHit:
    query_id: str
    chunk_id: str
    doc_id: str
    work_id: str
    score: float
    rank: int  # 1-based

    def as_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "chunk_id": self.chunk_id,
            "doc_id": self.doc_id,
            "work_id": self.work_id,
            "score": self.score,
            "rank": self.rank,
        }


def hit_from_dict(row: Mapping) -> RankedHit:
    return RankedHit(
        query_id=row["query_id"],
        chunk_id=row["chunk_id"],
        doc_id=row["doc_id"],
        work_id=row["work_id"],
        score=float(row["score"]),
        rank=int(row["rank"]),
    )


class ChunkIndex:
    """Brute-force cosine index; ties broken by ascending chunk id."""

    def __init__(self, vectors: VectorSet, chunks: Iterable[Chunk] | None = None):
        if len(vectors) == 0:
            raise ValueError("cannot index an empty vector collection")
        seen: set[str] = set()
        for vec_id in vectors.ids:
            if vec_id in seen:
                raise ValueError(f"duplicate id in index: {vec_id!r}")
            seen.add(vec_id)
        vectors.validate_norms("indexed vector")
        self.vectors = vectors
        self._chunk_by_id: dict[str, Chunk] = {}
        if chunks is not None:
            self._chunk_by_id = {chunk.chunk_id: chunk for chunk in chunks}
        # Rank of each row's id in lexicographic order, so one lexsort
        # gives score-descending, id-ascending without comparing strings.
        order = np.argsort(np.array(vectors.ids))
        self._id_rank = np.empty(len(vectors), dtype=np.int64)
        self._id_rank[order] = np.arange(len(vectors))

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def dim(self) -> int:
        return self.vectors.dim

    def chunk(self, chunk_id: str) -> Chunk | None:
        return self._chunk_by_id.get(chunk_id)

    def _meta(self, chunk_id: str) -> tuple[str, str]:
        chunk = self._chunk_by_id.get(chunk_id)
        if chunk is not None:
            return chunk.doc_id, chunk.work_id
        return "", ""

    def search(self, query_id: str, query_vec: np.ndarray, k: int = 50) -> list[RankedHit]:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        query_vec = np.asarray(query_vec, dtype=np.float32)
        if query_vec.shape != (self.dim,):
            raise ValueError(f"query shape {query_vec.shape}, index dim {self.dim}")
        norm = float(np.linalg.norm(query_vec.astype(np.float64)))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"query vector norm {norm:.6f}, expected 1.0")
        scores = self.vectors.matrix @ query_vec
        order = np.lexsort((self._id_rank, -scores))
        top = order[: min(k, len(order))]
        hits = []
        for rank_zero, row in enumerate(top):
            chunk_id = self.vectors.ids[int(row)]
            doc_id, work_id = self._meta(chunk_id)
            hits.append(
                RankedHit(
                    query_id=query_id,
                    chunk_id=chunk_id,
                    doc_id=doc_id,
                    work_id=work_id,
                    score=float(scores[int(row)]),
                    rank=rank_zero + 1,
                )
            )
        return hits

    def search_many(
        self, queries: VectorSet, k: int = 50
    ) -> dict[str, list[RankedHit]]:
        return {
            vec.id: self.search(vec.id, vec.values, k=k) for vec in queries
        }
