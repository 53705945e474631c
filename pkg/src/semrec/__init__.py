"""Semantic recovery of unmarked quotation: retrieval, triage, annotation.

The package splits into small file-driven layers: corpus ingestion and
chunking, hash-trigram embeddings with exact top-k search, character-level
reuse detection that yields query quotes, rank-stratified sampling, an
append-only annotation store with an HTTP front end, and summary
statistics plus linguistic diagnostics over the resulting labels.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .annotate import AnnotationStore, Candidate, Label
from .corpus import Chunk, DocumentRecord, chunk_corpus, ingest, ingest_path
from .embed import HashEmbedder, VectorSet, hash_embed
from .index import ChunkIndex, RankedHit
from .pipeline import PipelineConfig, run_pipeline
from .reuse import AlignerParams, detect_reuse, smith_waterman
from .sampling import auto_plan, decide_deepening

__all__ = [
    "AlignerParams",
    "AnnotationStore",
    "Candidate",
    "Chunk",
    "ChunkIndex",
    "DocumentRecord",
    "HashEmbedder",
    "Label",
    "PipelineConfig",
    "RankedHit",
    "VectorSet",
    "auto_plan",
    "chunk_corpus",
    "decide_deepening",
    "detect_reuse",
    "hash_embed",
    "ingest",
    "ingest_path",
    "run_pipeline",
    "smith_waterman",
    "__version__",
]
