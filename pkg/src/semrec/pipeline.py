"""End-to-end orchestration: subcorpus filtering, semantic-vs-lexical
partition, candidate pools, and a resumable staged run.

Every stage reads and writes plain files, so a run can resume after an
interruption: a stage is skipped when its outputs exist and are newer than
all of its inputs.
"""

from __future__ import annotations

import json
import logging
import zlib
from dataclasses import dataclass, field, replace
from itertools import count
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from . import stats as stats_mod
from .annotate import AnnotationStore, Candidate, Label, make_candidate
from .corpus import Chunk, DocumentRecord, chunk_corpus, chunk_from_dict, ingest_path
from .embed import (
    HashEmbedder,
    VectorSet,
    embed_chunks,
    embed_texts,
    load_vectors_path,
    save_vectors_path,
)
from .index import ChunkIndex, RankedHit, hit_from_dict
from .jsonl import ensure_dir, read_jsonl, write_jsonl
from .reuse import (
    AlignerParams,
    AlignmentMatch,
    QueryQuote,
    cluster_reuses,
    detect_reuse,
    extract_query_quotes,
    match_from_dict,
    quote_from_dict,
    select_query_set,
)
from .sampling import auto_plan, decide_deepening, plan_from_dict

logger = logging.getLogger(__name__)


class PipelineError(ValueError):
    """Bad configuration or corpus state detected while orchestrating a run."""


def select_documents(
    records: Iterable[DocumentRecord],
    genres: Sequence[str] | None = None,
    languages: Sequence[str] | None = None,
    year_range: tuple[int, int] | None = None,
    exclude_works: Sequence[str] | None = None,
) -> list[DocumentRecord]:
    """Documents passing the metadata filters; None means no constraint."""
    genre_set = {g.lower() for g in genres} if genres else None
    language_set = {l.lower() for l in languages} if languages else None
    excluded = set(exclude_works) if exclude_works else set()
    out = []
    for record in records:
        if record.work_id in excluded:
            continue
        if genre_set is not None and (record.genre or "").lower() not in genre_set:
            continue
        if language_set is not None and (record.declared_language or "").lower() not in language_set:
            continue
        if year_range is not None:
            if record.year is None or not (year_range[0] <= record.year <= year_range[1]):
                continue
        out.append(record)
    return out


def filter_subcorpus(
    hits: Iterable[RankedHit], allowed_doc_ids: Iterable[str]
) -> list[RankedHit]:
    """Hits restricted to a document subset, re-ranked densely so the
    survivors run 1..n without holes."""
    allowed = set(allowed_doc_ids)
    kept = [h for h in sorted(hits, key=lambda h: h.rank) if h.doc_id in allowed]
    return [replace(hit, rank=i) for i, hit in enumerate(kept, start=1)]


def dedupe_by_work(hits: Iterable[RankedHit]) -> list[RankedHit]:
    """Best hit per work, re-ranked densely so downstream ranks have no holes.

    Hits without a work id are kept individually rather than collapsed into
    one bucket.
    """
    seen: set[str] = set()
    kept = []
    for hit in sorted(hits, key=lambda h: h.rank):
        key = hit.work_id or f"\x00doc:{hit.doc_id}"
        if key in seen:
            continue
        seen.add(key)
        kept.append(hit)
    return [replace(hit, rank=i) for i, hit in enumerate(kept, start=1)]


@dataclass
class HitPartition:
    query_id: str
    intersection: list[RankedHit] = field(default_factory=list)
    unique_semantic: list[RankedHit] = field(default_factory=list)
    unique_lexical: list[AlignmentMatch] = field(default_factory=list)

    @property
    def lexical_recall(self) -> float | None:
        found = len(self.intersection)
        missed = len(self.unique_lexical)
        if found + missed == 0:
            return None
        return found / (found + missed)

    def as_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "intersection": [h.as_dict() for h in self.intersection],
            "unique_semantic": [h.as_dict() for h in self.unique_semantic],
            "unique_lexical": [m.as_dict() for m in self.unique_lexical],
            "lexical_recall": self.lexical_recall,
        }


def anti_lexical_partition(
    hits: Iterable[RankedHit],
    matches: Iterable[AlignmentMatch],
    chunks: Mapping[str, Chunk],
) -> HitPartition:
    """Split one query's retrieval results against its lexical occurrences.

    A hit and a match pair up when the match sits in the same work and its
    target span overlaps the hit chunk's character span by at least one
    character. Hits with no pairing are the semantic-only yield; matches
    with no pairing are lexical occurrences retrieval missed.
    """
    hit_list = sorted(hits, key=lambda h: h.rank)
    match_list = list(matches)
    query_id = hit_list[0].query_id if hit_list else ""
    paired_hits: set[int] = set()
    paired_matches: set[int] = set()
    for hi, hit in enumerate(hit_list):
        chunk = chunks.get(hit.chunk_id)
        if chunk is None:
            continue
        for mi, match in enumerate(match_list):
            if match.target_work != hit.work_id:
                continue
            lo = max(match.target_span[0], chunk.char_start)
            hi_end = min(match.target_span[1], chunk.char_end)
            if hi_end - lo >= 1:
                paired_hits.add(hi)
                paired_matches.add(mi)
    part = HitPartition(query_id=query_id)
    for hi, hit in enumerate(hit_list):
        (part.intersection if hi in paired_hits else part.unique_semantic).append(hit)
    part.unique_lexical = [m for mi, m in enumerate(match_list) if mi not in paired_matches]
    return part


def pooled_lexical_recall(partitions: Iterable[HitPartition]) -> float | None:
    found = 0
    missed = 0
    for part in partitions:
        found += len(part.intersection)
        missed += len(part.unique_lexical)
    if found + missed == 0:
        return None
    return found / (found + missed)


def build_candidates(
    hits: Iterable[RankedHit],
    quote_text: str = "",
    text_by_chunk: Mapping[str, str] | None = None,
    records_by_doc: Mapping[str, DocumentRecord] | None = None,
) -> list[Candidate]:
    """Annotation pool for one query, densely re-ranked and denormalized
    with everything the labeling screen shows."""
    ordered = sorted(hits, key=lambda h: h.rank)
    ordered = [replace(hit, rank=i) for i, hit in enumerate(ordered, start=1)]
    pool_size = len(ordered)
    out = []
    for hit in ordered:
        text = text_by_chunk.get(hit.chunk_id, "") if text_by_chunk else ""
        record = records_by_doc.get(hit.doc_id) if records_by_doc else None
        out.append(
            make_candidate(
                hit, pool_size, quote_text=quote_text, text=text, record=record
            )
        )
    return out


@dataclass
class PipelineConfig:
    source_work: str
    dim: int = 256
    k: int = 50
    seed: int = 0
    chunk_size: int = 100
    min_frequency: int = 3
    quote_min_len: int = 150
    quote_max_len: int = 300
    min_score: int = 30
    genres: list[str] | None = None
    languages: list[str] | None = None
    year_range: tuple[int, int] | None = None
    ground_truth: str | None = None

    @classmethod
    def from_mapping(cls, raw: Mapping) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise PipelineError(f"unknown config keys: {', '.join(unknown)}")
        if "source_work" not in raw or not raw["source_work"]:
            raise PipelineError("config must set source_work")
        kwargs = dict(raw)
        if "year_range" in kwargs and kwargs["year_range"] is not None:
            lo, hi = kwargs["year_range"]
            kwargs["year_range"] = (int(lo), int(hi))
        for key in ("dim", "k", "seed", "chunk_size", "min_frequency",
                    "quote_min_len", "quote_max_len", "min_score"):
            if key in kwargs:
                kwargs[key] = int(kwargs[key])
        return cls(**kwargs)


ARTIFACT_NAMES = (
    "chunks.jsonl",
    "vectors.rmv",
    "matches.jsonl",
    "clusters.jsonl",
    "quotes.jsonl",
    "queries.jsonl",
    "hits.jsonl",
    "partition.json",
    "candidates.jsonl",
    "plans.jsonl",
    "annotations.jsonl",
    "report.json",
    "report.txt",
)


def _aligner_params(config: PipelineConfig) -> AlignerParams:
    return AlignerParams(min_score=config.min_score)


def _load_records(corpus_path: Path, config: PipelineConfig) -> list[DocumentRecord]:
    records = select_documents(
        ingest_path(corpus_path),
        genres=config.genres,
        languages=config.languages,
        year_range=config.year_range,
    )
    if not records:
        raise PipelineError("no documents left after subcorpus filters")
    return records


def _stage_ingest(corpus_path: Path, out_dir: Path, config: PipelineConfig) -> None:
    records = _load_records(corpus_path, config)
    if not any(r.work_id == config.source_work for r in records):
        raise PipelineError(f"source work {config.source_work!r} not in corpus")
    chunks = chunk_corpus(records, chunk_size=config.chunk_size)
    write_jsonl(out_dir / "chunks.jsonl", (c.as_dict() for c in chunks))


def _read_chunks(out_dir: Path) -> list[Chunk]:
    return [chunk_from_dict(row) for row in read_jsonl(out_dir / "chunks.jsonl")]


def _stage_embed(out_dir: Path, config: PipelineConfig) -> None:
    chunks = _read_chunks(out_dir)
    vectors = embed_chunks(chunks, HashEmbedder(config.dim))
    save_vectors_path(vectors, out_dir / "vectors.rmv")


def _source_text(records: Sequence[DocumentRecord], source_work: str) -> str:
    parts = [r.text for r in records if r.work_id == source_work]
    return "\n\n".join(parts)


def _stage_reuse(corpus_path: Path, out_dir: Path, config: PipelineConfig) -> None:
    records = _load_records(corpus_path, config)
    source_text = _source_text(records, config.source_work)
    targets = [r for r in records if r.work_id != config.source_work]
    matches = detect_reuse(source_text, targets, params=_aligner_params(config))
    clusters = cluster_reuses(matches, config.source_work, source_text)
    quotes = extract_query_quotes(
        clusters,
        min_frequency=config.min_frequency,
        min_len=config.quote_min_len,
        max_len=config.quote_max_len,
    )
    queries = select_query_set(quotes, seed=config.seed)
    write_jsonl(out_dir / "matches.jsonl", (m.as_dict() for m in matches))
    write_jsonl(out_dir / "clusters.jsonl", (c.as_dict() for c in clusters))
    write_jsonl(out_dir / "quotes.jsonl", (q.as_dict() for q in quotes))
    write_jsonl(out_dir / "queries.jsonl", (q.as_dict() for q in queries))


def _read_queries(out_dir: Path) -> list[QueryQuote]:
    return [quote_from_dict(row) for row in read_jsonl(out_dir / "queries.jsonl")]


def _stage_search(out_dir: Path, config: PipelineConfig) -> None:
    chunks = _read_chunks(out_dir)
    vectors = load_vectors_path(out_dir / "vectors.rmv", expected_dim=config.dim)
    queries = _read_queries(out_dir)
    # The quotes come from the source work, so its own chunks would only
    # retrieve themselves; search the external corpus.
    external = {c.chunk_id for c in chunks if c.work_id != config.source_work}
    keep = [i for i, cid in enumerate(vectors.ids) if cid in external]
    rows: list[dict] = []
    if queries and keep:
        searcher = ChunkIndex(
            VectorSet([vectors.ids[i] for i in keep], vectors.matrix[keep]),
            [c for c in chunks if c.chunk_id in external],
        )
        query_vectors = embed_texts(
            ((q.quote_id, q.text) for q in queries), HashEmbedder(config.dim)
        )
        for quote in queries:
            for hit in searcher.search(quote.quote_id, query_vectors.get(quote.quote_id), k=config.k):
                rows.append(hit.as_dict())
    write_jsonl(out_dir / "hits.jsonl", rows)


def _stage_partition(out_dir: Path, config: PipelineConfig) -> None:
    chunks = {c.chunk_id: c for c in _read_chunks(out_dir)}
    hits_by_query: dict[str, list[RankedHit]] = {}
    for row in read_jsonl(out_dir / "hits.jsonl"):
        hit = hit_from_dict(row)
        hits_by_query.setdefault(hit.query_id, []).append(hit)
    matches_by_span: dict[tuple[int, int], list[AlignmentMatch]] = {}
    for row in read_jsonl(out_dir / "clusters.jsonl"):
        matches_by_span[tuple(row["span"])] = [
            match_from_dict(m) for m in row["matches"]
        ]
    parts = []
    for quote in _read_queries(out_dir):
        deduped = dedupe_by_work(hits_by_query.get(quote.quote_id, []))
        part = anti_lexical_partition(
            deduped,
            matches_by_span.get(tuple(quote.span), []),
            chunks,
        )
        part.query_id = quote.quote_id
        parts.append(part)
    payload = {
        "queries": {p.query_id: p.as_dict() for p in parts},
        "pooled_lexical_recall": pooled_lexical_recall(parts),
    }
    (out_dir / "partition.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _read_partition(out_dir: Path) -> dict:
    return json.loads((out_dir / "partition.json").read_text(encoding="utf-8"))


def _stage_candidates(corpus_path: Path, out_dir: Path, config: PipelineConfig) -> None:
    partition = _read_partition(out_dir)
    records = {r.doc_id: r for r in _load_records(corpus_path, config)}
    text_by_chunk = {c.chunk_id: c.text for c in _read_chunks(out_dir)}
    quote_texts = {q.quote_id: q.text for q in _read_queries(out_dir)}
    rows = []
    for query_id in sorted(partition["queries"]):
        hits = [hit_from_dict(h) for h in partition["queries"][query_id]["unique_semantic"]]
        for candidate in build_candidates(
            hits,
            quote_text=quote_texts.get(query_id, ""),
            text_by_chunk=text_by_chunk,
            records_by_doc=records,
        ):
            rows.append(candidate.as_dict())
    write_jsonl(out_dir / "candidates.jsonl", rows)


def _read_candidates(out_dir: Path) -> list[Candidate]:
    return [Candidate.from_dict(row) for row in read_jsonl(out_dir / "candidates.jsonl")]


def _stage_plans(out_dir: Path, config: PipelineConfig) -> None:
    pool_sizes: dict[str, int] = {}
    for candidate in _read_candidates(out_dir):
        pool_sizes[candidate.query_id] = candidate.pool_size
    rows = [
        auto_plan(pool_sizes[query_id], query_id).as_dict()
        for query_id in sorted(pool_sizes)
    ]
    write_jsonl(out_dir / "plans.jsonl", rows)


def simulated_label(candidate: Candidate, kind: str | None) -> Label:
    """Deterministic stand-in for an expert, driven by planted ground truth."""
    basis = zlib.crc32(candidate.doc_id.encode("utf-8"))
    if kind in ("verbatim", "paraphrase"):
        return Label.PARAPHRASE if basis % 2 == 0 else Label.MEANING_MATCH
    if kind == "topical":
        return Label.TOPICAL_MATCH
    if basis % 19 == 0:
        return Label.DONT_KNOW
    return Label.NO_MATCH


def _stage_annotate_sim(out_dir: Path, config: PipelineConfig) -> None:
    truth_by_doc: dict[str, tuple[str, str | None]] = {}
    for row in read_jsonl(Path(config.ground_truth)):
        truth_by_doc[row["doc_id"]] = (row["kind"], row.get("query_id"))
    candidates = _read_candidates(out_dir)
    by_key = {(c.query_id, c.rank): c for c in candidates}
    ticks = count(start=1)
    journal = out_dir / "annotations.jsonl"
    if journal.exists():
        journal.unlink()
    store = AnnotationStore(journal, clock=lambda: float(next(ticks)))
    store.add_candidates(candidates)
    for row in read_jsonl(out_dir / "plans.jsonl"):
        plan = plan_from_dict(row)
        for entry in plan.entries:
            candidate = by_key.get((plan.query_id, entry.rank))
            if candidate is None:
                continue
            kind, owner = truth_by_doc.get(candidate.doc_id, (None, None))
            if owner is not None and owner != candidate.query_id:
                # a plant for another quote is just a topic-free distractor here
                kind = None
            label = simulated_label(candidate, kind)
            duration = 4.0 + (zlib.crc32(candidate.candidate_id.encode("utf-8")) % 240) / 10.0
            store.submit_label(
                candidate.candidate_id,
                label,
                annotator="sim",
                duration_seconds=duration,
            )


def _stage_stats(corpus_path: Path, out_dir: Path, config: PipelineConfig) -> None:
    records = {r.doc_id: r for r in _load_records(corpus_path, config)}
    store = AnnotationStore(out_dir / "annotations.jsonl")
    rows = store.export_annotations()
    partition = _read_partition(out_dir)
    lexical_works = set()
    for query in partition["queries"].values():
        for hit in query["intersection"]:
            if hit["work_id"]:
                lexical_works.add(hit["work_id"])
    deepening = {}
    curves = {}
    for query_id in sorted({row["query_id"] for row in rows}):
        query_rows = [row for row in rows if row["query_id"] == query_id]
        decision = decide_deepening([Label(row["label"]) for row in query_rows])
        deepening[query_id] = {
            "density": decision.density,
            "decision": "deepen" if decision.deepen else "stop",
        }
        curves[query_id] = stats_mod.yield_curve(query_rows)
    report = {
        "n_annotations": len(rows),
        "category_table": stats_mod.category_table(rows),
        "yield_curves": curves,
        "facets": {
            facet: stats_mod.facet_counts(rows, records, facet)
            for facet in ("author", "genre", "decade")
        },
        "work_level": stats_mod.work_level_comparison(rows, lexical_works),
        "median_duration_seconds": stats_mod.median_duration(rows),
        "pooled_lexical_recall": partition["pooled_lexical_recall"],
        "deepening": deepening,
    }
    (out_dir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out_dir / "report.txt").write_text(
        stats_mod.render_report(report), encoding="utf-8"
    )


@dataclass(frozen=True)
class Stage:
    name: str
    inputs: tuple[Path, ...]
    outputs: tuple[Path, ...]
    run: Callable[[], None]


def _needs_run(stage: Stage, force: bool) -> bool:
    if force:
        return True
    newest_input = 0.0
    for path in stage.inputs:
        if path.exists():
            newest_input = max(newest_input, path.stat().st_mtime)
    oldest_output = None
    for path in stage.outputs:
        if not path.exists():
            return True
        mtime = path.stat().st_mtime
        oldest_output = mtime if oldest_output is None else min(oldest_output, mtime)
    return oldest_output is not None and newest_input > oldest_output


def run_pipeline(
    corpus_path: Path,
    out_dir: Path,
    config: PipelineConfig,
    force: bool = False,
) -> list[str]:
    """Run every stage in order, skipping any whose outputs are current.

    Returns one "<stage>: ran|skipped" entry per stage, in execution order.
    """
    corpus_path = Path(corpus_path)
    out_dir = Path(out_dir)
    ensure_dir(out_dir)
    art = lambda name: out_dir / name
    stages = [
        Stage("ingest", (corpus_path,), (art("chunks.jsonl"),),
              lambda: _stage_ingest(corpus_path, out_dir, config)),
        Stage("embed", (art("chunks.jsonl"),), (art("vectors.rmv"),),
              lambda: _stage_embed(out_dir, config)),
        Stage("reuse", (corpus_path,),
              (art("matches.jsonl"), art("clusters.jsonl"),
               art("quotes.jsonl"), art("queries.jsonl")),
              lambda: _stage_reuse(corpus_path, out_dir, config)),
        Stage("search",
              (art("chunks.jsonl"), art("vectors.rmv"), art("queries.jsonl")),
              (art("hits.jsonl"),),
              lambda: _stage_search(out_dir, config)),
        Stage("partition",
              (art("hits.jsonl"), art("clusters.jsonl"),
               art("queries.jsonl"), art("chunks.jsonl")),
              (art("partition.json"),),
              lambda: _stage_partition(out_dir, config)),
        Stage("candidates",
              (art("partition.json"), art("queries.jsonl"),
               art("chunks.jsonl"), corpus_path),
              (art("candidates.jsonl"),),
              lambda: _stage_candidates(corpus_path, out_dir, config)),
        Stage("plans", (art("candidates.jsonl"),), (art("plans.jsonl"),),
              lambda: _stage_plans(out_dir, config)),
    ]
    if config.ground_truth:
        truth = Path(config.ground_truth)
        stages.append(
            Stage("annotate",
                  (art("plans.jsonl"), art("candidates.jsonl"), truth),
                  (art("annotations.jsonl"),),
                  lambda: _stage_annotate_sim(out_dir, config)))
        stages.append(
            Stage("stats",
                  (art("annotations.jsonl"), art("candidates.jsonl"),
                   art("partition.json"), corpus_path),
                  (art("report.json"), art("report.txt")),
                  lambda: _stage_stats(corpus_path, out_dir, config)))
    actions = []
    for stage in stages:
        if _needs_run(stage, force):
            logger.info("stage %s: running", stage.name)
            stage.run()
            actions.append(f"{stage.name}: ran")
        else:
            logger.info("stage %s: outputs current, skipping", stage.name)
            actions.append(f"{stage.name}: skipped")
    return actions
