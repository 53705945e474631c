"""Command line entry points.

Exit codes: 0 on success, 1 for usage problems, 2 for bad or missing data,
3 for anything unexpected. Commands compose through plain files, so each
one reads JSONL or RMV artifacts written by the previous step; `run` wires
the whole sequence together with stage skipping.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Mapping, Sequence

from . import diagnostics as diag
from . import stats as stats_mod
from .annotate import AnnotationStore, Candidate, Label, StoreError, enqueue_candidates
from .corpus import IngestError, chunk_corpus, chunk_from_dict, ingest_path
from .embed import (
    HashEmbedder,
    VectorFormatError,
    embed_chunks,
    load_vectors_path,
    save_vectors_path,
)
from .index import ChunkIndex, hit_from_dict
from .jsonl import ensure_dir, read_jsonl, write_jsonl
from .pipeline import (
    PipelineConfig,
    PipelineError,
    anti_lexical_partition,
    build_candidates,
    dedupe_by_work,
    filter_subcorpus,
    pooled_lexical_recall,
    run_pipeline,
)
from .reuse import (
    AlignerParams,
    cluster_reuses,
    detect_reuse,
    extract_query_quotes,
    match_from_dict,
    select_query_set,
)
from .sampling import (
    DEEPEN_THRESHOLD,
    auto_plan,
    decide_deepening,
    exhaustive_plan,
    pilot_plan,
    plan_from_dict,
    triage_plan,
)

logger = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; we reserve 2 for data errors."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _read_hits(path: Path):
    return [hit_from_dict(row) for row in read_jsonl(path)]


def _hits_by_query(path: Path) -> dict[str, list]:
    grouped: dict[str, list] = {}
    for hit in _read_hits(path):
        grouped.setdefault(hit.query_id, []).append(hit)
    return grouped


def _read_chunk_file(path: Path):
    return [chunk_from_dict(row) for row in read_jsonl(path)]


def _records_by_doc(path: Path):
    return {r.doc_id: r for r in ingest_path(path)}


def _write_csv(path: Path, fields: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


# --- ingest / embed / search ---------------------------------------------


def _cmd_ingest(args) -> int:
    records = ingest_path(args.input)
    chunks = chunk_corpus(records, chunk_size=args.chunk_size)
    write_jsonl(args.output, (c.as_dict() for c in chunks))
    print(f"{len(chunks)} chunks from {len(records)} documents -> {args.output}")
    return 0


def _cmd_embed(args) -> int:
    if args.import_path is not None:
        vectors = load_vectors_path(args.import_path)
        vectors.validate_norms("imported vector")
        if args.output is not None:
            save_vectors_path(vectors, args.output)
            print(f"{len(vectors)} vectors (dim {vectors.dim}) -> {args.output}")
        else:
            print(f"{args.import_path}: {len(vectors)} vectors, dim {vectors.dim}, ok")
        return 0
    if args.chunks is None or args.output is None:
        raise UsageError("embed needs --chunks and --output (or --import)")
    chunks = _read_chunk_file(args.chunks)
    vectors = embed_chunks(chunks, HashEmbedder(args.dim))
    save_vectors_path(vectors, args.output)
    print(f"{len(vectors)} vectors (dim {args.dim}) -> {args.output}")
    return 0


def _cmd_search(args) -> int:
    index_vectors = load_vectors_path(args.index)
    query_vectors = load_vectors_path(args.queries, expected_dim=index_vectors.dim)
    chunks = _read_chunk_file(args.chunks) if args.chunks else None
    searcher = ChunkIndex(index_vectors, chunks)
    rows = []
    for query_id in query_vectors.ids:
        for hit in searcher.search(query_id, query_vectors.get(query_id), k=args.k):
            rows.append(hit.as_dict())
    write_jsonl(args.output, rows)
    print(f"{len(rows)} hits for {len(query_vectors)} queries -> {args.output}")
    return 0


# --- reuse -----------------------------------------------------------------


def _aligner_from_args(args) -> AlignerParams:
    return AlignerParams(
        seed_len=args.seed_len,
        match=args.match,
        mismatch=args.mismatch,
        gap=args.gap,
        x_drop=args.x_drop,
        min_score=args.min_score,
    )


def _cmd_reuse_detect(args) -> int:
    query_text = Path(args.query).read_text(encoding="utf-8")
    corpus = ingest_path(args.corpus)
    matches = detect_reuse(
        query_text, corpus, params=_aligner_from_args(args), source_doc=args.source_doc
    )
    write_jsonl(args.output, (m.as_dict() for m in matches))
    print(f"{len(matches)} matches -> {args.output}")
    return 0


def _cmd_reuse_quotes(args) -> int:
    records = ingest_path(args.corpus)
    source_text = "\n\n".join(
        r.text for r in records if r.work_id == args.source_work
    )
    if not source_text:
        raise PipelineError(f"source work {args.source_work!r} not in corpus")
    matches = [match_from_dict(row) for row in read_jsonl(args.matches)]
    clusters = cluster_reuses(matches, args.source_work, source_text)
    quotes = extract_query_quotes(
        clusters,
        min_frequency=args.min_freq,
        min_len=args.min_len,
        max_len=args.max_len,
    )
    write_jsonl(args.output, (q.as_dict() for q in quotes))
    print(f"{len(clusters)} clusters, {len(quotes)} quotes -> {args.output}")
    if args.clusters:
        write_jsonl(args.clusters, (c.as_dict() for c in clusters))
    if args.queries:
        queries = select_query_set(quotes, seed=args.seed)
        write_jsonl(args.queries, (q.as_dict() for q in queries))
        print(f"{len(queries)} queries -> {args.queries}")
    return 0


# --- pipeline ---------------------------------------------------------------


def _cmd_pipeline_filter(args) -> int:
    allowed = {
        line.strip()
        for line in Path(args.allowed).read_text(encoding="utf-8").splitlines()
        if line.strip()
    }
    rows = []
    for query_id, hits in sorted(_hits_by_query(args.hits).items()):
        for hit in filter_subcorpus(hits, allowed):
            rows.append(hit.as_dict())
    write_jsonl(args.output, rows)
    print(f"{len(rows)} hits kept -> {args.output}")
    return 0


def _cmd_pipeline_dedupe(args) -> int:
    rows = []
    for query_id, hits in sorted(_hits_by_query(args.hits).items()):
        for hit in dedupe_by_work(hits):
            rows.append(hit.as_dict())
    write_jsonl(args.output, rows)
    print(f"{len(rows)} hits kept -> {args.output}")
    return 0


def _cmd_pipeline_partition(args) -> int:
    chunks = {c.chunk_id: c for c in _read_chunk_file(args.chunks)}
    matches_by_span = {}
    for row in read_jsonl(args.clusters):
        matches_by_span[tuple(row["span"])] = [
            match_from_dict(m) for m in row["matches"]
        ]
    queries = {row["quote_id"]: tuple(row["span"]) for row in read_jsonl(args.queries)}
    grouped = _hits_by_query(args.hits)
    rows = []
    parts = []
    for query_id in sorted(grouped):
        matches = matches_by_span.get(queries.get(query_id, ()), [])
        part = anti_lexical_partition(grouped[query_id], matches, chunks)
        part.query_id = query_id
        parts.append(part)
        for hit in part.intersection:
            rows.append({**hit.as_dict(), "partition": "intersection"})
        for hit in part.unique_semantic:
            rows.append({**hit.as_dict(), "partition": "unique_semantic"})
        for match in part.unique_lexical:
            rows.append(
                {**match.as_dict(), "query_id": query_id, "partition": "unique_lexical"}
            )
    write_jsonl(args.output, rows)
    recall = pooled_lexical_recall(parts)
    print(
        f"{len(rows)} rows -> {args.output} (pooled lexical recall: "
        + (f"{recall:.3f}" if recall is not None else "undefined")
        + ")"
    )
    return 0


# --- sampling ----------------------------------------------------------------


def _cmd_sample(args) -> int:
    planner = {
        "pilot": pilot_plan,
        "triage": triage_plan,
        "exhaustive": exhaustive_plan,
        "auto": auto_plan,
    }[args.stage]
    rows = []
    for query_id, hits in sorted(_hits_by_query(args.pool).items()):
        rows.append(planner(len(hits), query_id).as_dict())
    write_jsonl(args.output, rows)
    print(f"{len(rows)} plans -> {args.output}")
    return 0


def _cmd_sample_decide(args) -> int:
    grouped: dict[str, list[Label]] = {}
    for row in _export_rows(args.annotations):
        grouped.setdefault(row["query_id"], []).append(Label(row["label"]))
    for query_id in sorted(grouped):
        decision = decide_deepening(grouped[query_id], threshold=args.threshold)
        density = f"{decision.density:.3f}" if decision.density is not None else "n/a"
        print(
            f"{query_id} density={density} "
            + ("deepen" if decision.deepen else "stop")
        )
    return 0


# --- serve -------------------------------------------------------------------


def _load_candidates_for_serve(args) -> list[Candidate]:
    rows = list(read_jsonl(args.hits))
    if not rows:
        return []
    plans = (
        {p.query_id: p for p in (plan_from_dict(r) for r in read_jsonl(args.plan))}
        if args.plan
        else None
    )
    if "candidate_id" in rows[0]:
        candidates = [Candidate.from_dict(row) for row in rows]
        if plans is not None:
            keep = {
                (query_id, rank)
                for query_id, plan in plans.items()
                for rank in plan.ranks
            }
            candidates = [c for c in candidates if (c.query_id, c.rank) in keep]
        return candidates
    records = _records_by_doc(args.corpus) if args.corpus else None
    text_by_chunk = None
    if args.corpus:
        chunked = chunk_corpus(ingest_path(args.corpus), chunk_size=args.chunk_size)
        text_by_chunk = {c.chunk_id: c.text for c in chunked}
    out = []
    for query_id, hits in sorted(_hits_by_query(args.hits).items()):
        plan = plans.get(query_id) if plans is not None else None
        if plan is None:
            out.extend(
                build_candidates(
                    hits, text_by_chunk=text_by_chunk, records_by_doc=records
                )
            )
        else:
            out.extend(
                enqueue_candidates(
                    plan, hits, records_by_doc=records, text_by_chunk=text_by_chunk
                )
            )
    return out


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import ChunkContext, create_app

    candidates = _load_candidates_for_serve(args)
    store_path = Path(args.store) if args.store else Path(args.hits).with_name(
        "annotations.jsonl"
    )
    store = AnnotationStore(store_path)
    store.add_candidates(candidates)
    context = None
    if args.corpus:
        context = ChunkContext(
            chunk_corpus(ingest_path(args.corpus), chunk_size=args.chunk_size)
        )
    app = create_app(
        store,
        context=context,
        threshold=args.threshold,
        static_dir=args.static if args.static else None,
    )
    print(f"serving {len(store.candidates())} candidates on {args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# --- stats -------------------------------------------------------------------


def _export_rows(path: Path) -> list[dict]:
    """Flat annotation rows from either an export file or a store journal."""
    rows = list(read_jsonl(path))
    if rows and rows[0].get("kind") in ("candidate", "label"):
        return AnnotationStore(path).export_annotations()
    return rows


def _cmd_stats_table(args) -> int:
    rows = _export_rows(args.annotations)
    table = stats_mod.category_table(rows, rho_mode=args.rho_mode)
    out = ensure_dir(args.out)
    stats_mod.write_category_csv(table, out / "category.csv")
    (out / "category.txt").write_text(
        stats_mod.render_category_table(table), encoding="utf-8"
    )
    print(f"category table ({args.rho_mode} rho) -> {out / 'category.csv'}")
    return 0


def _cmd_stats_curve(args) -> int:
    rows = _export_rows(args.annotations)
    out = ensure_dir(args.out)
    grouped: dict[str, list[dict]] = {}
    for row in rows:
        grouped.setdefault(row["query_id"], []).append(row)
    flat = []
    lines = []
    for query_id in sorted(grouped):
        for point in stats_mod.yield_curve(grouped[query_id]):
            flat.append({"query_id": query_id, **point})
        if flat:
            last = [p for p in flat if p["query_id"] == query_id][-1]
            lines.append(
                f"{query_id}: {last['cumulative_significant_fraction']:.3f} "
                f"significant over {last['labeled']} labeled"
            )
    _write_csv(
        out / "yield_curve.csv",
        ["query_id", "rank", "cumulative_significant_fraction", "labeled"],
        flat,
    )
    (out / "yield_curve.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{len(flat)} curve points -> {out / 'yield_curve.csv'}")
    return 0


def _cmd_stats_facets(args) -> int:
    rows = _export_rows(args.annotations)
    records = _records_by_doc(args.meta)
    out = ensure_dir(args.out)
    lines = []
    for facet in ("author", "genre", "decade"):
        table = stats_mod.facet_counts(rows, records, facet)
        flat = [
            {"value": cell["value"], "total": cell["total"], **cell["counts"]}
            for cell in table
        ]
        fields = ["value", "total"] + [label.value for label in Label]
        _write_csv(out / f"facets_{facet}.csv", fields, flat)
        top = ", ".join(f"{c['value']} ({c['total']})" for c in table[:5])
        lines.append(f"{facet}: {top}")
    (out / "facets.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"facet tables -> {out}")
    return 0


def _cmd_stats_worklevel(args) -> int:
    rows = _export_rows(args.annotations)
    lexical_works = set()
    for row in read_jsonl(args.hits):
        if row.get("partition") == "intersection" and row.get("work_id"):
            lexical_works.add(row["work_id"])
        elif row.get("partition") == "unique_lexical" and row.get("target_work"):
            lexical_works.add(row["target_work"])
    result = stats_mod.work_level_comparison(rows, lexical_works)
    out = ensure_dir(args.out)
    _write_csv(out / "worklevel.csv", ["significant_works", "lexical_works"], [result])
    text = (
        f"works with significant hits: {result['significant_works']}\n"
        f"works with lexical overlap: {result['lexical_works']}\n"
    )
    (out / "worklevel.txt").write_text(text, encoding="utf-8")
    print(text.strip())
    return 0


# --- diagnose ----------------------------------------------------------------


def _diag_tools(args):
    annotator = None
    if getattr(args, "lexicon", None):
        lexicon = {}
        for line in Path(args.lexicon).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                word, tag = line.split()
                lexicon[word] = tag
        annotator = diag.BaselineAnnotator(lexicon)
    vocabulary = None
    if getattr(args, "vocab", None):
        vocabulary = [
            w
            for w in Path(args.vocab).read_text(encoding="utf-8").split()
            if w.strip()
        ]
    return annotator, vocabulary


def _compute_features(rows, annotator, vocabulary):
    quote_profiles: dict[str, diag.LinguisticProfile] = {}
    features: dict[str, dict] = {}
    for row in rows:
        query_id = row["query_id"]
        if query_id not in quote_profiles:
            quote_profiles[query_id] = diag.profile(
                row.get("quote_text", ""), annotator, vocabulary
            )
        hit_profile = diag.profile(row.get("text", ""), annotator, vocabulary)
        features[row["candidate_id"]] = diag.hit_features(
            quote_profiles[query_id], hit_profile
        )
    return features


def _cmd_diag_features(args) -> int:
    rows = _export_rows(args.annotations)
    annotator, vocabulary = _diag_tools(args)
    features = _compute_features(rows, annotator, vocabulary)
    out = ensure_dir(args.out)
    flat = [
        {"candidate_id": row["candidate_id"], "query_id": row["query_id"],
         "label": row["label"], **features[row["candidate_id"]]}
        for row in rows
    ]
    _write_csv(
        out / "features.csv",
        ["candidate_id", "query_id", "label", *diag.FEATURES],
        flat,
    )
    print(f"{len(flat)} feature rows -> {out / 'features.csv'}")
    return 0


def _quadrant_inputs(args):
    rows = _export_rows(args.annotations)
    language_by_doc = None
    if getattr(args, "meta", None):
        records = _records_by_doc(args.meta)
        language_by_doc = {
            doc_id: diag.document_language(record)
            for doc_id, record in records.items()
        }
    assignments = diag.assign_quadrants(
        rows,
        english_only=not args.all_languages,
        topical_as_negative=not args.topical_neutral,
        language_by_doc=language_by_doc,
    )
    return rows, assignments


def _cmd_diag_quadrants(args) -> int:
    rows, assignments = _quadrant_inputs(args)
    out = ensure_dir(args.out)
    _write_csv(
        out / "quadrants.csv",
        ["candidate_id", "query_id", "doc_id", "rank", "pool_size", "label",
         "quadrant"],
        (a.as_dict() for a in assignments),
    )
    counts = {q: len(g) for q, g in diag.quadrant_groups(assignments).items()}
    print(
        f"{out / 'quadrants.csv'}: "
        + ", ".join(f"{q}={counts[q]}" for q in diag.QUADRANTS)
    )
    return 0


def _cmd_diag_summary(args) -> int:
    rows, assignments = _quadrant_inputs(args)
    annotator, vocabulary = _diag_tools(args)
    features = _compute_features(rows, annotator, vocabulary)
    summary = diag.quadrant_summary(assignments, features)
    out = ensure_dir(args.out)
    flat = []
    lines = []
    for quadrant in diag.QUADRANTS:
        cells = summary[quadrant]
        row = {"quadrant": quadrant}
        rendered = []
        for feature in diag.FEATURES:
            cell = cells[feature]
            row[f"{feature}_mean"] = cell["mean"]
            row[f"{feature}_std"] = cell["std"]
            row[f"{feature}_n"] = cell["n"]
            rendered.append(
                f"{feature}="
                + (
                    f"{cell['mean']:.3f}±{cell['std']:.3f}"
                    if cell["mean"] is not None
                    else "n/a"
                )
            )
        flat.append(row)
        lines.append(f"{quadrant:<6} " + "  ".join(rendered))
    fields = ["quadrant"] + [
        f"{feature}_{suffix}" for feature in diag.FEATURES
        for suffix in ("mean", "std", "n")
    ]
    _write_csv(out / "summary.csv", fields, flat)
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return 0


def _cmd_diag_langdist(args) -> int:
    rows = _export_rows(args.annotations)
    baseline = diag.corpus_language_baseline(ingest_path(args.meta))
    table = diag.language_distribution(rows, baseline)
    out = ensure_dir(args.out)
    _write_csv(
        out / "langdist.csv",
        ["language", "count", "share_pct", "baseline_pct", "enrichment"],
        table,
    )
    lines = []
    for cell in table:
        enrichment = (
            f"{cell['enrichment']:.2f}x" if cell["enrichment"] is not None else "n/a"
        )
        lines.append(
            f"{cell['language']}: {cell['count']} hits, {cell['share_pct']:.1f}% "
            f"(baseline {cell['baseline_pct']:.1f}%, {enrichment})"
        )
    (out / "langdist.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return 0


# --- demo / run --------------------------------------------------------------


def _cmd_demo(args) -> int:
    from .demo import write_demo

    paths = write_demo(args.out, seed=args.seed)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


def _parse_config_file(path: Path) -> dict:
    raw: dict[str, str] = {}
    for i, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise PipelineError(f"{path}:{i}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def _coerce_config(raw: Mapping[str, object]) -> dict:
    out = dict(raw)
    for key in ("genres", "languages"):
        if isinstance(out.get(key), str):
            out[key] = [v.strip() for v in out[key].split(",") if v.strip()]
    if isinstance(out.get("year_range"), str):
        lo, _, hi = out["year_range"].partition(":")
        out["year_range"] = (int(lo), int(hi))
    return out


def _cmd_run(args) -> int:
    raw: dict[str, object] = {}
    if args.config:
        raw.update(_parse_config_file(Path(args.config)))
    for pair in args.set or []:
        if "=" not in pair:
            raise UsageError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        raw[key.strip()] = value.strip()
    for key in ("source_work", "k", "dim", "seed", "chunk_size", "ground_truth"):
        value = getattr(args, key)
        if value is not None:
            raw[key] = value
    config = PipelineConfig.from_mapping(_coerce_config(raw))
    actions = run_pipeline(args.corpus, args.out, config, force=args.force)
    for action in actions:
        print(action)
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semrec", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log stage progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="chunk a JSONL corpus into retrieval units")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--chunk-size", type=int, default=100)
    p.add_argument("--output", required=True, type=Path)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("embed", help="embed chunks, or validate an RMV file")
    p.add_argument("--chunks", type=Path)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--output", type=Path)
    p.add_argument("--import", dest="import_path", type=Path,
                   help="validate (and optionally re-save) existing vectors")
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("search", help="exact top-k cosine search")
    p.add_argument("--index", required=True, type=Path)
    p.add_argument("--queries", required=True, type=Path,
                   help="RMV file of query vectors")
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--chunks", type=Path,
                   help="chunks.jsonl for doc/work metadata on hits")
    p.add_argument("--output", required=True, type=Path)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("reuse", help="lexical reuse detection and quote extraction")
    reuse_sub = p.add_subparsers(dest="reuse_command", required=True)
    d = reuse_sub.add_parser("detect", help="align a query text against a corpus")
    d.add_argument("--query", required=True, type=Path, help="plain text file")
    d.add_argument("--corpus", required=True, type=Path)
    d.add_argument("--output", required=True, type=Path)
    d.add_argument("--source-doc", default="")
    d.add_argument("--seed-len", type=int, default=5)
    d.add_argument("--match", type=int, default=1)
    d.add_argument("--mismatch", type=int, default=-1)
    d.add_argument("--gap", type=int, default=-2)
    d.add_argument("--x-drop", type=int, default=10)
    d.add_argument("--min-score", type=int, default=30)
    d.set_defaults(func=_cmd_reuse_detect)
    q = reuse_sub.add_parser("quotes", help="cluster matches into query quotes")
    q.add_argument("--matches", required=True, type=Path)
    q.add_argument("--corpus", required=True, type=Path)
    q.add_argument("--source-work", required=True)
    q.add_argument("--min-len", type=int, default=150)
    q.add_argument("--max-len", type=int, default=300)
    q.add_argument("--min-freq", type=int, default=3)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--output", required=True, type=Path)
    q.add_argument("--clusters", type=Path)
    q.add_argument("--queries", type=Path,
                   help="also write the tiered query selection")
    q.set_defaults(func=_cmd_reuse_quotes)

    p = sub.add_parser("pipeline", help="hit-list transforms")
    pipe_sub = p.add_subparsers(dest="pipeline_command", required=True)
    f = pipe_sub.add_parser("filter", help="restrict hits to a document subset")
    f.add_argument("--hits", required=True, type=Path)
    f.add_argument("--allowed", required=True, type=Path,
                   help="file with one doc_id per line")
    f.add_argument("--output", required=True, type=Path)
    f.set_defaults(func=_cmd_pipeline_filter)
    dd = pipe_sub.add_parser("dedupe", help="keep the best hit per work")
    dd.add_argument("--hits", required=True, type=Path)
    dd.add_argument("--output", required=True, type=Path)
    dd.set_defaults(func=_cmd_pipeline_dedupe)
    pp = pipe_sub.add_parser("partition",
                             help="split hits against lexical occurrences")
    pp.add_argument("--hits", required=True, type=Path)
    pp.add_argument("--clusters", required=True, type=Path)
    pp.add_argument("--queries", required=True, type=Path)
    pp.add_argument("--chunks", required=True, type=Path)
    pp.add_argument("--output", required=True, type=Path)
    pp.set_defaults(func=_cmd_pipeline_partition)

    p = sub.add_parser("sample", help="annotation sampling plans")
    sample_sub = p.add_subparsers(dest="sample_command", required=True)
    for stage in ("pilot", "triage", "exhaustive", "auto"):
        s = sample_sub.add_parser(stage)
        s.add_argument("--pool", required=True, type=Path,
                       help="hits.jsonl defining per-query pool sizes")
        s.add_argument("--output", required=True, type=Path)
        s.set_defaults(func=_cmd_sample, stage=stage)
    dec = sample_sub.add_parser("decide", help="deepen-or-stop per query")
    dec.add_argument("--annotations", required=True, type=Path)
    dec.add_argument("--threshold", type=float, default=DEEPEN_THRESHOLD)
    dec.set_defaults(func=_cmd_sample_decide)

    p = sub.add_parser("serve", help="run the annotation HTTP server")
    p.add_argument("--hits", required=True, type=Path,
                   help="candidates.jsonl or raw hits.jsonl")
    p.add_argument("--plan", type=Path)
    p.add_argument("--corpus", type=Path)
    p.add_argument("--chunk-size", type=int, default=100)
    p.add_argument("--store", type=Path,
                   help="annotation journal (default: next to --hits)")
    p.add_argument("--static", type=Path, help="directory with the web client")
    p.add_argument("--threshold", type=float, default=DEEPEN_THRESHOLD)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("stats", help="summary tables over exported annotations")
    stats_sub = p.add_subparsers(dest="stats_command", required=True)
    t = stats_sub.add_parser("table", help="label shares by rank window")
    t.add_argument("--annotations", required=True, type=Path)
    t.add_argument("--rho-mode", choices=("pooled", "mean"), default="pooled")
    t.add_argument("--out", required=True, type=Path)
    t.set_defaults(func=_cmd_stats_table)
    c = stats_sub.add_parser("curve", help="cumulative yield by rank")
    c.add_argument("--annotations", required=True, type=Path)
    c.add_argument("--out", required=True, type=Path)
    c.set_defaults(func=_cmd_stats_curve)
    fa = stats_sub.add_parser("facets", help="label counts by author/genre/decade")
    fa.add_argument("--annotations", required=True, type=Path)
    fa.add_argument("--meta", required=True, type=Path, help="corpus JSONL")
    fa.add_argument("--out", required=True, type=Path)
    fa.set_defaults(func=_cmd_stats_facets)
    w = stats_sub.add_parser("worklevel",
                             help="works found by annotation vs lexical overlap")
    w.add_argument("--annotations", required=True, type=Path)
    w.add_argument("--hits", required=True, type=Path,
                   help="partitioned hits JSONL")
    w.add_argument("--out", required=True, type=Path)
    w.set_defaults(func=_cmd_stats_worklevel)

    p = sub.add_parser("diagnose", help="linguistic diagnostics over annotations")
    diag_sub = p.add_subparsers(dest="diagnose_command", required=True)
    common = dict(required=True, type=Path)
    fe = diag_sub.add_parser("features", help="per-candidate profile features")
    fe.add_argument("--annotations", **common)
    fe.add_argument("--vocab", type=Path, help="reference vocabulary, one word per line")
    fe.add_argument("--lexicon", type=Path, help="word TAG lines for the tagger")
    fe.add_argument("--out", **common)
    fe.set_defaults(func=_cmd_diag_features)
    qu = diag_sub.add_parser("quadrants", help="pool-position quadrant assignment")
    qu.add_argument("--annotations", **common)
    qu.add_argument("--meta", type=Path)
    qu.add_argument("--all-languages", action="store_true")
    qu.add_argument("--topical-neutral", action="store_true",
                    help="do not count topical matches as negatives")
    qu.add_argument("--out", **common)
    qu.set_defaults(func=_cmd_diag_quadrants)
    su = diag_sub.add_parser("summary", help="feature means per quadrant")
    su.add_argument("--annotations", **common)
    su.add_argument("--meta", type=Path)
    su.add_argument("--vocab", type=Path)
    su.add_argument("--lexicon", type=Path)
    su.add_argument("--all-languages", action="store_true")
    su.add_argument("--topical-neutral", action="store_true")
    su.add_argument("--out", **common)
    su.set_defaults(func=_cmd_diag_summary)
    la = diag_sub.add_parser("langdist", help="hit languages vs corpus baseline")
    la.add_argument("--annotations", **common)
    la.add_argument("--meta", **common)
    la.add_argument("--out", **common)
    la.set_defaults(func=_cmd_diag_langdist)

    p = sub.add_parser("demo", help="write the synthetic demo corpus")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_demo)

    p = sub.add_parser("run", help="full staged pipeline with skip-if-current")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--config", type=Path, help="key=value file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--source-work")
    p.add_argument("--k", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--chunk-size", type=int, dest="chunk_size")
    p.add_argument("--ground-truth", type=Path, dest="ground_truth")
    p.add_argument("--force", action="store_true",
                   help="re-run stages even when outputs are current")
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return int(args.func(args) or 0)
    except UsageError as err:
        print(f"semrec: error: {err}", file=sys.stderr)
        return 1
    except (IngestError, VectorFormatError, StoreError, PipelineError) as err:
        logger.error("%s", err)
        print(f"semrec: {err}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as err:
        logger.error("%s", err)
        print(f"semrec: {err}", file=sys.stderr)
        return 2
    except Exception:  # pragma: no cover - defensive
        logger.exception("internal error")
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
