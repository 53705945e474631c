"""Character-level reuse detection and query quote selection.

Detection is seed-and-extend: exact short grams locate candidate diagonals,
an ungapped x-drop extension sizes the region cheaply, and survivors are
re-aligned with exact local dynamic programming on a padded window so the
reported score and spans match what a full-matrix alignment would give.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .corpus import DocumentRecord

logger = logging.getLogger(__name__)

QUOTE_MIN_LEN = 150
QUOTE_MAX_LEN = 300
QUOTE_MIN_FREQUENCY = 3

# frequency-rank tiers sampled when assembling a query set, after the
# guaranteed head ranks
QUERY_TIERS = ((6, 50), (51, 150), (151, 1000))


@dataclass(frozen=True)
class AlignerParams:
    seed_len: int = 5
    match: int = 1
    mismatch: int = -1
    gap: int = -2
    x_drop: int = 10
    min_score: int = 30

    def __post_init__(self) -> None:
        if self.seed_len < 2:
            raise ValueError(f"seed_len must be >= 2, got {self.seed_len}")
        if self.match <= 0:
            raise ValueError(f"match must be positive, got {self.match}")
        if self.mismatch >= 0 or self.gap >= 0:
            raise ValueError("mismatch and gap must be negative")
        if self.x_drop <= 0 or self.min_score <= 0:
            raise ValueError("x_drop and min_score must be positive")


@dataclass(frozen=True)
class AlignmentMatch:
    query_doc: str
    target_doc: str
    target_work: str
    query_span: tuple[int, int]
    target_span: tuple[int, int]
    score: int
    identity: float
    columns: int

    def as_dict(self) -> dict:
        return {
            "query_doc": self.query_doc,
            "target_doc": self.target_doc,
            "target_work": self.target_work,
            "query_span": list(self.query_span),
            "target_span": list(self.target_span),
            "score": self.score,
            "identity": self.identity,
            "columns": self.columns,
        }


def match_from_dict(row: Mapping) -> AlignmentMatch:
    return AlignmentMatch(
        query_doc=row["query_doc"],
        target_doc=row["target_doc"],
        target_work=row["target_work"],
        query_span=tuple(row["query_span"]),
        target_span=tuple(row["target_span"]),
        score=int(row["score"]),
        identity=float(row["identity"]),
        columns=int(row["columns"]),
    )


@dataclass(frozen=True)
class LocalAlignment:
    score: int
    a_span: tuple[int, int]
    b_span: tuple[int, int]
    columns: int
    matches: int

    @property
    def identity(self) -> float:
        return self.matches / self.columns if self.columns else 0.0


def smith_waterman(a: str, b: str, params: AlignerParams) -> LocalAlignment | None:
    """Exact local alignment with linear gaps; ties resolved diag > up > left,
    and among equal-scoring cells the first in row-major order wins."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return None
    match, mismatch, gap = params.match, params.mismatch, params.gap
    rows = [[0] * (m + 1) for _ in range(n + 1)]
    ptr = [bytearray(m + 1) for _ in range(n + 1)]  # 0 stop, 1 diag, 2 up, 3 left
    best = 0
    best_pos = (0, 0)
    for i in range(1, n + 1):
        ch = a[i - 1]
        here = rows[i]
        above = rows[i - 1]
        trace = ptr[i]
        for j in range(1, m + 1):
            score = above[j - 1] + (match if ch == b[j - 1] else mismatch)
            origin = 1
            up = above[j] + gap
            if up > score:
                score = up
                origin = 2
            left = here[j - 1] + gap
            if left > score:
                score = left
                origin = 3
            if score <= 0:
                score = 0
                origin = 0
            here[j] = score
            trace[j] = origin
            if score > best:
                best = score
                best_pos = (i, j)
    if best < 1:
        return None
    i, j = best_pos
    columns = 0
    matched = 0
    while rows[i][j] > 0:
        origin = ptr[i][j]
        if origin == 1:
            i -= 1
            j -= 1
            if a[i] == b[j]:
                matched += 1
        elif origin == 2:
            i -= 1
        else:
            j -= 1
        columns += 1
    return LocalAlignment(
        score=best,
        a_span=(i, best_pos[0]),
        b_span=(j, best_pos[1]),
        columns=columns,
        matches=matched,
    )


def _extend_xdrop(
    src: str, tgt: str, i: int, j: int, params: AlignerParams
) -> tuple[int, int, int, int, int, int]:
    """Ungapped extension of a seed at (i, j); returns the best-scoring
    region (qs, qe, ts, te), its score, and how far right the attempt ran."""
    length = params.seed_len
    score = length * params.match
    best = score
    best_qe = i + length
    qi, tj = i + length, j + length
    while qi < len(src) and tj < len(tgt):
        score += params.match if src[qi] == tgt[tj] else params.mismatch
        qi += 1
        tj += 1
        if score > best:
            best = score
            best_qe = qi
        elif best - score > params.x_drop:
            break
    attempt_end = qi
    score = best
    best_qs = i
    qi, tj = i, j
    while qi > 0 and tj > 0:
        qi -= 1
        tj -= 1
        score += params.match if src[qi] == tgt[tj] else params.mismatch
        if score > best:
            best = score
            best_qs = qi
        elif best - score > params.x_drop:
            break
    diag = i - j
    return best_qs, best_qe, best_qs - diag, best_qe - diag, best, attempt_end


def _span_overlap(a: tuple[int, int], b: tuple[int, int]) -> int:
    return max(0, min(a[1], b[1]) - max(a[0], b[0]))


def _overlap_fraction(a: tuple[int, int], b: tuple[int, int]) -> float:
    shorter = min(a[1] - a[0], b[1] - b[0])
    if shorter <= 0:
        return 0.0
    return _span_overlap(a, b) / shorter


def _align_against(
    src: str, src_doc: str, target: DocumentRecord, params: AlignerParams
) -> list[AlignmentMatch]:
    tgt = target.text
    length = params.seed_len
    if len(src) < length or len(tgt) < length:
        return []
    gram_index: dict[str, list[int]] = {}
    for j in range(len(tgt) - length + 1):
        gram_index.setdefault(tgt[j : j + length], []).append(j)
    # cheap bar a candidate must clear before the expensive polish
    prefilter = min(params.min_score, max(length * params.match, params.x_drop))
    pad = params.x_drop + length
    skip_until: dict[int, int] = {}  # diagonal -> source index already scanned
    regions: list[tuple[int, int, int, int]] = []
    for i in range(len(src) - length + 1):
        hits = gram_index.get(src[i : i + length])
        if not hits:
            continue
        for j in hits:
            diag = i - j
            if i < skip_until.get(diag, 0):
                continue
            qs, qe, ts, te, raw, attempt_end = _extend_xdrop(src, tgt, i, j, params)
            skip_until[diag] = max(attempt_end, qe)
            if raw < prefilter:
                continue
            regions.append((qs, qe, ts, te))
    matches: list[AlignmentMatch] = []
    polished: list[tuple[tuple[int, int], tuple[int, int]]] = []
    for qs, qe, ts, te in regions:
        win_q = (max(0, qs - pad), min(len(src), qe + pad))
        win_t = (max(0, ts - pad), min(len(tgt), te + pad))
        duplicate = False
        for done_q, done_t in polished:
            if (
                _overlap_fraction(win_q, done_q) >= 0.5
                and _overlap_fraction(win_t, done_t) >= 0.5
            ):
                duplicate = True
                break
        if duplicate:
            continue
        local = smith_waterman(
            src[win_q[0] : win_q[1]], tgt[win_t[0] : win_t[1]], params
        )
        if local is None or local.score < params.min_score:
            continue
        q_span = (win_q[0] + local.a_span[0], win_q[0] + local.a_span[1])
        t_span = (win_t[0] + local.b_span[0], win_t[0] + local.b_span[1])
        polished.append((q_span, t_span))
        matches.append(
            AlignmentMatch(
                query_doc=src_doc,
                target_doc=target.doc_id,
                target_work=target.work_id,
                query_span=q_span,
                target_span=t_span,
                score=local.score,
                identity=local.identity,
                columns=local.columns,
            )
        )
    matches.sort(key=lambda m: (-m.score, m.query_span, m.target_span))
    kept: list[AlignmentMatch] = []
    for candidate in matches:
        shadowed = any(
            _overlap_fraction(candidate.query_span, existing.query_span) >= 0.5
            and _overlap_fraction(candidate.target_span, existing.target_span) >= 0.5
            for existing in kept
        )
        if not shadowed:
            kept.append(candidate)
    kept.sort(key=lambda m: (m.query_span, m.target_doc, m.target_span))
    return kept


def detect_reuse(
    query_text: str,
    corpus: Iterable[DocumentRecord],
    params: AlignerParams | None = None,
    source_doc: str = "",
    progress: Callable[[str], None] | None = None,
) -> list[AlignmentMatch]:
    """All local alignments of `query_text` against every corpus document,
    scoring at least `params.min_score`. Pass `source_doc` to skip the
    document the query came from."""
    if not query_text:
        raise ValueError("query_text must be non-empty")
    if params is None:
        params = AlignerParams()
    out: list[AlignmentMatch] = []
    for target in corpus:
        if source_doc and target.doc_id == source_doc:
            continue
        if progress is not None:
            progress(target.doc_id)
        out.extend(_align_against(query_text, source_doc, target, params))
    out.sort(key=lambda m: (m.query_span, m.target_doc, m.target_span))
    return out


@dataclass
class ReuseCluster:
    cluster_id: str
    span: tuple[int, int]  # canonical span in the query text
    canonical_text: str
    external_frequency: int
    occurrences: list[tuple[str, str, tuple[int, int]]] = field(default_factory=list)
    matches: list[AlignmentMatch] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "span": list(self.span),
            "canonical_text": self.canonical_text,
            "external_frequency": self.external_frequency,
            "occurrences": [
                [doc, work, list(span)] for doc, work, span in self.occurrences
            ],
            "matches": [m.as_dict() for m in self.matches],
        }


def cluster_reuses(
    matches: Iterable[AlignmentMatch], source_work: str, source_text: str
) -> list[ReuseCluster]:
    """Group matches whose source spans describe the same passage.

    Two matches belong together when their source-side spans overlap by at
    least half the shorter span; the canonical span and text come from the
    strongest match in the group. Frequency counts only occurrences outside
    the source work, so reprints of the source itself do not inflate it.
    """
    items = list(matches)
    parent = list(range(len(items)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    by_start = sorted(range(len(items)), key=lambda k: items[k].query_span)
    for pos, k in enumerate(by_start):
        for other in by_start[pos + 1 :]:
            if items[other].query_span[0] >= items[k].query_span[1]:
                break
            if _overlap_fraction(items[k].query_span, items[other].query_span) >= 0.5:
                union(k, other)
    groups: dict[int, list[AlignmentMatch]] = {}
    for k in range(len(items)):
        groups.setdefault(find(k), []).append(items[k])
    clusters = []
    for members in groups.values():
        members.sort(key=lambda m: (-m.score, m.query_span, m.target_doc, m.target_span))
        canon = members[0].query_span
        members.sort(key=lambda m: (m.query_span, m.target_doc, m.target_span))
        external = sum(1 for m in members if m.target_work != source_work)
        clusters.append(
            ReuseCluster(
                cluster_id="",
                span=canon,
                canonical_text=source_text[canon[0] : canon[1]],
                external_frequency=external,
                occurrences=[
                    (m.target_doc, m.target_work, m.target_span) for m in members
                ],
                matches=members,
            )
        )
    clusters.sort(key=lambda c: c.span)
    for i, cluster in enumerate(clusters):
        cluster.cluster_id = f"cl{i:04d}"
    return clusters


@dataclass(frozen=True)
class QueryQuote:
    quote_id: str
    text: str
    span: tuple[int, int]  # canonical span in the source text
    external_frequency: int
    frequency_rank: int  # 1 = most reused

    def as_dict(self) -> dict:
        return {
            "quote_id": self.quote_id,
            "text": self.text,
            "span": list(self.span),
            "external_frequency": self.external_frequency,
            "frequency_rank": self.frequency_rank,
        }


def quote_from_dict(row: Mapping) -> QueryQuote:
    return QueryQuote(
        quote_id=row["quote_id"],
        text=row["text"],
        span=tuple(row["span"]),
        external_frequency=int(row["external_frequency"]),
        frequency_rank=int(row["frequency_rank"]),
    )


def extract_query_quotes(
    clusters: Iterable[ReuseCluster],
    min_frequency: int = QUOTE_MIN_FREQUENCY,
    min_len: int = QUOTE_MIN_LEN,
    max_len: int = QUOTE_MAX_LEN,
) -> list[QueryQuote]:
    """Quote-sized reuse clusters ordered by how often other works repeat them."""
    eligible = [
        cluster
        for cluster in clusters
        if cluster.external_frequency >= min_frequency
        and min_len <= len(cluster.canonical_text) <= max_len
    ]
    eligible.sort(key=lambda c: (-c.external_frequency, c.cluster_id))
    return [
        QueryQuote(
            quote_id=f"q{rank:03d}",
            text=cluster.canonical_text,
            span=cluster.span,
            external_frequency=cluster.external_frequency,
            frequency_rank=rank,
        )
        for rank, cluster in enumerate(eligible, start=1)
    ]


def select_query_set(
    quotes: Iterable[QueryQuote],
    head: int = 5,
    per_tier: int = 5,
    tiers: tuple[tuple[int, int], ...] = QUERY_TIERS,
    seed: int = 0,
) -> list[QueryQuote]:
    """Head-plus-tiers sample of the ranked quotes.

    The `head` most-reused quotes are always taken; each rank tier then
    contributes `per_tier` quotes drawn with a seeded generator, so the set
    spans the frequency range instead of clumping at the top. A tier with
    too few quotes contributes everything it has.
    """
    ranked = {quote.frequency_rank: quote for quote in quotes}
    chosen: list[QueryQuote] = []
    for rank in range(1, head + 1):
        if rank in ranked:
            chosen.append(ranked[rank])
    rng = random.Random(seed)
    for low, high in tiers:
        members = [ranked[r] for r in sorted(ranked) if low <= r <= high]
        if len(members) <= per_tier:
            if len(members) < per_tier:
                logger.warning(
                    "rank tier %d-%d has %d quotes, wanted %d; taking all",
                    low,
                    high,
                    len(members),
                    per_tier,
                )
            chosen.extend(members)
        else:
            chosen.extend(rng.sample(members, per_tier))
    chosen.sort(key=lambda quote: quote.frequency_rank)
    return chosen
