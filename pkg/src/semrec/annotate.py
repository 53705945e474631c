"""Annotation taxonomy and a crash-safe label store.

The store journals every event to JSONL and replays the journal on open, so
a killed process loses nothing and relabeling a candidate never erases the
earlier judgment: the latest row wins, history stays. Leases hand each
annotator a private claim on a candidate for a few minutes so two people
working the same pool never see the same item.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Iterable, Mapping

from .corpus import DocumentRecord
from .index import RankedHit

if TYPE_CHECKING:
    from .sampling import SamplingPlan


class Label(str, Enum):
    PARAPHRASE = "paraphrase"
    MEANING_MATCH = "meaning_match"
    TOPICAL_MATCH = "topical_match"
    NO_MATCH = "no_match"
    DONT_KNOW = "dont_know"


# Paraphrase and meaning-match count as real uptake of the source; topical
# overlap and weaker are not evidence of reception.
SIGNIFICANT_LABELS = frozenset({Label.PARAPHRASE, Label.MEANING_MATCH})

# "lexical_match" is reserved in export files for rows that entered a pool
# from the lexical side; the interactive taxonomy never offers it because
# such hits are removed before annotation.
RESERVED_EXPORT_LABEL = "lexical_match"

DEFAULT_LEASE_SECONDS = 600.0


def is_significant(label: Label) -> bool:
    return label in SIGNIFICANT_LABELS


@dataclass(frozen=True)
class Candidate:
    """One annotatable item, denormalized so the UI never needs a join.

    Metadata fields are always present, possibly as empty strings; an
    annotator should see "author unknown" rather than a missing row.
    """

    candidate_id: str
    query_id: str
    quote_text: str
    chunk_id: str
    text: str
    doc_id: str
    work_id: str
    rank: int  # dense 1-based rank within this query's pool
    pool_size: int
    score: float
    author: str = ""
    title: str = ""
    year: int | None = None
    genre: str = ""
    context_ref: str = ""

    def as_dict(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "query_id": self.query_id,
            "quote_text": self.quote_text,
            "chunk_id": self.chunk_id,
            "text": self.text,
            "doc_id": self.doc_id,
            "work_id": self.work_id,
            "rank": self.rank,
            "pool_size": self.pool_size,
            "score": self.score,
            "author": self.author,
            "title": self.title,
            "year": self.year,
            "genre": self.genre,
            "context_ref": self.context_ref,
        }

    @classmethod
    def from_dict(cls, row: Mapping) -> "Candidate":
        return cls(
            candidate_id=row["candidate_id"],
            query_id=row["query_id"],
            quote_text=row.get("quote_text", ""),
            chunk_id=row["chunk_id"],
            text=row.get("text", ""),
            doc_id=row["doc_id"],
            work_id=row["work_id"],
            rank=int(row["rank"]),
            pool_size=int(row["pool_size"]),
            score=float(row["score"]),
            author=row.get("author", ""),
            title=row.get("title", ""),
            year=row.get("year"),
            genre=row.get("genre", ""),
            context_ref=row.get("context_ref", ""),
        )


def make_candidate(
    hit: RankedHit,
    pool_size: int,
    quote_text: str = "",
    text: str = "",
    record: DocumentRecord | None = None,
) -> Candidate:
    return Candidate(
        candidate_id=f"{hit.query_id}:{hit.rank}",
        query_id=hit.query_id,
        quote_text=quote_text,
        chunk_id=hit.chunk_id,
        text=text,
        doc_id=hit.doc_id,
        work_id=hit.work_id,
        rank=hit.rank,
        pool_size=pool_size,
        score=hit.score,
        author=record.author if record else "",
        title=record.title if record else "",
        year=record.year if record else None,
        genre=record.genre if record else "",
        context_ref=hit.chunk_id,
    )


class StoreError(ValueError):
    pass


def enqueue_candidates(
    plan: "SamplingPlan",
    hits: Iterable[RankedHit],
    records_by_doc: Mapping[str, DocumentRecord] | None = None,
    quote_text: str = "",
    text_by_chunk: Mapping[str, str] | None = None,
) -> list[Candidate]:
    """Join a sampling plan against a query's (deduped, densely ranked) pool.

    Every plan rank must resolve to a hit; a plan pointing past the pool is
    a data error worth failing loudly on.
    """
    by_rank = {hit.rank: hit for hit in hits}
    pool_size = len(by_rank)
    out = []
    for entry in plan.entries:
        hit = by_rank.get(entry.rank)
        if hit is None:
            raise StoreError(
                f"plan for {plan.query_id!r} wants rank {entry.rank}, "
                f"pool has {pool_size}"
            )
        record = records_by_doc.get(hit.doc_id) if records_by_doc else None
        chunk_text = text_by_chunk.get(hit.chunk_id, "") if text_by_chunk else ""
        out.append(
            make_candidate(
                hit, pool_size, quote_text=quote_text, text=chunk_text, record=record
            )
        )
    return out


@dataclass(frozen=True)
class Annotation:
    candidate_id: str
    label: Label
    annotator: str
    created_at: float
    duration_seconds: float | None = None
    client_token: str | None = None

    def as_dict(self) -> dict:
        return {
            "kind": "label",
            "candidate_id": self.candidate_id,
            "label": self.label.value,
            "annotator": self.annotator,
            "created_at": self.created_at,
            "duration_seconds": self.duration_seconds,
            "client_token": self.client_token,
        }


class AnnotationStore:
    """Append-only journal of candidates and label events.

    `clock` is injectable so simulated runs produce byte-identical journals.
    """

    def __init__(
        self,
        path: Path | str,
        clock: Callable[[], float] = time.time,
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
    ):
        self.path = Path(path)
        self.clock = clock
        self.lease_seconds = lease_seconds
        self._lock = threading.Lock()
        self._candidates: dict[str, Candidate] = {}
        self._history: dict[str, list[Annotation]] = {}
        self._events_by_token: dict[str, Annotation] = {}
        self._leases: dict[str, tuple[str, float]] = {}  # candidate_id -> (annotator, expiry)
        if self.path.exists():
            self._replay()

    def _replay(self) -> None:
        with open(self.path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                if row["kind"] == "candidate":
                    candidate = Candidate.from_dict(row["candidate"])
                    self._candidates[candidate.candidate_id] = candidate
                elif row["kind"] == "label":
                    self._remember(
                        Annotation(
                            candidate_id=row["candidate_id"],
                            label=Label(row["label"]),
                            annotator=row["annotator"],
                            created_at=float(row["created_at"]),
                            duration_seconds=row.get("duration_seconds"),
                            client_token=row.get("client_token"),
                        )
                    )
                else:
                    raise StoreError(f"unknown journal row kind {row['kind']!r}")

    def _remember(self, event: Annotation) -> None:
        self._history.setdefault(event.candidate_id, []).append(event)
        if event.client_token:
            self._events_by_token[event.client_token] = event

    def _append(self, row: dict) -> None:
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    def add_candidates(self, candidates: Iterable[Candidate]) -> int:
        """Register candidates; re-adding an identical candidate is a no-op,
        a conflicting one is an error. Returns how many were new."""
        added = 0
        with self._lock:
            for candidate in candidates:
                existing = self._candidates.get(candidate.candidate_id)
                if existing is not None:
                    if existing != candidate:
                        raise StoreError(
                            f"candidate {candidate.candidate_id!r} already registered "
                            "with different fields"
                        )
                    continue
                self._candidates[candidate.candidate_id] = candidate
                self._append({"kind": "candidate", "candidate": candidate.as_dict()})
                added += 1
        return added

    def candidate(self, candidate_id: str) -> Candidate:
        try:
            return self._candidates[candidate_id]
        except KeyError:
            raise StoreError(f"unknown candidate {candidate_id!r}") from None

    def candidates(self, query_id: str | None = None) -> list[Candidate]:
        out = [
            c
            for c in self._candidates.values()
            if query_id is None or c.query_id == query_id
        ]
        out.sort(key=lambda c: (c.query_id, c.rank))
        return out

    def query_ids(self) -> list[str]:
        return sorted({c.query_id for c in self._candidates.values()})

    def latest_label(self, candidate_id: str) -> Annotation | None:
        events = self._history.get(candidate_id)
        return events[-1] if events else None

    def history(self, candidate_id: str) -> list[Annotation]:
        return list(self._history.get(candidate_id, []))

    def _expire_leases(self, now: float) -> None:
        stale = [cid for cid, (_, expiry) in self._leases.items() if expiry <= now]
        for cid in stale:
            del self._leases[cid]

    def next_candidate(self, annotator: str) -> Candidate | None:
        """The lowest-rank unlabeled candidate not leased to someone else.

        Calling again while holding a live lease returns the same candidate,
        so a reloaded client does not skip ahead.
        """
        with self._lock:
            now = self.clock()
            self._expire_leases(now)
            for cid, (holder, _) in self._leases.items():
                if holder == annotator and cid not in self._history:
                    self._leases[cid] = (annotator, now + self.lease_seconds)
                    return self._candidates[cid]
            for candidate in sorted(
                self._candidates.values(), key=lambda c: (c.rank, c.query_id)
            ):
                if candidate.candidate_id in self._history:
                    continue
                if candidate.candidate_id in self._leases:
                    continue
                self._leases[candidate.candidate_id] = (
                    annotator,
                    now + self.lease_seconds,
                )
                return candidate
            return None

    def submit_label(
        self,
        candidate_id: str,
        label: Label | str,
        annotator: str,
        duration_seconds: float | None = None,
        client_token: str | None = None,
    ) -> Annotation:
        """Record a judgment. A repeated client_token returns the original
        event instead of double-recording a retried request."""
        label = Label(label)
        if duration_seconds is not None and duration_seconds < 0:
            raise StoreError("duration_seconds must be nonnegative")
        with self._lock:
            if client_token and client_token in self._events_by_token:
                return self._events_by_token[client_token]
            if candidate_id not in self._candidates:
                raise StoreError(f"unknown candidate {candidate_id!r}")
            event = Annotation(
                candidate_id=candidate_id,
                label=label,
                annotator=annotator,
                created_at=self.clock(),
                duration_seconds=duration_seconds,
                client_token=client_token,
            )
            self._append(event.as_dict())
            self._remember(event)
            self._leases.pop(candidate_id, None)
            return event

    def counts(self, query_id: str | None = None) -> dict:
        pool = self.candidates(query_id)
        by_label: dict[str, int] = {label.value: 0 for label in Label}
        labeled = 0
        for candidate in pool:
            event = self.latest_label(candidate.candidate_id)
            if event is not None:
                labeled += 1
                by_label[event.label.value] += 1
        return {"total": len(pool), "labeled": labeled, "by_label": by_label}

    def labels_for_query(self, query_id: str) -> list[Label]:
        out = []
        for candidate in self.candidates(query_id):
            event = self.latest_label(candidate.candidate_id)
            if event is not None:
                out.append(event.label)
        return out

    def export_annotations(self, query_id: str | None = None) -> list[dict]:
        """One row per labeled candidate, ordered by (query_id, rank):
        candidate fields joined with the latest label."""
        rows = []
        for candidate in self.candidates(query_id):
            event = self.latest_label(candidate.candidate_id)
            if event is None:
                continue
            row = candidate.as_dict()
            row["label"] = event.label.value
            row["annotator"] = event.annotator
            row["created_at"] = event.created_at
            row["duration_seconds"] = event.duration_seconds
            rows.append(row)
        return rows

    def import_annotations(self, rows: Iterable[Mapping]) -> int:
        """Load export-format rows into this store; inverse of export.

        Original timestamps are preserved so a round-trip is lossless.
        """
        count = 0
        for row in rows:
            candidate = Candidate.from_dict(row)
            self.add_candidates([candidate])
            event = Annotation(
                candidate_id=candidate.candidate_id,
                label=Label(row["label"]),
                annotator=row.get("annotator", ""),
                created_at=float(row.get("created_at", self.clock())),
                duration_seconds=row.get("duration_seconds"),
            )
            with self._lock:
                self._append(event.as_dict())
                self._remember(event)
            count += 1
        return count

    def compact(self) -> None:
        """Rewrite the journal as current candidates plus latest labels only."""
        with self._lock:
            tmp = self.path.with_suffix(self.path.suffix + ".tmp")
            with open(tmp, "w", encoding="utf-8") as handle:
                for candidate in self.candidates():
                    handle.write(
                        json.dumps(
                            {"kind": "candidate", "candidate": candidate.as_dict()},
                            ensure_ascii=False,
                            sort_keys=True,
                        )
                        + "\n"
                    )
                for candidate in self.candidates():
                    event = self.latest_label(candidate.candidate_id)
                    if event is not None:
                        handle.write(
                            json.dumps(event.as_dict(), ensure_ascii=False, sort_keys=True)
                            + "\n"
                        )
            tmp.replace(self.path)
            self._history = {
                cid: [events[-1]] for cid, events in self._history.items() if events
            }
