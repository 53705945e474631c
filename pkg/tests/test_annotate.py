from __future__ import annotations

import pytest

from semrec.annotate import (
    AnnotationStore,
    Candidate,
    Label,
    StoreError,
    enqueue_candidates,
    is_significant,
    make_candidate,
)
from semrec.index import RankedHit
from semrec.sampling import exhaustive_plan


class FakeClock:
    def __init__(self, start: float = 1000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += seconds


def _candidate(rank: int, query="q1", **extra) -> Candidate:
    fields = dict(
        candidate_id=f"{query}:{rank}",
        query_id=query,
        quote_text="the quote",
        chunk_id=f"d{rank}#0",
        text=f"chunk {rank}",
        doc_id=f"d{rank}",
        work_id=f"w{rank}",
        rank=rank,
        pool_size=10,
        score=1.0 - rank * 0.01,
    )
    fields.update(extra)
    return Candidate(**fields)


def _store(tmp_path, clock=None, **kwargs) -> AnnotationStore:
    return AnnotationStore(tmp_path / "journal.jsonl", clock=clock or FakeClock(),
                           **kwargs)


def test_significance_covers_exactly_two_labels():
    assert is_significant(Label.PARAPHRASE)
    assert is_significant(Label.MEANING_MATCH)
    assert not is_significant(Label.TOPICAL_MATCH)
    assert not is_significant(Label.NO_MATCH)
    assert not is_significant(Label.DONT_KNOW)


def test_candidate_ids_join_query_and_rank_without_padding():
    hit = RankedHit(query_id="q2", chunk_id="c#0", doc_id="d", work_id="w",
                    score=0.9, rank=12)
    assert make_candidate(hit, pool_size=50).candidate_id == "q2:12"


def test_next_candidate_walks_rank_order_and_leases(tmp_path):
    clock = FakeClock()
    store = _store(tmp_path, clock)
    store.add_candidates([_candidate(2), _candidate(1), _candidate(3)])
    first = store.next_candidate("alice")
    assert first.rank == 1
    # same annotator asking again gets the same lease back
    assert store.next_candidate("alice").candidate_id == first.candidate_id
    # another annotator skips the leased candidate
    assert store.next_candidate("bob").rank == 2


def test_leases_expire_after_the_window(tmp_path):
    clock = FakeClock()
    store = _store(tmp_path, clock, lease_seconds=600.0)
    store.add_candidates([_candidate(1)])
    assert store.next_candidate("alice").rank == 1
    clock.advance(599.0)
    assert store.next_candidate("bob") is None
    clock.advance(2.0)
    assert store.next_candidate("bob").rank == 1


def test_submit_clears_lease_and_counts(tmp_path):
    store = _store(tmp_path)
    store.add_candidates([_candidate(1), _candidate(2)])
    got = store.next_candidate("alice")
    store.submit_label(got.candidate_id, Label.PARAPHRASE, annotator="alice",
                       duration_seconds=4.5)
    counts = store.counts("q1")
    assert counts["labeled"] == 1
    assert counts["by_label"]["paraphrase"] == 1
    assert store.next_candidate("alice").rank == 2


def test_relabeling_keeps_history_and_latest_wins(tmp_path):
    store = _store(tmp_path)
    store.add_candidates([_candidate(1)])
    store.submit_label("q1:1", Label.NO_MATCH, annotator="a")
    store.submit_label("q1:1", Label.PARAPHRASE, annotator="b")
    assert store.latest_label("q1:1").label is Label.PARAPHRASE
    assert [e.label for e in store.history("q1:1")] == [
        Label.NO_MATCH, Label.PARAPHRASE,
    ]


def test_client_token_makes_submission_idempotent(tmp_path):
    store = _store(tmp_path)
    store.add_candidates([_candidate(1)])
    first = store.submit_label("q1:1", Label.PARAPHRASE, annotator="a",
                               client_token="tok-1")
    replay = store.submit_label("q1:1", Label.NO_MATCH, annotator="a",
                                client_token="tok-1")
    assert replay == first
    assert store.latest_label("q1:1").label is Label.PARAPHRASE
    assert len(store.history("q1:1")) == 1


def test_submit_validates_inputs(tmp_path):
    store = _store(tmp_path)
    store.add_candidates([_candidate(1)])
    with pytest.raises(StoreError, match="unknown candidate"):
        store.submit_label("q1:99", Label.NO_MATCH, annotator="a")
    with pytest.raises(StoreError, match="nonnegative"):
        store.submit_label("q1:1", Label.NO_MATCH, annotator="a",
                           duration_seconds=-1.0)
    with pytest.raises(ValueError):
        store.submit_label("q1:1", "lexical_match", annotator="a")


def test_journal_replay_restores_state(tmp_path):
    clock = FakeClock()
    path = tmp_path / "journal.jsonl"
    store = AnnotationStore(path, clock=clock)
    store.add_candidates([_candidate(1), _candidate(2)])
    store.submit_label("q1:1", Label.MEANING_MATCH, annotator="a",
                       duration_seconds=7.0, client_token="t1")
    again = AnnotationStore(path, clock=clock)
    assert again.counts("q1")["labeled"] == 1
    assert again.latest_label("q1:1").label is Label.MEANING_MATCH
    # token replay survives restarts
    replay = again.submit_label("q1:1", Label.NO_MATCH, annotator="a",
                                client_token="t1")
    assert replay.label is Label.MEANING_MATCH


def test_re_adding_candidates_is_idempotent_but_conflicts_fail(tmp_path):
    store = _store(tmp_path)
    assert store.add_candidates([_candidate(1)]) == 1
    assert store.add_candidates([_candidate(1)]) == 0
    with pytest.raises(StoreError, match="different fields"):
        store.add_candidates([_candidate(1, score=0.123)])


def test_export_joins_candidates_with_latest_labels(tmp_path):
    store = _store(tmp_path)
    store.add_candidates([_candidate(2), _candidate(1)])
    store.submit_label("q1:2", Label.TOPICAL_MATCH, annotator="a",
                       duration_seconds=3.0)
    rows = store.export_annotations()
    assert len(rows) == 1
    row = rows[0]
    assert row["candidate_id"] == "q1:2"
    assert row["label"] == "topical_match"
    assert row["quote_text"] == "the quote"
    assert row["duration_seconds"] == 3.0


def test_import_then_export_round_trips(tmp_path):
    store = _store(tmp_path)
    store.add_candidates([_candidate(1), _candidate(2)])
    store.submit_label("q1:1", Label.PARAPHRASE, annotator="a",
                       duration_seconds=2.0)
    store.submit_label("q1:2", Label.DONT_KNOW, annotator="b")
    rows = store.export_annotations()
    other = AnnotationStore(tmp_path / "other.jsonl", clock=FakeClock(5000.0))
    other.add_candidates([_candidate(1), _candidate(2)])
    assert other.import_annotations(rows) == 2
    assert other.export_annotations() == rows


def test_compact_drops_history_but_keeps_latest(tmp_path):
    path = tmp_path / "journal.jsonl"
    store = AnnotationStore(path, clock=FakeClock())
    store.add_candidates([_candidate(1)])
    for label in (Label.NO_MATCH, Label.TOPICAL_MATCH, Label.PARAPHRASE):
        store.submit_label("q1:1", label, annotator="a")
    before = path.stat().st_size
    store.compact()
    assert path.stat().st_size < before
    again = AnnotationStore(path, clock=FakeClock())
    assert again.latest_label("q1:1").label is Label.PARAPHRASE
    assert len(again.history("q1:1")) == 1


def test_enqueue_candidates_resolves_plan_ranks(tmp_path):
    hits = [
        RankedHit(query_id="q1", chunk_id=f"c{r}", doc_id=f"d{r}",
                  work_id=f"w{r}", score=1.0 - r * 0.01, rank=r)
        for r in range(1, 6)
    ]
    plan = exhaustive_plan(5, "q1")
    out = enqueue_candidates(plan, hits, text_by_chunk={"c1": "first chunk"})
    assert [c.rank for c in out] == [1, 2, 3, 4, 5]
    assert out[0].text == "first chunk"
    assert out[0].pool_size == 5
    short_plan = exhaustive_plan(9, "q1")
    with pytest.raises(StoreError, match="rank 6"):
        enqueue_candidates(short_plan, hits)
