from __future__ import annotations

import math
import random

import pytest
from scipy import stats as sp_stats

from semrec.stats import (
    average_ranks,
    category_table,
    facet_counts,
    median_duration,
    spearman_rho,
    work_level_comparison,
    yield_curve,
)
from semrec.corpus import DocumentRecord


def test_average_ranks_share_tied_positions():
    assert list(average_ranks([10, 20, 20, 30])) == [1.0, 2.5, 2.5, 4.0]
    assert list(average_ranks([5, 5, 5])) == [2.0, 2.0, 2.0]


@pytest.mark.filterwarnings("ignore::scipy.stats.ConstantInputWarning")
def test_spearman_matches_scipy_on_random_instances():
    rng = random.Random(42)
    for trial in range(300):
        n = rng.randint(3, 40)
        # indicator-like x against positions, with ties on both sides
        x = [float(rng.randint(0, 1)) for _ in range(n)]
        y = [float(rng.randint(1, max(2, n // 2))) for _ in range(n)]
        got = spearman_rho(x, y)
        expected = sp_stats.spearmanr(x, y)
        if math.isnan(expected.statistic):
            assert got is None, f"trial {trial}"
            continue
        assert got is not None, f"trial {trial}"
        rho, p = got
        assert rho == pytest.approx(expected.statistic, abs=1e-9)
        if abs(rho) < 1.0:
            assert p == pytest.approx(expected.pvalue, abs=1e-9)


def test_spearman_perfect_correlation_has_zero_p():
    rho, p = spearman_rho([1, 2, 3, 4], [10, 20, 30, 40])
    assert rho == 1.0
    assert p == 0.0
    rho, p = spearman_rho([1, 2, 3, 4], [8, 6, 4, 2])
    assert rho == -1.0
    assert p == 0.0


def test_spearman_rejects_short_or_mismatched_input():
    with pytest.raises(ValueError):
        spearman_rho([1, 2], [1, 2])
    with pytest.raises(ValueError):
        spearman_rho([1, 2, 3], [1, 2])
    assert spearman_rho([1, 1, 1], [1, 2, 3]) is None


def _row(query, rank, pool, label, doc="d", work="w", duration=None):
    return {
        "candidate_id": f"{query}:{rank}",
        "query_id": query,
        "rank": rank,
        "pool_size": pool,
        "doc_id": doc,
        "work_id": work,
        "label": label,
        "duration_seconds": duration,
    }


def test_category_table_window_percentages():
    # one query, pool of 10, fully annotated: significant at ranks 1-2
    rows = [
        _row("q1", r, 10, "paraphrase" if r <= 2 else "no_match")
        for r in range(1, 11)
    ]
    table = {cell["label"]: cell for cell in category_table(rows)}
    para = table["paraphrase"]
    assert para["overall_pct"] == pytest.approx(20.0)
    assert para["top5_pct"] == pytest.approx(40.0)
    # top-20% of a pool of 10 is ranks 1-2; both are paraphrase
    assert para["top20pct_pct"] == pytest.approx(100.0)
    assert para["top50pct_pct"] == pytest.approx(40.0)
    assert table["no_match"]["overall_pct"] == pytest.approx(80.0)
    assert table["dont_know"]["overall_pct"] == 0.0
    # concentration at the top gives a negative rank correlation
    assert para["rho"] < 0
    assert 0.0 <= para["p_value"] <= 1.0


def test_category_table_averages_across_queries():
    rows = [_row("q1", r, 4, "paraphrase" if r == 1 else "no_match")
            for r in range(1, 5)]
    rows += [_row("q2", r, 4, "paraphrase") for r in range(1, 5)]
    table = {cell["label"]: cell for cell in category_table(rows)}
    # per-query overall shares are 25% and 100%; the mean is 62.5%
    assert table["paraphrase"]["overall_pct"] == pytest.approx(62.5)


def test_category_table_rho_uses_local_positions():
    # sampled ranks are sparse (100, 200, ...) but positions are 1..n
    rows = [
        _row("q1", rank, 10000, "meaning_match" if i < 3 else "no_match")
        for i, rank in enumerate((100, 200, 400, 800, 1600, 3200))
    ]
    table = {cell["label"]: cell for cell in category_table(rows)}
    expected = sp_stats.spearmanr([1, 1, 1, 0, 0, 0], [1, 2, 3, 4, 5, 6])
    assert table["meaning_match"]["rho"] == pytest.approx(
        expected.statistic, abs=1e-9
    )


def test_category_table_mean_mode_averages_per_query_rhos():
    rows = [_row("q1", r, 6, "paraphrase" if r <= 3 else "no_match")
            for r in range(1, 7)]
    rows += [_row("q2", r, 6, "paraphrase" if r > 3 else "no_match")
             for r in range(1, 7)]
    pooled = {c["label"]: c for c in category_table(rows, rho_mode="pooled")}
    mean = {c["label"]: c for c in category_table(rows, rho_mode="mean")}
    # the two queries cancel in mean mode
    assert mean["paraphrase"]["rho"] == pytest.approx(0.0)
    assert mean["paraphrase"]["p_value"] is None
    assert pooled["paraphrase"]["rho"] == pytest.approx(0.0)
    with pytest.raises(ValueError):
        category_table(rows, rho_mode="median")


def test_yield_curve_accumulates_and_skips_dont_know():
    rows = [
        _row("q1", 1, 10, "paraphrase"),
        _row("q1", 2, 10, "dont_know"),
        _row("q1", 3, 10, "no_match"),
        _row("q1", 4, 10, "meaning_match"),
    ]
    curve = yield_curve(rows)
    # the dont_know at rank 2 moves neither side of the fraction
    assert [c["rank"] for c in curve] == [1, 2, 3, 4]
    assert [c["cumulative_significant_fraction"] for c in curve] == [
        1.0, 1.0, 0.5, pytest.approx(2 / 3)
    ]
    assert curve[-1]["labeled"] == 3


def test_yield_curve_waits_for_first_confident_label():
    rows = [_row("q1", 1, 10, "dont_know"), _row("q1", 2, 10, "no_match")]
    curve = yield_curve(rows)
    assert [c["rank"] for c in curve] == [2]


def _records():
    return {
        "d1": DocumentRecord(doc_id="d1", work_id="w1", text="x",
                             author="Hale", genre="essay", year=1712),
        "d2": DocumentRecord(doc_id="d2", work_id="w2", text="x",
                             author="Prynne", genre="sermon", year=1718),
        "d3": DocumentRecord(doc_id="d3", work_id="w3", text="x",
                             author="Hale", genre="essay"),
    }


def test_facet_counts_by_author_genre_and_decade():
    rows = [
        _row("q1", 1, 10, "paraphrase", doc="d1"),
        _row("q1", 2, 10, "no_match", doc="d2"),
        _row("q1", 3, 10, "paraphrase", doc="d3"),
        _row("q1", 4, 10, "no_match", doc="missing"),
    ]
    by_author = facet_counts(rows, _records(), "author")
    assert by_author[0]["value"] == "Hale"
    assert by_author[0]["total"] == 2
    assert by_author[0]["counts"]["paraphrase"] == 2
    by_decade = facet_counts(rows, _records(), "decade")
    assert {cell["value"] for cell in by_decade} == {"1710", "unknown"}
    unknown = next(c for c in by_decade if c["value"] == "unknown")
    assert unknown["total"] == 2  # d3 has no year, "missing" has no record
    with pytest.raises(ValueError):
        facet_counts(rows, _records(), "publisher")


def test_facet_counts_truncates_to_top_n_by_total_then_name():
    rows = []
    records = {}
    for i in range(20):
        doc = f"d{i}"
        records[doc] = DocumentRecord(doc_id=doc, work_id=doc, text="x",
                                      author=f"a{i:02d}")
        rows.append(_row("q1", i + 1, 30, "no_match", doc=doc))
    table = facet_counts(rows, records, "author", top_n=5)
    assert len(table) == 5
    # all totals equal, so the name breaks the tie
    assert [c["value"] for c in table] == ["a00", "a01", "a02", "a03", "a04"]


def test_work_level_comparison_counts_distinct_works():
    rows = [
        _row("q1", 1, 10, "paraphrase", work="wa"),
        _row("q1", 2, 10, "meaning_match", work="wa"),
        _row("q2", 1, 10, "paraphrase", work="wb"),
        _row("q2", 2, 10, "topical_match", work="wc"),
    ]
    result = work_level_comparison(rows, lexical_works=["wa", "wx"])
    assert result == {"significant_works": 2, "lexical_works": 2}


def test_median_duration_ignores_missing_values():
    rows = [
        _row("q1", 1, 10, "no_match", duration=4.0),
        _row("q1", 2, 10, "no_match", duration=10.0),
        _row("q1", 3, 10, "no_match"),
    ]
    assert median_duration(rows) == 7.0
    assert median_duration([_row("q1", 1, 10, "no_match")]) is None
