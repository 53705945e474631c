"""Summary statistics over exported annotation rows.

Rank correlations are Spearman with average ranks for ties, which matters
here because one side is always a 0/1 label indicator. The p-value uses the
t approximation, fine at the pool sizes this tool produces.

Export rows carry two rank notions: `rank` is the position in the full
deduped retrieval pool (drives the Top-5 / Top-20% / Top-50% windows), and
the local position within the annotated sample (drives the correlations,
computed here by sorting each query's rows).
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as sp_stats

from .annotate import Label, is_significant
from .corpus import DocumentRecord

FACET_TOP_N = 15

_WINDOWS = ("overall", "top5", "top20pct", "top50pct")


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks, ties sharing the mean of the positions they occupy."""
    a = np.asarray(values, dtype=np.float64)
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(len(a), dtype=np.float64)
    ordered = a[order]
    i = 0
    while i < len(a):
        j = i
        while j + 1 < len(a) and ordered[j + 1] == ordered[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    return ranks


def spearman_rho(
    indicator: Sequence[float], ranks: Sequence[float]
) -> tuple[float, float] | None:
    """(rho, two-sided p) or None when either side has no rank variance."""
    if len(indicator) != len(ranks):
        raise ValueError(f"length mismatch: {len(indicator)} vs {len(ranks)}")
    n = len(indicator)
    if n < 3:
        raise ValueError(f"need at least 3 pairs, got {n}")
    rx = average_ranks(indicator)
    ry = average_ranks(ranks)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    # single sqrt keeps rho exactly +/-1 when the rank vectors agree
    denom = float(np.sqrt(np.sum(dx * dx) * np.sum(dy * dy)))
    if denom == 0.0:
        return None
    rho = float(np.sum(dx * dy) / denom)
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        return rho, 0.0
    t = rho * np.sqrt((n - 2) / (1.0 - rho * rho))
    p = float(2.0 * sp_stats.t.sf(abs(t), n - 2))
    return rho, p


def _local_positions(rows: list[Mapping]) -> dict[str, list[tuple[Mapping, int]]]:
    """Per query: rows sorted by pool rank, paired with 1-based sample position."""
    by_query: dict[str, list[Mapping]] = {}
    for row in rows:
        by_query.setdefault(row["query_id"], []).append(row)
    out = {}
    for query_id, query_rows in by_query.items():
        ordered = sorted(query_rows, key=lambda r: r["rank"])
        out[query_id] = [(row, pos) for pos, row in enumerate(ordered, start=1)]
    return out


def _window_limit(window: str, pool_size: int) -> int:
    if window == "overall":
        return pool_size
    if window == "top5":
        return 5
    if window == "top20pct":
        return max(1, int(round(0.2 * pool_size)))
    if window == "top50pct":
        return max(1, int(round(0.5 * pool_size)))
    raise ValueError(f"unknown window {window!r}")


def category_table(rows: Iterable[Mapping], rho_mode: str = "pooled") -> list[dict]:
    """Table of label shares per rank window plus rank correlations.

    Window percentages are computed per query over pool ranks, then averaged
    across the queries that have labels in the window, so one huge pool
    cannot drown the others. Correlations pair each label's indicator with
    the local sample position; `rho_mode` selects pooled concatenation
    across queries or the mean of per-query coefficients.
    """
    if rho_mode not in ("pooled", "mean"):
        raise ValueError(f"rho_mode must be pooled or mean, got {rho_mode!r}")
    rows = list(rows)
    per_query = _local_positions(rows)
    table = []
    for label in Label:
        entry: dict = {"label": label.value}
        for window in _WINDOWS:
            shares = []
            for positioned in per_query.values():
                window_rows = [
                    row
                    for row, _ in positioned
                    if row["rank"] <= _window_limit(window, row["pool_size"])
                ]
                if not window_rows:
                    continue
                hits = sum(1 for row in window_rows if row["label"] == label.value)
                shares.append(100.0 * hits / len(window_rows))
            entry[f"{window}_pct"] = float(np.mean(shares)) if shares else None
        if rho_mode == "pooled":
            indicator: list[float] = []
            positions: list[float] = []
            for positioned in per_query.values():
                for row, pos in positioned:
                    indicator.append(1.0 if row["label"] == label.value else 0.0)
                    positions.append(float(pos))
            result = (
                spearman_rho(indicator, positions) if len(indicator) >= 3 else None
            )
        else:
            coefficients = []
            for positioned in per_query.values():
                if len(positioned) < 3:
                    continue
                indicator = [
                    1.0 if row["label"] == label.value else 0.0
                    for row, _ in positioned
                ]
                positions = [float(pos) for _, pos in positioned]
                got = spearman_rho(indicator, positions)
                if got is not None:
                    coefficients.append(got[0])
            result = (float(np.mean(coefficients)), None) if coefficients else None
        if result is None:
            entry["rho"] = None
            entry["p_value"] = None
        else:
            entry["rho"] = result[0]
            entry["p_value"] = result[1]
        entry["n"] = len(rows)
        table.append(entry)
    return table


def yield_curve(rows: Iterable[Mapping]) -> list[dict]:
    """Cumulative significant fraction by rank for one query's annotations.

    Don't-know rows are excluded from both sides of the fraction; a point is
    emitted at every annotated rank once the denominator is non-zero.
    """
    ordered = sorted(rows, key=lambda r: r["rank"])
    curve = []
    confident = 0
    significant = 0
    i = 0
    while i < len(ordered):
        rank = ordered[i]["rank"]
        while i < len(ordered) and ordered[i]["rank"] == rank:
            label = Label(ordered[i]["label"])
            if label is not Label.DONT_KNOW:
                confident += 1
                if is_significant(label):
                    significant += 1
            i += 1
        if confident == 0:
            continue
        curve.append(
            {
                "rank": rank,
                "cumulative_significant_fraction": significant / confident,
                "labeled": confident,
            }
        )
    return curve


def _decade(record: DocumentRecord | None) -> str:
    if record is None or record.year is None:
        return "unknown"
    return str((record.year // 10) * 10)


def _facet_value(record: DocumentRecord | None, facet: str) -> str:
    if facet == "decade":
        return _decade(record)
    if facet in ("author", "genre"):
        value = getattr(record, facet, "") if record is not None else ""
        return value if value else "unknown"
    raise ValueError(f"unknown facet {facet!r}")


def facet_counts(
    rows: Iterable[Mapping],
    records_by_doc: Mapping[str, DocumentRecord],
    facet: str,
    top_n: int = FACET_TOP_N,
) -> list[dict]:
    """Label counts per facet value, truncated to the `top_n` values by
    total count (ties broken by name)."""
    buckets: dict[str, dict[str, int]] = {}
    for row in rows:
        value = _facet_value(records_by_doc.get(row["doc_id"]), facet)
        bucket = buckets.setdefault(value, {label.value: 0 for label in Label})
        bucket[row["label"]] += 1
    ordered = sorted(
        buckets.items(), key=lambda kv: (-sum(kv[1].values()), kv[0])
    )[:top_n]
    return [
        {"value": value, "total": sum(counts.values()), "counts": counts}
        for value, counts in ordered
    ]


def work_level_comparison(
    rows: Iterable[Mapping], lexical_works: Iterable[str]
) -> dict:
    """Distinct works surfaced by annotation vs. by lexical overlap alone."""
    significant_works = {
        row["work_id"]
        for row in rows
        if row["work_id"] and is_significant(Label(row["label"]))
    }
    return {
        "significant_works": len(significant_works),
        "lexical_works": len(set(lexical_works)),
    }


def median_duration(rows: Iterable[Mapping]) -> float | None:
    durations = [
        float(row["duration_seconds"])
        for row in rows
        if row.get("duration_seconds") is not None
    ]
    if not durations:
        return None
    return float(np.median(durations))


def write_rows_csv(rows: Iterable[Mapping], path: Path | str) -> int:
    rows = list(rows)
    fields = [
        "candidate_id",
        "query_id",
        "rank",
        "pool_size",
        "chunk_id",
        "doc_id",
        "work_id",
        "score",
        "label",
        "annotator",
        "duration_seconds",
        "created_at",
    ]
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return len(rows)


def write_category_csv(table: list[dict], path: Path | str) -> None:
    fields = ["label", "overall_pct", "top5_pct", "top20pct_pct", "top50pct_pct",
              "rho", "p_value", "n"]
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields)
        writer.writeheader()
        for row in table:
            writer.writerow(row)


def _fmt(value, width: int = 7) -> str:
    if value is None:
        return " " * (width - 4) + "n/a "
    return f"{value:{width}.1f} "


def render_category_table(table: list[dict]) -> str:
    lines = [
        f"{'label':<14}{'overall':>8}{'top-5':>8}{'top-20%':>9}{'top-50%':>9}"
        f"{'rho':>9}{'p':>11}"
    ]
    for row in table:
        rho = "     n/a" if row["rho"] is None else f"{row['rho']:+8.3f}"
        p = "       n/a" if row["p_value"] is None else f"{row['p_value']:10.2e}"
        lines.append(
            f"{row['label']:<14}"
            + _fmt(row["overall_pct"])
            + _fmt(row["top5_pct"])
            + _fmt(row["top20pct_pct"], 8)
            + _fmt(row["top50pct_pct"], 8)
            + rho
            + p
        )
    return "\n".join(lines) + "\n"


def render_report(report: Mapping) -> str:
    lines = []
    lines.append(f"annotations: {report['n_annotations']}")
    if report.get("median_duration_seconds") is not None:
        lines.append(
            f"median seconds per judgment: {report['median_duration_seconds']:.1f}"
        )
    recall = report.get("pooled_lexical_recall")
    lines.append(
        "lexical recall of retrieval: "
        + (f"{recall:.3f}" if recall is not None else "undefined")
    )
    lines.append("")
    lines.append("label share by rank window (mean % across queries)")
    lines.append(render_category_table(report.get("category_table", [])).rstrip("\n"))
    work = report.get("work_level", {})
    if work:
        lines.append("")
        lines.append(
            f"works surfaced: {work['significant_works']} by annotation, "
            f"{work['lexical_works']} by lexical overlap"
        )
    deepening = report.get("deepening", {})
    if deepening:
        lines.append("")
        lines.append("triage decisions")
        for query_id, cell in sorted(deepening.items()):
            density = (
                f"{cell['density']:.2f}" if cell["density"] is not None else "n/a"
            )
            lines.append(f"  {query_id}  density={density}  {cell['decision']}")
    facets = report.get("facets", {})
    if facets:
        lines.append("")
        lines.append("labeled hits by facet (total counts)")
        for facet in ("author", "genre", "decade"):
            if facets.get(facet):
                top = ", ".join(
                    f"{cell['value']} ({cell['total']})" for cell in facets[facet][:5]
                )
                lines.append(f"  {facet}: {top}")
    return "\n".join(lines) + "\n"
