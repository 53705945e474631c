"""Rank-sampling plans for annotation, and the deepen-or-stop rule.

Three budgets:

  pilot       five top ranks plus 45 evenly spaced probes across the top 90%
              of the pool; spends 50 judgments to sketch the whole curve
  triage      the top twenty ranks plus every sixth rank out to 195; spends
              50 judgments concentrated where density usually lives
  exhaustive  every rank down to 200

`decide_deepening` turns a triage read into a go/no-go call for the
exhaustive pass.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping

from .annotate import Label, is_significant

logger = logging.getLogger(__name__)

DEEPEN_THRESHOLD = 0.5
PILOT_HEAD = 5
PILOT_PROBES = 45
TRIAGE_HEAD = 20
TRIAGE_STRIDE = 6
TRIAGE_PROBES = 30
EXHAUSTIVE_DEPTH = 200


@dataclass(frozen=True)
class PlanEntry:
    rank: int
    reason: str  # "top" or "interval"


@dataclass(frozen=True)
class SamplingPlan:
    query_id: str
    stage: str
    entries: tuple[PlanEntry, ...]

    @property
    def ranks(self) -> list[int]:
        return [entry.rank for entry in self.entries]

    def as_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "stage": self.stage,
            "entries": [[entry.rank, entry.reason] for entry in self.entries],
        }


def plan_from_dict(row: Mapping) -> SamplingPlan:
    return SamplingPlan(
        query_id=row["query_id"],
        stage=row["stage"],
        entries=tuple(PlanEntry(int(rank), reason) for rank, reason in row["entries"]),
    )


def pilot_plan(pool_size: int, query_id: str = "") -> SamplingPlan:
    """Head ranks plus evenly spaced probes over the top 90% of the pool.

    Probe targets that collide after rounding slide up to the next free rank
    (or down when the top of the range is full), so the plan always spends
    its full budget on distinct ranks when the pool allows it.
    """
    if pool_size < 1:
        raise ValueError(f"pool_size must be >= 1, got {pool_size}")
    if pool_size < PILOT_HEAD + PILOT_PROBES:
        logger.warning(
            "pool of %d is smaller than the pilot budget of %d; taking every rank",
            pool_size,
            PILOT_HEAD + PILOT_PROBES,
        )
        entries = [
            PlanEntry(rank, "top" if rank <= PILOT_HEAD else "interval")
            for rank in range(1, pool_size + 1)
        ]
        return SamplingPlan(query_id, "pilot", tuple(entries))
    taken = set(range(1, PILOT_HEAD + 1))
    entries = [PlanEntry(rank, "top") for rank in sorted(taken)]
    ceiling = round(0.9 * pool_size)
    span = ceiling - PILOT_HEAD
    for i in range(1, PILOT_PROBES + 1):
        target = round(PILOT_HEAD + i * span / PILOT_PROBES)
        rank = target
        while rank in taken and rank < pool_size:
            rank += 1
        if rank in taken:
            rank = target
            while rank in taken:
                rank -= 1
        taken.add(rank)
        entries.append(PlanEntry(rank, "interval"))
    entries.sort(key=lambda e: e.rank)
    return SamplingPlan(query_id, "pilot", tuple(entries))


def triage_plan(pool_size: int, query_id: str = "") -> SamplingPlan:
    """Top twenty ranks, then every sixth rank out to 195."""
    deepest = TRIAGE_HEAD + 1 + TRIAGE_STRIDE * (TRIAGE_PROBES - 1)
    if pool_size < EXHAUSTIVE_DEPTH:
        raise ValueError(
            f"triage needs a pool of at least {EXHAUSTIVE_DEPTH}, got {pool_size}"
        )
    entries = [PlanEntry(rank, "top") for rank in range(1, TRIAGE_HEAD + 1)]
    entries.extend(
        PlanEntry(TRIAGE_HEAD + 1 + TRIAGE_STRIDE * k, "interval")
        for k in range(TRIAGE_PROBES)
    )
    assert entries[-1].rank == deepest
    return SamplingPlan(query_id, "triage", tuple(entries))


def exhaustive_plan(pool_size: int, query_id: str = "") -> SamplingPlan:
    if pool_size < 1:
        raise ValueError(f"pool_size must be >= 1, got {pool_size}")
    depth = min(EXHAUSTIVE_DEPTH, pool_size)
    entries = tuple(PlanEntry(rank, "top") for rank in range(1, depth + 1))
    return SamplingPlan(query_id, "exhaustive", entries)


def auto_plan(pool_size: int, query_id: str = "") -> SamplingPlan:
    """Triage when the pool is deep enough for it, otherwise exhaustive."""
    if pool_size >= EXHAUSTIVE_DEPTH:
        return triage_plan(pool_size, query_id)
    return exhaustive_plan(pool_size, query_id)


@dataclass(frozen=True)
class DeepeningDecision:
    density: float | None
    deepen: bool


def decide_deepening(
    labels: Iterable[Label], threshold: float = DEEPEN_THRESHOLD
) -> DeepeningDecision:
    """Deepen when significant labels reach `threshold` of the confident ones.

    Don't-know judgments drop out of the denominator: they carry no evidence
    either way. A query with nothing but don't-knows cannot justify the
    exhaustive spend, so it stops.
    """
    total = 0
    significant = 0
    unsure = 0
    for label in labels:
        total += 1
        if label is Label.DONT_KNOW:
            unsure += 1
        elif is_significant(label):
            significant += 1
    confident = total - unsure
    if confident == 0:
        if total:
            logger.warning(
                "all %d judgments are don't-know; stopping by default", total
            )
        return DeepeningDecision(density=None, deepen=False)
    density = significant / confident
    return DeepeningDecision(density=density, deepen=density >= threshold)
