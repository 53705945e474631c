"""Lightweight linguistic profiling of quotes and retrieved chunks.

Everything here runs offline from two bundled resources: a small English
lexicon with coarse part-of-speech tags, and per-language stopword lists.
The tagger is deliberately simple (lexicon lookup, then suffix heuristics);
it exists to compare distributions between a quote and its hits, not to be
right about any single token.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .annotate import Label, is_significant
from .corpus import DocumentRecord, tokenize

logger = logging.getLogger(__name__)

POS_TAGS = (
    "NOUN", "VERB", "ADJ", "ADV", "PRON", "DET",
    "ADP", "NUM", "CONJ", "PRT", "PUNCT", "X",
)

LANGUAGES = ("en", "fr", "la", "it", "es")

TOP_BAND = 0.30
TAIL_BAND = (0.60, 0.90)
QUADRANTS = ("TopP", "TopN", "TailP", "TailN")
FEATURES = ("vocab_sim", "quote_oov", "hit_oov", "pos_div")

_ADV_SUFFIXES = ("ly",)
_VERB_SUFFIXES = ("ing", "ed", "ize", "ise", "ify", "ate", "eth", "est")
_ADJ_SUFFIXES = ("ous", "ful", "less", "ive", "able", "ible", "ish", "al", "ic")
_NOUN_SUFFIXES = (
    "tion", "sion", "ment", "ness", "ity", "ism",
    "ance", "ence", "ship", "hood", "ist", "er", "or",
)


def _read_data(name: str) -> str:
    return resources.files("semrec").joinpath("data", name).read_text("utf-8")


@lru_cache(maxsize=1)
def load_lexicon() -> dict[str, str]:
    lexicon = {}
    for line in _read_data("english_lexicon.txt").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, tag = line.split()
        lexicon[word] = tag
    return lexicon


@lru_cache(maxsize=1)
def stopword_profiles() -> dict[str, frozenset[str]]:
    return {
        lang: frozenset(_read_data(f"stopwords_{lang}.txt").split())
        for lang in LANGUAGES
    }


def lemmatize(token: str) -> str:
    """Strip a few productive English suffixes. Crude on purpose: it only
    has to merge inflections of the same stem, not produce real lemmas."""
    t = token.lower()
    if t.endswith("ing") and len(t) >= 6:
        return t[:-3]
    if t.endswith("ed") and len(t) >= 5:
        return t[:-2]
    if t.endswith("es") and len(t) >= 5:
        return t[:-2]
    if t.endswith("s") and not t.endswith("ss") and len(t) >= 4:
        return t[:-1]
    return t


class Annotator(Protocol):
    def tag(self, token: str) -> str: ...


class BaselineAnnotator:
    """Part-of-speech tagger backed by the bundled lexicon plus suffix
    heuristics. Unknown words default to NOUN, the most common open class."""

    def __init__(self, lexicon: Mapping[str, str] | None = None):
        self.lexicon = dict(lexicon) if lexicon is not None else load_lexicon()

    def tag(self, token: str) -> str:
        if not any(c.isalnum() for c in token):
            return "PUNCT"
        if any(c.isdigit() for c in token):
            return "NUM"
        t = token.lower()
        got = self.lexicon.get(t)
        if got is not None:
            return got
        got = self.lexicon.get(lemmatize(t))
        if got is not None:
            return got
        if len(t) == 1:
            return "X"
        for suffix in _ADV_SUFFIXES:
            if t.endswith(suffix) and len(t) > len(suffix) + 2:
                return "ADV"
        for suffix in _VERB_SUFFIXES:
            if t.endswith(suffix) and len(t) > len(suffix) + 2:
                return "VERB"
        for suffix in _ADJ_SUFFIXES:
            if t.endswith(suffix) and len(t) > len(suffix) + 2:
                return "ADJ"
        for suffix in _NOUN_SUFFIXES:
            if t.endswith(suffix) and len(t) > len(suffix) + 2:
                return "NOUN"
        return "NOUN"


@lru_cache(maxsize=1)
def default_annotator() -> BaselineAnnotator:
    return BaselineAnnotator()


@dataclass(frozen=True)
class LinguisticProfile:
    """Summary of one text: lemma counts of its alphabetic tokens, a
    distribution over coarse part-of-speech tags, and how many of those
    tokens fell outside the reference vocabulary."""

    token_count: int
    oov_count: int
    lemma_counts: Mapping[str, int] = field(default_factory=dict)
    pos_distribution: Mapping[str, float] = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return sum(self.pos_distribution.values()) <= 0.0

    @property
    def lemma_set(self) -> frozenset[str]:
        return frozenset(self.lemma_counts)


def profile(
    text: str,
    annotator: Annotator | None = None,
    vocabulary: Iterable[str] | None = None,
) -> LinguisticProfile:
    if annotator is None:
        annotator = default_annotator()
    if vocabulary is None:
        vocab = frozenset(load_lexicon())
    else:
        vocab = frozenset(v.lower() for v in vocabulary)
    lemma_counts: dict[str, int] = {}
    pos_counts = {tag: 0 for tag in POS_TAGS}
    token_count = 0
    oov = 0
    for token in tokenize(text):
        tag = annotator.tag(token)
        if tag not in pos_counts:
            raise ValueError(f"annotator produced unknown tag {tag!r}")
        pos_counts[tag] += 1
        if not any(c.isalpha() for c in token):
            continue
        token_count += 1
        t = token.lower()
        lemma = lemmatize(t)
        lemma_counts[lemma] = lemma_counts.get(lemma, 0) + 1
        if t not in vocab and lemma not in vocab:
            oov += 1
    total = sum(pos_counts.values())
    distribution = {
        tag: (count / total if total else 0.0) for tag, count in pos_counts.items()
    }
    return LinguisticProfile(
        token_count=token_count,
        oov_count=oov,
        lemma_counts=lemma_counts,
        pos_distribution=distribution,
    )


def oov_rate(p: LinguisticProfile) -> float | None:
    """Percentage of alphabetic tokens outside the reference vocabulary,
    or None for a text with no alphabetic tokens."""
    if p.token_count == 0:
        return None
    return 100.0 * p.oov_count / p.token_count


def _lemmas(value: LinguisticProfile | Iterable[str]) -> frozenset[str]:
    if isinstance(value, LinguisticProfile):
        return value.lemma_set
    return frozenset(value)


def vocab_jaccard(
    a: LinguisticProfile | Iterable[str], b: LinguisticProfile | Iterable[str]
) -> float:
    """Jaccard similarity of lemma sets; two empty sets count as 0.0."""
    sa, sb = _lemmas(a), _lemmas(b)
    union = sa | sb
    if not union:
        return 0.0
    return len(sa & sb) / len(union)


def _as_distribution(
    value: LinguisticProfile | Mapping[str, float] | Sequence[float],
) -> np.ndarray | None:
    if isinstance(value, LinguisticProfile):
        if value.degenerate:
            return None
        return np.array(
            [value.pos_distribution.get(tag, 0.0) for tag in POS_TAGS],
            dtype=np.float64,
        )
    if isinstance(value, Mapping):
        unknown = set(value) - set(POS_TAGS)
        if unknown:
            raise ValueError(f"unknown tags in distribution: {sorted(unknown)}")
        arr = np.array([value.get(tag, 0.0) for tag in POS_TAGS], dtype=np.float64)
    else:
        arr = np.asarray(list(value), dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("distribution has negative mass")
    total = arr.sum()
    if total <= 0:
        return None
    return arr / total


def _entropy(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def pos_jsd(
    a: LinguisticProfile | Mapping[str, float] | Sequence[float],
    b: LinguisticProfile | Mapping[str, float] | Sequence[float],
) -> float | None:
    """Jensen-Shannon divergence (base 2, so in [0, 1]) between two tag
    distributions. Returns None when either side has no mass."""
    pa = _as_distribution(a)
    pb = _as_distribution(b)
    if pa is None or pb is None:
        return None
    if len(pa) != len(pb):
        raise ValueError(f"length mismatch: {len(pa)} vs {len(pb)}")
    m = 0.5 * (pa + pb)
    jsd = _entropy(m) - 0.5 * (_entropy(pa) + _entropy(pb))
    return float(min(1.0, max(0.0, jsd)))


def detect_language(text: str) -> str:
    """Pick the language whose stopword list covers the largest share of
    tokens. English wins exact ties; no coverage at all reads as unknown."""
    tokens = [t.lower() for t in tokenize(text) if any(c.isalpha() for c in t)]
    if not tokens:
        return "unknown"
    profiles = stopword_profiles()
    best_lang = "unknown"
    best_share = 0.0
    for lang in LANGUAGES:
        share = sum(1 for t in tokens if t in profiles[lang]) / len(tokens)
        if share > best_share:
            best_lang, best_share = lang, share
    return best_lang


def document_language(record: DocumentRecord) -> str:
    if record.declared_language:
        return record.declared_language
    return detect_language(record.text)


def corpus_language_baseline(
    records: Iterable[DocumentRecord],
) -> dict[str, float]:
    """Share of corpus tokens per declared language, in percent."""
    weights: dict[str, int] = {}
    for record in records:
        lang = document_language(record)
        weights[lang] = weights.get(lang, 0) + len(tokenize(record.text))
    total = sum(weights.values())
    if total == 0:
        return {}
    return {lang: 100.0 * w / total for lang, w in sorted(weights.items())}


def language_distribution(
    rows: Iterable[Mapping],
    baseline: Mapping[str, float],
    text_key: str = "text",
) -> list[dict]:
    """Detected-language shares over labeled hits, next to the corpus
    baseline. Enrichment > 1 means the language is over-represented among
    hits relative to its share of corpus tokens."""
    counts: dict[str, int] = {}
    total = 0
    for row in rows:
        lang = detect_language(row.get(text_key, ""))
        counts[lang] = counts.get(lang, 0) + 1
        total += 1
    out = []
    for lang, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        share = 100.0 * count / total
        base = baseline.get(lang, 0.0)
        out.append(
            {
                "language": lang,
                "count": count,
                "share_pct": share,
                "baseline_pct": base,
                "enrichment": (share / base) if base > 0 else None,
            }
        )
    return out


@dataclass(frozen=True)
class QuadrantAssignment:
    candidate_id: str
    query_id: str
    doc_id: str
    rank: int
    pool_size: int
    label: str
    quadrant: str | None

    def as_dict(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "query_id": self.query_id,
            "doc_id": self.doc_id,
            "rank": self.rank,
            "pool_size": self.pool_size,
            "label": self.label,
            "quadrant": self.quadrant,
        }


def _band(rank: int, pool_size: int) -> str | None:
    if pool_size <= 0:
        return None
    fraction = rank / pool_size
    if fraction <= TOP_BAND:
        return "Top"
    if TAIL_BAND[0] < fraction <= TAIL_BAND[1]:
        return "Tail"
    return None


def assign_quadrants(
    rows: Iterable[Mapping],
    english_only: bool = True,
    topical_as_negative: bool = True,
    language_by_doc: Mapping[str, str] | None = None,
) -> list[QuadrantAssignment]:
    """Place each labeled row into one of four pool-position quadrants.

    Rows are positive when their label is significant and negative when it
    is no-match (plus topical-match unless `topical_as_negative` is off);
    don't-know rows and rows in the unbanded middle get quadrant None.
    With `english_only`, rows whose document language is not English are
    left unassigned so the summary compares like with like.
    """
    assignments = []
    for row in rows:
        label = Label(row["label"])
        quadrant: str | None = None
        language = "en"
        if language_by_doc is not None:
            language = language_by_doc.get(row["doc_id"], "en")
        elif row.get("language"):
            language = row["language"]
        if not (english_only and language != "en"):
            band = _band(row["rank"], row["pool_size"])
            if band is not None and label is not Label.DONT_KNOW:
                if is_significant(label):
                    quadrant = f"{band}P"
                elif label is Label.NO_MATCH or (
                    topical_as_negative and label is Label.TOPICAL_MATCH
                ):
                    quadrant = f"{band}N"
        assignments.append(
            QuadrantAssignment(
                candidate_id=row["candidate_id"],
                query_id=row["query_id"],
                doc_id=row["doc_id"],
                rank=row["rank"],
                pool_size=row["pool_size"],
                label=row["label"],
                quadrant=quadrant,
            )
        )
    return assignments


def quadrant_groups(
    assignments: Iterable[QuadrantAssignment],
) -> dict[str, list[QuadrantAssignment]]:
    groups: dict[str, list[QuadrantAssignment]] = {q: [] for q in QUADRANTS}
    for assignment in assignments:
        if assignment.quadrant is not None:
            groups[assignment.quadrant].append(assignment)
    return groups


def hit_features(
    quote_profile: LinguisticProfile, hit_profile: LinguisticProfile
) -> dict[str, float | None]:
    """The four per-candidate diagnostics: lemma overlap with the quote,
    out-of-vocabulary rates on both sides, and tag-distribution divergence."""
    return {
        "vocab_sim": vocab_jaccard(quote_profile, hit_profile),
        "quote_oov": oov_rate(quote_profile),
        "hit_oov": oov_rate(hit_profile),
        "pos_div": pos_jsd(quote_profile, hit_profile),
    }


def _mean_std(values: list[float]) -> dict:
    if not values:
        return {"mean": None, "std": None, "n": 0}
    arr = np.asarray(values, dtype=np.float64)
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std(ddof=0)),
        "n": len(values),
    }


def quadrant_summary(
    assignments: Iterable[QuadrantAssignment],
    features: Mapping[str, Mapping[str, float | None]],
) -> dict[str, dict[str, dict]]:
    """Per quadrant, mean and population standard deviation of each feature.
    `features` maps candidate_id to the output of `hit_features`; candidates
    without features, and features that came back None, are skipped."""
    summary: dict[str, dict[str, dict]] = {}
    for quadrant, members in quadrant_groups(assignments).items():
        cells = {}
        for feature in FEATURES:
            values = []
            for assignment in members:
                got = features.get(assignment.candidate_id, {}).get(feature)
                if got is not None:
                    values.append(float(got))
            cells[feature] = _mean_std(values)
        summary[quadrant] = cells
    return summary
