from __future__ import annotations

import math
import random

import pytest

from semrec.corpus import DocumentRecord
from semrec.diagnostics import (
    BaselineAnnotator,
    FEATURES,
    assign_quadrants,
    corpus_language_baseline,
    detect_language,
    document_language,
    hit_features,
    language_distribution,
    lemmatize,
    oov_rate,
    pos_jsd,
    profile,
    quadrant_groups,
    quadrant_summary,
    stopword_profiles,
    vocab_jaccard,
)


def test_lemmatize_strips_common_suffixes():
    assert lemmatize("walking") == "walk"
    assert lemmatize("walked") == "walk"
    assert lemmatize("horses") == "hors"
    assert lemmatize("ships") == "ship"
    assert lemmatize("glass") == "glass"  # -ss is not a plural
    assert lemmatize("sing") == "sing"  # too short to be an -ing form


def test_baseline_annotator_rules():
    tagger = BaselineAnnotator(lexicon={"cat": "NOUN", "run": "VERB"})
    assert tagger.tag(",") == "PUNCT"
    assert tagger.tag("1712") == "NUM"
    assert tagger.tag("Cat") == "NOUN"
    assert tagger.tag("running") == "VERB"  # lemma lookup
    assert tagger.tag("q") == "X"
    assert tagger.tag("blorply") == "ADV"
    assert tagger.tag("blorping") == "VERB"
    assert tagger.tag("blorpous") == "ADJ"
    assert tagger.tag("blorpment") == "NOUN"
    assert tagger.tag("blorp") == "NOUN"  # open-class default
    # suffix rules need a real stem in front of the ending
    assert tagger.tag("bly") == "NOUN"


def test_profile_counts_alphabetic_tokens_and_oov():
    p = profile(
        "The cat sat on a mat, 1712!",
        vocabulary={"the", "cat", "sat"},
    )
    assert p.token_count == 6  # number and punctuation excluded
    assert p.oov_count == 3  # on, a, mat
    assert oov_rate(p) == pytest.approx(50.0)
    assert "cat" in p.lemma_set
    assert sum(p.pos_distribution.values()) == pytest.approx(1.0)
    assert not p.degenerate


def test_profile_vocabulary_accepts_lemma_matches():
    p = profile("walking walked walks", vocabulary={"walk"})
    assert p.token_count == 3
    assert p.oov_count == 0


def test_empty_profile_is_degenerate():
    p = profile("")
    assert p.token_count == 0
    assert p.degenerate
    assert oov_rate(p) is None


def test_profile_rejects_unknown_annotator_tags():
    class Weird:
        def tag(self, token: str) -> str:
            return "GERUND"

    with pytest.raises(ValueError, match="GERUND"):
        profile("word", annotator=Weird())


def test_vocab_jaccard_basics():
    assert vocab_jaccard({"a", "b"}, {"b", "c"}) == pytest.approx(1 / 3)
    assert vocab_jaccard(set(), set()) == 0.0
    assert vocab_jaccard({"a"}, set()) == 0.0
    p = profile("the cat", vocabulary={"the", "cat"})
    assert vocab_jaccard(p, p) == 1.0


def test_vocab_jaccard_matches_set_oracle_on_random_pairs():
    rng = random.Random(7)
    for _ in range(500):
        a = {f"w{rng.randrange(40)}" for _ in range(rng.randrange(0, 30))}
        b = {f"w{rng.randrange(40)}" for _ in range(rng.randrange(0, 30))}
        got = vocab_jaccard(a, b)
        union = a | b
        expected = len(a & b) / len(union) if union else 0.0
        assert got == pytest.approx(expected)
        assert 0.0 <= got <= 1.0
        assert got == vocab_jaccard(b, a)


def test_pos_jsd_identical_and_disjoint():
    assert pos_jsd([0.25, 0.75], [0.25, 0.75]) == 0.0
    assert pos_jsd([1.0, 0.0], [0.0, 1.0]) == 1.0


def test_pos_jsd_known_value():
    got = pos_jsd([0.5, 0.5], [1.0, 0.0])
    assert got == pytest.approx(0.3113, abs=1e-4)


def test_pos_jsd_degenerate_inputs_are_none():
    assert pos_jsd([0.0, 0.0], [1.0, 0.0]) is None
    assert pos_jsd(profile(""), profile("a word")) is None
    assert pos_jsd({}, {"NOUN": 1.0}) is None


def test_pos_jsd_validates_input():
    with pytest.raises(ValueError, match="GERUND"):
        pos_jsd({"GERUND": 1.0}, {"NOUN": 1.0})
    with pytest.raises(ValueError, match="negative"):
        pos_jsd([0.5, -0.5], [1.0, 0.0])
    with pytest.raises(ValueError, match="mismatch"):
        pos_jsd([0.5, 0.5], [1.0, 0.0, 0.0])


def test_pos_jsd_is_bounded_and_symmetric_on_random_distributions():
    rng = random.Random(11)
    for _ in range(200):
        a = [rng.random() for _ in range(12)]
        b = [rng.random() for _ in range(12)]
        d = pos_jsd(a, b)
        assert d is not None
        assert 0.0 <= d <= 1.0
        assert d == pytest.approx(pos_jsd(b, a))
        assert pos_jsd(a, a) == pytest.approx(0.0, abs=1e-12)


def _stopword_text(lang: str, n: int = 12) -> str:
    words = sorted(stopword_profiles()[lang])[:n]
    return " ".join(words)


def test_detect_language_from_stopword_share():
    assert detect_language(_stopword_text("en")) == "en"
    # French function words that are not on the English list
    fr_only = sorted(stopword_profiles()["fr"] - stopword_profiles()["en"])
    assert detect_language(" ".join(fr_only[:12])) == "fr"
    assert detect_language("zyxxy qwerty brillig") == "unknown"
    assert detect_language("") == "unknown"


def test_detect_language_prefers_english_on_ties():
    profiles = stopword_profiles()
    others = set().union(*(profiles[l] for l in ("fr", "la", "it", "es")))
    en_only = sorted(profiles["en"] - others)[:4]
    fr_only = sorted(profiles["fr"] - profiles["en"] - profiles["la"]
                     - profiles["it"] - profiles["es"])[:4]
    assert len(en_only) == 4 and len(fr_only) == 4
    # equal stopword share for both languages; the earlier language wins
    assert detect_language(" ".join(en_only + fr_only)) == "en"


def test_document_language_prefers_declared_value():
    rec = DocumentRecord(doc_id="d", work_id="w", text=_stopword_text("en"),
                         declared_language="la")
    assert document_language(rec) == "la"
    rec2 = DocumentRecord(doc_id="d", work_id="w", text=_stopword_text("en"))
    assert document_language(rec2) == "en"


def test_corpus_language_baseline_is_token_weighted():
    records = [
        DocumentRecord(doc_id="d1", work_id="w1", text="one two three",
                       declared_language="en"),
        DocumentRecord(doc_id="d2", work_id="w2", text="uno",
                       declared_language="es"),
    ]
    baseline = corpus_language_baseline(records)
    assert baseline["en"] == pytest.approx(75.0)
    assert baseline["es"] == pytest.approx(25.0)
    assert corpus_language_baseline([]) == {}


def test_language_distribution_enrichment():
    rows = [
        {"text": _stopword_text("en")},
        {"text": _stopword_text("en")},
        {"text": "zyxxy qwerty"},
    ]
    table = language_distribution(rows, {"en": 50.0})
    assert table[0]["language"] == "en"
    assert table[0]["count"] == 2
    assert table[0]["share_pct"] == pytest.approx(200 / 3)
    assert table[0]["enrichment"] == pytest.approx((200 / 3) / 50.0)
    unknown = next(cell for cell in table if cell["language"] == "unknown")
    assert unknown["enrichment"] is None  # no baseline share to compare to


def _row(rank, pool, label, query="q1", doc=None, language=None):
    row = {
        "candidate_id": f"{query}:{rank}",
        "query_id": query,
        "doc_id": doc or f"d{rank}",
        "rank": rank,
        "pool_size": pool,
        "label": label,
    }
    if language is not None:
        row["language"] = language
    return row


def test_quadrant_banding_edges():
    rows = [
        _row(3, 10, "paraphrase"),   # 0.30 is still Top
        _row(4, 10, "paraphrase"),   # 0.40 falls in the gap
        _row(6, 10, "no_match"),     # 0.60 is not yet Tail
        _row(7, 10, "no_match"),     # Tail
        _row(9, 10, "meaning_match"),  # 0.90 is still Tail
        _row(10, 10, "no_match"),    # beyond the tail band
        _row(1, 10, "dont_know"),    # confident labels only
    ]
    got = {a.rank: a.quadrant for a in assign_quadrants(rows)}
    assert got == {3: "TopP", 4: None, 6: None, 7: "TailN",
                   9: "TailP", 10: None, 1: None}


def test_quadrant_topical_flag():
    rows = [_row(1, 10, "topical_match")]
    assert assign_quadrants(rows)[0].quadrant == "TopN"
    relaxed = assign_quadrants(rows, topical_as_negative=False)
    assert relaxed[0].quadrant is None


def test_quadrant_language_filter():
    rows = [_row(1, 10, "paraphrase", doc="dfr", language="fr")]
    assert assign_quadrants(rows)[0].quadrant is None
    assert assign_quadrants(rows, english_only=False)[0].quadrant == "TopP"
    by_doc = assign_quadrants(rows, language_by_doc={"dfr": "en"})
    assert by_doc[0].quadrant == "TopP"


def test_quadrant_groups_drop_unassigned():
    rows = [_row(1, 10, "paraphrase"), _row(5, 10, "paraphrase")]
    groups = quadrant_groups(assign_quadrants(rows))
    assert [a.rank for a in groups["TopP"]] == [1]
    assert groups["TailN"] == []


def test_hit_features_keys():
    quote = profile("the cat sat", vocabulary={"the", "cat", "sat"})
    hit = profile("the dog sat", vocabulary={"the", "cat", "sat"})
    features = hit_features(quote, hit)
    assert set(features) == set(FEATURES)
    assert features["vocab_sim"] == pytest.approx(2 / 4)
    assert features["quote_oov"] == pytest.approx(0.0)
    assert features["hit_oov"] == pytest.approx(100 / 3)
    assert features["pos_div"] is not None


def test_quadrant_summary_population_std():
    rows = [
        _row(1, 10, "paraphrase"),
        _row(2, 10, "meaning_match"),
        _row(7, 10, "no_match"),
    ]
    assignments = assign_quadrants(rows)
    features = {
        "q1:1": {"vocab_sim": 0.2, "quote_oov": 10.0, "hit_oov": None,
                 "pos_div": 0.5},
        "q1:2": {"vocab_sim": 0.4, "quote_oov": 10.0, "hit_oov": 3.0,
                 "pos_div": 0.1},
        # q1:7 has no feature row at all
    }
    summary = quadrant_summary(assignments, features)
    top_p = summary["TopP"]
    assert top_p["vocab_sim"]["mean"] == pytest.approx(0.3)
    assert top_p["vocab_sim"]["std"] == pytest.approx(0.1)  # ddof=0
    assert top_p["vocab_sim"]["n"] == 2
    assert top_p["hit_oov"]["n"] == 1  # the None value is skipped
    assert summary["TailN"]["pos_div"] == {"mean": None, "std": None, "n": 0}
    assert math.isclose(top_p["quote_oov"]["std"], 0.0)
