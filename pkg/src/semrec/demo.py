"""Synthetic corpus with planted ground truth for the end-to-end demo.

The generator writes one source work containing five quotes, then plants
each quote in external documents three ways: verbatim copies, reworded
copies, and same-topic texts that share vocabulary but no phrasing. Every
planted document gets its own work id so per-work deduplication cannot
hide a plant behind another from the same work.

Vocabulary pools are pairwise disjoint by construction (quotes, fillers,
noise) so the only character-level alignments above the reporting
threshold are the verbatim plants; reworded and topical texts are pushed
below it by an explicit repair loop that re-substitutes words until their
best local alignment against the quote scores under the threshold.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import DocumentRecord
from .diagnostics import stopword_profiles
from .jsonl import write_jsonl
from .reuse import AlignerParams, smith_waterman

logger = logging.getLogger(__name__)

SOURCE_WORK = "w-source"
SOURCE_DOC = "src-0001"

VERBATIMS_PER_QUOTE = 3
PARAPHRASES_PER_QUOTE = 4
TOPICAL_PER_QUOTE = 2
NOISE_DOCS = 114
FOREIGN_DOCS = {"fr": 3, "la": 3}

FILLER_LEN = 100
TAIL_LEN = 8

QUOTES = (
    "The eye gathers the beam of the lantern upon the distant tower, and by"
    " that light the watcher reads the shape of the road, though the flame"
    " itself stays hidden behind the horn shutter of the lamp.",
    "A pilot steers the vessel past the shoal by the lead line and the"
    " compass, and when the fog swallows the headland he trusts the chart,"
    " for the harbour bell carries farther than any eye can see.",
    "The gardener sets the young vine against the south wall, prunes the"
    " crowded branches before the sap rises, and feeds the roots with ash"
    " and marl, so the fruit may ripen before the early frost.",
    "The smith heats the iron bar until the metal glows, then hammers the"
    " edge thin upon the anvil, quenching the blade in brine, for steel"
    " tempered slowly will bend where a hasty forging breaks.",
    "The weaver threads the warp across the loom and drives the shuttle"
    " through the open shed, beating each weft home with the reed, until"
    " the plain cloth shows the figured border of the pattern.",
)

# Replacement words stay inside each quote's theme so a reworded plant keeps
# ranking near its quote while sharing as few character runs as possible.
SUBSTITUTIONS: tuple[dict[str, tuple[str, ...]], ...] = (
    {
        "eye": ("glass", "sight"),
        "gathers": ("collects", "receives"),
        "beam": ("ray", "gleam"),
        "lantern": ("beacon", "cresset"),
        "distant": ("remote", "farther"),
        "tower": ("turret", "steeple"),
        "light": ("glow", "shining"),
        "watcher": ("sentinel", "observer"),
        "reads": ("marks", "discerns"),
        "shape": ("outline", "course"),
        "road": ("highway", "causey"),
        "flame": ("fire", "taper"),
        "hidden": ("veiled", "shrouded"),
        "shutter": ("screen", "pane"),
        "lamp": ("cresset", "beacon"),
    },
    {
        "pilot": ("steersman", "master"),
        "steers": ("guides", "works"),
        "vessel": ("ship", "bark"),
        "shoal": ("sandbank", "reef"),
        "lead": ("sounding", "plummet"),
        "compass": ("needle", "card"),
        "fog": ("mist", "haze"),
        "swallows": ("covers", "drowns"),
        "headland": ("cape", "point"),
        "trusts": ("follows", "keeps"),
        "chart": ("map", "rutter"),
        "harbour": ("haven", "port"),
        "bell": ("buoy", "signal"),
        "carries": ("sounds", "reaches"),
    },
    {
        "gardener": ("planter", "keeper"),
        "sets": ("trains", "stakes"),
        "vine": ("sapling", "stock"),
        "south": ("warm", "sunny"),
        "wall": ("fence", "border"),
        "prunes": ("trims", "cuts"),
        "crowded": ("thick", "tangled"),
        "branches": ("shoots", "boughs"),
        "sap": ("juice", "spring"),
        "feeds": ("dresses", "manures"),
        "roots": ("stocks", "beds"),
        "ash": ("lime", "dung"),
        "marl": ("loam", "mould"),
        "fruit": ("crop", "grapes"),
        "ripen": ("mature", "mellow"),
        "frost": ("cold", "winter"),
    },
    {
        "smith": ("farrier", "armourer"),
        "heats": ("fires", "warms"),
        "iron": ("metal", "stock"),
        "bar": ("rod", "billet"),
        "glows": ("reddens", "brightens"),
        "hammers": ("beats", "draws"),
        "edge": ("bevel", "point"),
        "anvil": ("stithy", "block"),
        "quenching": ("cooling", "dipping"),
        "blade": ("knife", "sword"),
        "brine": ("water", "oil"),
        "steel": ("temper", "metal"),
        "tempered": ("hardened", "annealed"),
        "bend": ("yield", "spring"),
        "hasty": ("quick", "rash"),
        "forging": ("working", "welding"),
        "breaks": ("snaps", "shatters"),
    },
    {
        "weaver": ("webster", "clothier"),
        "threads": ("strings", "lays"),
        "warp": ("chain", "ends"),
        "loom": ("frame", "beam"),
        "drives": ("throws", "passes"),
        "shuttle": ("pirn", "quill"),
        "shed": ("gap", "lease"),
        "beating": ("pressing", "striking"),
        "weft": ("pick", "woof"),
        "reed": ("batten", "comb"),
        "plain": ("simple", "common"),
        "cloth": ("web", "stuff"),
        "figured": ("worked", "flowered"),
        "border": ("hem", "edging"),
        "pattern": ("design", "draught"),
    },
)

TOPICAL_EXTRAS = (
    ("candle", "wick", "mirror", "prism", "shadow", "dawn", "window",
     "glimmer", "spark", "dusk"),
    ("anchor", "mast", "sail", "tide", "current", "wave", "keel", "rudder",
     "voyage", "storm"),
    ("orchard", "seedling", "trellis", "compost", "bloom", "harvest",
     "hedge", "furrow", "graft", "mulch"),
    ("furnace", "bellows", "ingot", "ore", "slag", "rivet", "tongs",
     "casting", "wrought", "copper"),
    ("spindle", "distaff", "yarn", "fleece", "tapestry", "linen", "wool",
     "bobbin", "selvage", "dye"),
)

FUNCTION_WORDS = frozenset(
    "the a an and of in by that for though itself stays past when he any"
    " can see so may will where each with upon across through until home"
    " then before against".split()
)

SOURCE_FILLER = (
    "meanwhile", "regarding", "likewise", "moreover", "chapter", "section",
    "treatise", "argument", "discourse", "remark", "observation", "notion",
    "entry", "folio", "margin", "gloss", "preface", "appendix", "volume",
    "page", "reader", "author", "passage", "sentence", "paragraph",
    "letter", "epistle", "dedication", "index", "contents", "plate",
    "frontis", "errata", "printer", "edition", "imprint", "colophon",
    "quire", "binding", "vellum",
)

TARGET_FILLER = (
    "account", "ledger", "parish", "market", "tithe", "survey", "census",
    "borough", "manor", "deed", "lease", "rent", "acre", "bushel", "toll",
    "fair", "guild", "charter", "statute", "decree", "petition", "council",
    "alderman", "bailiff", "warden", "clerk", "notary", "seal", "scroll",
    "registry", "archive", "minute", "docket", "summons", "verdict",
    "jury", "witness", "oath", "levy", "amercement",
)

NOISE_WORDS = (
    "comet", "alembic", "quadrat", "theorem", "axiom", "polygon",
    "tangent", "cipher", "algebra", "almanac", "eclipse", "zodiac",
    "pendulum", "vacuum", "barometer", "crucible", "retort", "tincture",
    "elixir", "anatomy", "humour", "phlegm", "lancet", "poultice",
    "apothecary", "dram", "scruple", "grain", "specific", "remedy",
    "fever", "ague", "pox", "plague", "quarantine", "miasma", "effluvia",
    "corpuscle", "animalcule", "spermaceti", "ambergris", "saltpetre",
    "vitriol", "antimony", "cinnabar", "calomel", "laudanum", "syrup",
    "decoction", "infusion", "electuary", "plaster", "unguent", "balsam",
    "camphor", "myrrh", "aloes", "senna", "jalap", "ipecac",
)

AUTHORS = (
    "N. Hale", "J. Prynne", "M. Aubrey", "T. Wren",
    "E. Calvert", "R. Somers", "H. Digby", "P. Marvell",
)
GENRES = ("treatise", "sermon", "essay", "dialogue")

VOCABULARY_POOLS = {
    "source_filler": frozenset(SOURCE_FILLER),
    "target_filler": frozenset(TARGET_FILLER),
    "noise": frozenset(NOISE_WORDS),
}


@dataclass(frozen=True)
class DemoCorpus:
    records: list[DocumentRecord]
    truth: list[dict]
    source_work: str = SOURCE_WORK


def _content_words(quote: str) -> list[str]:
    out = []
    for word in quote.split():
        key = word.strip(".,;:").lower()
        if key and key not in FUNCTION_WORDS and len(key) >= 3:
            out.append(key)
    return sorted(set(out))


def _match_case(original: str, replacement: str) -> str:
    trailing = ""
    while original and original[-1] in ".,;:":
        trailing = original[-1] + trailing
        original = original[:-1]
    if original[:1].isupper():
        replacement = replacement.capitalize()
    return replacement + trailing


def _filler(pool: tuple[str, ...], n: int, rng: random.Random) -> str:
    return " ".join(rng.choice(pool) for _ in range(n))


def _word_spans(words: list[str]) -> list[tuple[int, int]]:
    spans = []
    pos = 0
    for word in words:
        spans.append((pos, pos + len(word)))
        pos += len(word) + 1
    return spans


def _suppress_overlap(
    quote: str,
    text: str,
    subs: dict[str, tuple[str, ...]],
    rng: random.Random,
    params: AlignerParams,
    ceiling: int,
) -> str:
    """Re-substitute or swap words until the best local alignment between
    `text` and the quote scores at most `ceiling`."""
    for _ in range(60):
        got = smith_waterman(quote, text, params)
        if got is None or got.score <= ceiling:
            return text
        ts, te = got.b_span
        words = text.split()
        spans = _word_spans(words)
        inside = [i for i, (a, b) in enumerate(spans) if a < te and b > ts]
        pick = rng.choice(inside)
        key = words[pick].strip(".,;:").lower()
        if key in subs:
            words[pick] = _match_case(words[pick], rng.choice(subs[key]))
        elif len(inside) >= 2:
            other = rng.choice([i for i in inside if i != pick])
            words[pick], words[other] = words[other], words[pick]
        else:
            neighbor = pick - 1 if pick > 0 else pick + 1
            words[pick], words[neighbor] = words[neighbor], words[pick]
        text = " ".join(words)
    raise RuntimeError("could not push demo text below the alignment threshold")


def _paraphrase(
    quote: str,
    subs: dict[str, tuple[str, ...]],
    rng: random.Random,
    params: AlignerParams,
    ceiling: int,
) -> str:
    words = []
    for word in quote.split():
        key = word.strip(".,;:").lower()
        if key in subs and rng.random() < 0.6:
            words.append(_match_case(word, rng.choice(subs[key])))
        else:
            words.append(word)
    blocks = []
    i = 0
    while i < len(words):
        size = rng.randint(4, 6)
        blocks.append(words[i : i + size])
        i += size
    rng.shuffle(blocks)
    text = " ".join(" ".join(block) for block in blocks)
    return _suppress_overlap(quote, text, subs, rng, params, ceiling)


def _topical_text(
    quote: str,
    extras: tuple[str, ...],
    subs: dict[str, tuple[str, ...]],
    rng: random.Random,
    params: AlignerParams,
    ceiling: int,
) -> str:
    pool = sorted(set(_content_words(quote)) | set(extras))
    words = []
    for _ in range(8):
        words.extend(
            ("the", rng.choice(pool), rng.choice(("and", "of", "in", "with")),
             "the", rng.choice(pool))
        )
    words[-1] = words[-1] + "."
    return _suppress_overlap(quote, " ".join(words), subs, rng, params, ceiling)


def _plant_doc(plant: str, rng: random.Random) -> tuple[str, tuple[int, int]]:
    """Document text with `plant` starting exactly at the chunking boundary,
    and its character span."""
    filler = _filler(TARGET_FILLER, FILLER_LEN, rng)
    tail = _filler(TARGET_FILLER, TAIL_LEN, rng)
    text = f"{filler} {plant} {tail}"
    start = len(filler) + 1
    return text, (start, start + len(plant))


def make_demo_corpus(seed: int = 0) -> DemoCorpus:
    rng = random.Random(seed)
    params = AlignerParams()
    ceiling = params.min_score - 5
    records: list[DocumentRecord] = []
    truth: list[dict] = []

    segments = []
    quote_spans = []
    pos = 0
    for quote in QUOTES:
        filler = _filler(SOURCE_FILLER, FILLER_LEN, rng)
        segments.append(filler)
        pos += len(filler) + 1
        quote_spans.append((pos, pos + len(quote)))
        segments.append(quote)
        pos += len(quote) + 1
    segments.append(_filler(SOURCE_FILLER, 10, rng))
    records.append(
        DocumentRecord(
            doc_id=SOURCE_DOC,
            work_id=SOURCE_WORK,
            text=" ".join(segments),
            title="A Discourse of Five Arts",
            author="J. Selden",
            year=1671,
            genre="treatise",
            declared_language="en",
        )
    )
    for qi, span in enumerate(quote_spans):
        truth.append(
            {
                "kind": "source_quote",
                "doc_id": SOURCE_DOC,
                "work_id": SOURCE_WORK,
                "quote_index": qi,
                "query_id": f"q{qi + 1:03d}",
                "span": list(span),
            }
        )

    def add_plant(kind: str, qi: int, j: int, plant: str) -> None:
        doc_id = f"{kind[:4]}-{qi + 1}-{j + 1}"
        work_id = f"wk-{doc_id}"
        text, span = _plant_doc(plant, rng)
        records.append(
            DocumentRecord(
                doc_id=doc_id,
                work_id=work_id,
                text=text,
                title=f"Of the {kind} arts, book {j + 1}",
                author=rng.choice(AUTHORS),
                year=rng.randint(1620, 1780),
                genre=GENRES[(qi + j) % len(GENRES)],
                declared_language="en",
            )
        )
        truth.append(
            {
                "kind": kind,
                "doc_id": doc_id,
                "work_id": work_id,
                "quote_index": qi,
                "query_id": f"q{qi + 1:03d}",
                "span": list(span),
            }
        )

    for qi, quote in enumerate(QUOTES):
        for j in range(VERBATIMS_PER_QUOTE):
            add_plant("verbatim", qi, j, quote)
        for j in range(PARAPHRASES_PER_QUOTE):
            add_plant(
                "paraphrase", qi, j,
                _paraphrase(quote, SUBSTITUTIONS[qi], rng, params, ceiling),
            )
        for j in range(TOPICAL_PER_QUOTE):
            add_plant(
                "topical", qi, j,
                _topical_text(
                    quote, TOPICAL_EXTRAS[qi], SUBSTITUTIONS[qi], rng, params,
                    ceiling,
                ),
            )

    def add_noise(doc_id: str, text: str, language: str) -> None:
        records.append(
            DocumentRecord(
                doc_id=doc_id,
                work_id=f"wk-{doc_id}",
                text=text,
                title=f"Miscellany {doc_id.rsplit('-', 1)[-1]}",
                author=rng.choice(AUTHORS),
                year=rng.randint(1620, 1780),
                genre=GENRES[rng.randrange(len(GENRES))],
                declared_language=language,
            )
        )
        truth.append(
            {
                "kind": "noise",
                "doc_id": doc_id,
                "work_id": f"wk-{doc_id}",
                "quote_index": None,
                "query_id": None,
                "span": None,
            }
        )

    for i in range(NOISE_DOCS):
        add_noise(f"noise-{i + 1:03d}", _filler(NOISE_WORDS, 140, rng), "en")
    profiles = stopword_profiles()
    for language, n_docs in sorted(FOREIGN_DOCS.items()):
        pool = tuple(sorted(profiles[language]))
        for i in range(n_docs):
            add_noise(
                f"noise-{language}-{i + 1:02d}", _filler(pool, 140, rng), language
            )

    return DemoCorpus(records=records, truth=truth)


def write_demo(out_dir: Path | str, seed: int = 0) -> dict[str, Path]:
    """Write corpus.jsonl, truth.jsonl, and a ready-to-run config file."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    demo = make_demo_corpus(seed=seed)
    corpus_path = out_dir / "corpus.jsonl"
    truth_path = out_dir / "truth.jsonl"
    config_path = out_dir / "config.txt"
    write_jsonl(corpus_path, (r.as_dict() for r in demo.records))
    write_jsonl(truth_path, demo.truth)
    config_path.write_text(
        "\n".join(
            (
                f"source_work={demo.source_work}",
                f"seed={seed}",
                "k=50",
                f"ground_truth={truth_path}",
            )
        )
        + "\n",
        encoding="utf-8",
    )
    logger.info(
        "demo corpus: %d documents, %d truth rows", len(demo.records), len(demo.truth)
    )
    return {"corpus": corpus_path, "truth": truth_path, "config": config_path}
