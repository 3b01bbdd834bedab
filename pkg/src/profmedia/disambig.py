"""Non-professional mention pruning.

A mention is professional when its disambiguated sense is a professional
synset, it is not an organization name, and its surface does not match a
cast-member name. WSD and NER run behind provider contracts: in-core
baselines live here (a gloss-overlap disambiguator and a dictionary/case
heuristic tagger), and HTTP providers speak protocol v1 to an external
model service.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Protocol, Sequence

from .corpus import Corpus, Sentence
from .protocol import (NER_LABELS, BridgeClient, ProviderError, check_confidence,
                       ner_request, wsd_request)
from .search import RawMention
from .taxonomy import ExpandedTaxonomy
from .wordnet import Synset, SynsetId, WordNetStore, synsets_of

logger = logging.getLogger(__name__)

_DATA_DIR = Path(__file__).parent / "data"

LESK_WINDOW = 10

ORG_SUFFIXES = frozenset({"inc", "corp", "co", "ltd", "bros"})

# Tokens signalling the span is used as a verb, not a noun mention.
INFINITIVE_MARKERS = frozenset({"to"})
MODALS = frozenset({"will", "would", "can", "could", "may", "might", "must",
                    "shall", "should", "gonna", "wanna", "gotta", "lemme"})
OBJECT_PRONOUNS = frozenset({"it", "them", "him", "her", "me", "us", "you"})
DETERMINERS = frozenset({"the", "a", "an", "this", "that", "these", "those",
                         "my", "your", "his", "her", "its", "our", "their",
                         "some", "any", "no", "every", "each", "one", "another"})


@lru_cache(maxsize=1)
def lesk_stopwords() -> frozenset[str]:
    words = set()
    for line in (_DATA_DIR / "lesk_stopwords.txt").read_text("utf-8").splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


class WsdProvider(Protocol):
    provider_id: str

    def disambiguate(self, tokens: Sequence[str], span: tuple[int, int],
                     candidates: list[Synset]) -> tuple[SynsetId | None, float]: ...


class NerProvider(Protocol):
    provider_id: str

    def label(self, sentence: Sentence, span: tuple[int, int], doc_id: str) -> str: ...


# --- in-core WSD -------------------------------------------------------------

def _signature(synset: Synset) -> set[str]:
    bag = set(synset.gloss.lower().split())
    for example in synset.examples:
        bag.update(example.lower().split())
    for lemma in synset.lemmas:
        bag.update(lemma.lower().split("_"))
    return {w.strip(".,;:!?\"'()") for w in bag}


def lesk_sense(tokens: Sequence[str], span: tuple[int, int],
               candidates: list[Synset]) -> tuple[SynsetId, float]:
    """Gloss-overlap disambiguation over a +/-10 token window.

    The candidate maximizing the overlap between the window's content words
    and its gloss+examples+lemmas bag wins; ties go to the lower sense rank
    (candidate order). With no overlap anywhere the first candidate wins
    with score 0.
    """
    if not candidates:
        raise ValueError("candidates must be nonempty")
    start, end = span
    stop = lesk_stopwords()
    window = [tokens[i].lower() for i in
              range(max(0, start - LESK_WINDOW), min(len(tokens), end + LESK_WINDOW))
              if not start <= i < end]
    window = [w for w in window if w not in stop and any(c.isalnum() for c in w)]
    best_id, best_score = candidates[0].id, 0.0
    for candidate in candidates:
        bag = _signature(candidate)
        overlap = sum(1 for w in window if w in bag)
        score = overlap / len(window) if window else 0.0
        if score > best_score:
            best_id, best_score = candidate.id, score
    return best_id, best_score


def verb_usage(tokens: Sequence[str], span: tuple[int, int]) -> bool:
    """Heuristic for spans used as verbs ("reverse engineer it").

    Fires when an infinitive marker or modal immediately precedes the span,
    or an object pronoun follows it with no determiner/possessive before it.
    """
    start, end = span
    prev = tokens[start - 1].lower() if start > 0 else None
    nxt = tokens[end].lower() if end < len(tokens) else None
    if prev in INFINITIVE_MARKERS or prev in MODALS:
        return True
    if nxt in OBJECT_PRONOUNS and prev not in DETERMINERS:
        return True
    return False


class BaselineWsd:
    """Gloss-overlap provider with a verb-usage guard (returns no sense)."""

    provider_id = "baseline-lesk"

    def disambiguate(self, tokens: Sequence[str], span: tuple[int, int],
                     candidates: list[Synset]) -> tuple[SynsetId | None, float]:
        if not candidates:
            return None, 0.0
        if verb_usage(tokens, span):
            return None, 0.0
        sid, score = lesk_sense(tokens, span, candidates)
        return sid, min(1.0, score)


# --- cast list and in-core NER -----------------------------------------------

@dataclass
class CastList:
    names: dict[str, frozenset[str]]

    def names_for(self, doc_id: str) -> frozenset[str]:
        return self.names.get(doc_id, frozenset())

    def matches(self, doc_id: str, surface: str) -> bool:
        """Case-insensitive full-name or word-subset match ("Tailor" in
        "John Tailor"); single-name character credits count too."""
        words = set(surface.lower().split())
        if not words:
            return False
        for name in self.names_for(doc_id):
            name_words = set(name.lower().split())
            if words <= name_words:
                return True
        return False


def load_cast_list(path: str | Path) -> CastList:
    """TSV rows of (imdb_id, person name), no header required."""
    names: dict[str, set[str]] = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        body = line.rstrip("\n")
        if not body.strip() or body.startswith("#"):
            continue
        parts = body.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise ValueError(f"{path}:{lineno}: expected imdb_id<TAB>name")
        names.setdefault(parts[0].strip(), set()).add(parts[1].strip())
    return CastList({k: frozenset(v) for k, v in names.items()})


def heuristic_ner(sentence: Sentence, span: tuple[int, int], cast: CastList,
                  doc_id: str) -> str:
    """Dictionary/case tagger: cast match -> person; capitalized mid-sentence
    next to another capitalized token or corporate suffix -> organization."""
    start, end = span
    surface = " ".join(sentence.orig[start:end])
    if cast.matches(doc_id, surface):
        return "person"
    capitalized = all(tok[:1].isupper() for tok in sentence.orig[start:end])
    if capitalized and start > 0:
        neighbors = []
        if start - 1 >= 0:
            neighbors.append(sentence.orig[start - 1])
        if end < len(sentence.orig):
            neighbors.append(sentence.orig[end])
        for neighbor in neighbors:
            clean = neighbor.rstrip(".").lower()
            if clean in ORG_SUFFIXES:
                return "organization"
            if neighbor[:1].isupper() and any(c.isalpha() for c in neighbor):
                return "organization"
    return "other"


class BaselineNer:
    provider_id = "baseline-gazetteer"

    def __init__(self, cast: CastList):
        self.cast = cast

    def label(self, sentence: Sentence, span: tuple[int, int], doc_id: str) -> str:
        return heuristic_ner(sentence, span, self.cast, doc_id)


# --- HTTP providers -----------------------------------------------------------

class HttpWsd:
    provider_id = "bridge-wsd"

    def __init__(self, client: BridgeClient, store: WordNetStore):
        self.client = client
        self.store = store

    def disambiguate(self, tokens, span, candidates):
        names = [self.store.name_of(c.id) for c in candidates]
        req = wsd_request("wsd-0", list(tokens), span, names)
        (obj,) = self.client.post_batch("wsd", [req])
        confidence = check_confidence(obj)
        sense = obj.get("sense")
        if sense is None:
            return None, confidence
        if sense not in names:
            raise ProviderError(f"sense {sense!r} not among candidates")
        return candidates[names.index(sense)].id, confidence


class HttpNer:
    provider_id = "bridge-ner"

    def __init__(self, client: BridgeClient):
        self.client = client

    def label(self, sentence: Sentence, span: tuple[int, int], doc_id: str) -> str:
        req = ner_request("ner-0", list(sentence.tokens), span)
        (obj,) = self.client.post_batch("ner", [req])
        check_confidence(obj)
        label = obj.get("label")
        if label not in NER_LABELS:
            raise ProviderError(f"unknown NER label {label!r}")
        return label


# --- classification ------------------------------------------------------------

@dataclass(frozen=True)
class ProfessionalMention:
    mention: RawMention
    sense: SynsetId | None
    sense_confidence: float
    ner: str
    cast_match: bool
    professional: bool
    wsd_provider: str
    ner_provider: str

    @property
    def title(self) -> str:
        return self.mention.title


def classify_mention(mention: RawMention, sentence: Sentence, store: WordNetStore,
                     taxonomy: ExpandedTaxonomy, wsd: WsdProvider, ner: NerProvider,
                     cast: CastList) -> ProfessionalMention:
    """Apply the professional-mention rule to one retrieved mention.

    WSD candidates are the noun senses of the title (head word as fallback
    for multiword titles WordNet lacks); the sense clause passes when the
    chosen sense is in the taxonomy's professional pool, which for
    lemma-backed titles equals its own professional sense set.
    """
    span = (mention.start, mention.end)
    candidates = synsets_of(store, mention.title)
    if not candidates and " " in mention.title:
        candidates = synsets_of(store, mention.title.split()[-1])
    if candidates:
        sense, confidence = wsd.disambiguate(sentence.tokens, span, candidates)
    else:
        sense, confidence = None, 0.0
    ner_label = ner.label(sentence, span, mention.doc)
    cast_match = cast.matches(mention.doc, mention.surface)
    pool = professional_pool(taxonomy)
    professional = (sense is not None and sense in pool
                    and ner_label != "organization" and not cast_match)
    return ProfessionalMention(
        mention=mention, sense=sense, sense_confidence=confidence, ner=ner_label,
        cast_match=cast_match, professional=professional,
        wsd_provider=wsd.provider_id, ner_provider=ner.provider_id)


def professional_pool(taxonomy: ExpandedTaxonomy) -> frozenset[SynsetId]:
    pool = getattr(taxonomy, "_pool_cache", None)
    if pool is None:
        pool = frozenset().union(*taxonomy.title_synsets.values()) \
            if taxonomy.title_synsets else frozenset()
        taxonomy._pool_cache = pool
    return pool


def classify_all(mentions: list[RawMention], corpus: Corpus, store: WordNetStore,
                 taxonomy: ExpandedTaxonomy, wsd: WsdProvider, ner: NerProvider,
                 cast: CastList) -> tuple[list[ProfessionalMention], int]:
    """Classify every mention; provider failures mark mentions undecided,
    which are excluded from the result and counted."""
    classified: list[ProfessionalMention] = []
    undecided = 0
    for mention in mentions:
        sentence = corpus.documents[mention.doc].sentences[mention.sentence]
        try:
            classified.append(classify_mention(
                mention, sentence, store, taxonomy, wsd, ner, cast))
        except ProviderError as err:
            logger.warning("undecided mention %s/%s+%d: %s",
                           mention.doc, mention.sentence, mention.start, err)
            undecided += 1
    return classified, undecided


# --- evaluation harness ---------------------------------------------------------

@dataclass(frozen=True)
class ClassificationMetrics:
    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: float
    precision: float
    recall: float
    precision_defined: bool
    recall_defined: bool

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def evaluate(pairs: list[tuple[bool, bool]]) -> ClassificationMetrics:
    """Accuracy/precision/recall from (predicted, gold) pairs.

    An empty precision or recall denominator reports 0.0 and clears the
    corresponding ``*_defined`` flag.
    """
    if not pairs:
        raise ValueError("labeled set must be nonempty")
    tp = sum(1 for pred, gold in pairs if pred and gold)
    fp = sum(1 for pred, gold in pairs if pred and not gold)
    fn = sum(1 for pred, gold in pairs if not pred and gold)
    tn = sum(1 for pred, gold in pairs if not pred and not gold)
    precision_defined = (tp + fp) > 0
    recall_defined = (tp + fn) > 0
    return ClassificationMetrics(
        tp=tp, fp=fp, fn=fn, tn=tn,
        accuracy=(tp + tn) / len(pairs),
        precision=tp / (tp + fp) if precision_defined else 0.0,
        recall=tp / (tp + fn) if recall_defined else 0.0,
        precision_defined=precision_defined,
        recall_defined=recall_defined)


def evaluate_pipeline(labeled: list[tuple[RawMention, bool]], corpus: Corpus,
                      classify: Callable[[RawMention, Sentence], bool]) -> ClassificationMetrics:
    pairs = []
    for mention, gold in labeled:
        sentence = corpus.documents[mention.doc].sentences[mention.sentence]
        pairs.append((classify(mention, sentence), gold))
    return evaluate(pairs)


LABELED_COLUMNS = ("tokens", "start", "end", "title", "gold")


def load_labeled_mentions(path: str | Path) -> list[tuple[list[str], int, int, str, bool]]:
    """Labeled harness TSV: space-joined tokens, span, title, gold (0/1)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        missing = [c for c in LABELED_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for row in reader:
            rows.append((row["tokens"].split(), int(row["start"]), int(row["end"]),
                         row["title"], row["gold"].strip() in ("1", "true", "True")))
    return rows
