"""Targeted sentiment for professional mentions.

The in-core baseline scores a distance-weighted opinion lexicon around the
target span: token weights come from the semantic relative distance (SRD)
between context token and target, with either hard masking (CDM) or linear
dynamic weighting (CDW) beyond the threshold. An HTTP provider speaks the
shared protocol v1 for externally served models. Dataset splitting keeps the
profession sets of train/validation/test disjoint.
"""

from __future__ import annotations

import csv
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .disambig import ProfessionalMention
from .protocol import (ABSA_LABELS, BridgeClient, ProviderError, absa_request,
                       check_confidence)

logger = logging.getLogger(__name__)

_DATA_DIR = Path(__file__).parent / "data"

POSITIVE, NEGATIVE, NEUTRAL = "positive", "negative", "neutral"

NEGATION_WINDOW = 3   # tokens before a polarity word a negator can flip
SRD_MODES = ("CDM", "CDW")


class SentimentError(Exception):
    pass


@dataclass(frozen=True)
class SrdConfig:
    """Distance threshold and weighting mode.

    Tokens at distance <= srd keep weight 1. Beyond it, CDM masks the token
    to 0 and CDW decays linearly at 1/sentence_length per extra step. (The
    masking is applied to tokens farther than the threshold, i.e. outside
    the local context.)
    """
    srd: int = 3
    mode: str = "CDW"

    def __post_init__(self):
        if self.srd < 0:
            raise ValueError("srd must be >= 0")
        if self.mode not in SRD_MODES:
            raise ValueError(f"mode must be one of {SRD_MODES}")


def srd_weights(length: int, span: tuple[int, int], config: SrdConfig) -> list[float]:
    """Per-token context weights in [0, 1]; span tokens always weigh 1."""
    start, end = span
    if not (0 <= start < end <= length):
        raise ValueError(f"span {span} out of bounds for sentence of length {length}")
    weights = []
    for i in range(length):
        if start <= i < end:
            weights.append(1.0)
            continue
        distance = min(abs(i - p) for p in range(start, end))
        if distance <= config.srd:
            weights.append(1.0)
        elif config.mode == "CDM":
            weights.append(0.0)
        else:
            weights.append(max(0.0, 1.0 - (distance - config.srd) / length))
    return weights


@dataclass(frozen=True)
class OpinionLexicon:
    polarity: dict[str, int]
    negators: frozenset[str]
    intensifiers: dict[str, float]

    def __post_init__(self):
        overlap = (self.negators | set(self.intensifiers)) & set(self.polarity)
        if overlap:
            raise SentimentError(f"lexicon words double as negator/intensifier: {sorted(overlap)}")


def _read_words(path: Path) -> list[str]:
    words = []
    for line in path.read_text("utf-8").splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.append(word)
    return words


@lru_cache(maxsize=1)
def load_lexicon(directory: str | None = None) -> OpinionLexicon:
    base = Path(directory) if directory else _DATA_DIR / "lexicon"
    polarity = {w: 1 for w in _read_words(base / "positive.txt")}
    polarity.update({w: -1 for w in _read_words(base / "negative.txt")})
    negators = frozenset(_read_words(base / "negators.txt"))
    intensifiers = {}
    for line in (base / "intensifiers.tsv").read_text("utf-8").splitlines():
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        word, multiplier = body.split("\t")
        intensifiers[word.strip().lower()] = float(multiplier)
    return OpinionLexicon(polarity=polarity, negators=negators, intensifiers=intensifiers)


def lexicon_polarity_score(tokens: Sequence[str], span: tuple[int, int],
                           lexicon: OpinionLexicon, config: SrdConfig) -> float:
    weights = srd_weights(len(tokens), span, config)
    score = 0.0
    for i, token in enumerate(tokens):
        word = token.lower()
        polarity = lexicon.polarity.get(word)
        if polarity is None:
            continue
        negated = any(tokens[j].lower() in lexicon.negators
                      for j in range(max(0, i - NEGATION_WINDOW), i))
        intensity = lexicon.intensifiers.get(tokens[i - 1].lower(), 1.0) if i > 0 else 1.0
        score += weights[i] * polarity * (-1.0 if negated else 1.0) * intensity
    return score


def lexicon_score(tokens: Sequence[str], span: tuple[int, int],
                  lexicon: OpinionLexicon, config: SrdConfig) -> str:
    score = lexicon_polarity_score(tokens, span, lexicon, config)
    if score > 1e-12:
        return POSITIVE
    if score < -1e-12:
        return NEGATIVE
    return NEUTRAL


class BaselineAbsa:
    """Lexicon scorer behind the ABSA provider contract."""

    provider_id = "baseline-lexicon"

    def __init__(self, lexicon: OpinionLexicon | None = None,
                 config: SrdConfig | None = None):
        self.lexicon = lexicon or load_lexicon()
        self.config = config or SrdConfig()

    def classify(self, tokens: Sequence[str], span: tuple[int, int]) -> tuple[str, float]:
        score = lexicon_polarity_score(tokens, span, self.lexicon, self.config)
        if abs(score) <= 1e-12:
            return NEUTRAL, 0.5
        label = POSITIVE if score > 0 else NEGATIVE
        return label, min(1.0, abs(score))


class HttpAbsa:
    """Protocol-v1 client provider; failures bubble up as ProviderError."""

    provider_id = "bridge-absa"

    def __init__(self, client: BridgeClient, max_in_flight: int = 4,
                 batch_size: int = 32):
        self.client = client
        self.max_in_flight = max(1, max_in_flight)
        self.batch_size = max(1, batch_size)

    def classify(self, tokens: Sequence[str], span: tuple[int, int]) -> tuple[str, float]:
        (obj,) = self.client.post_batch("absa", [absa_request("absa-0", list(tokens), span)])
        return _parse_absa(obj)

    def classify_batch(self, items: list[tuple[Sequence[str], tuple[int, int]]]
                       ) -> list[tuple[str, float] | None]:
        """Batched classification; output order matches input regardless of
        completion order, failed batches yield None entries."""
        chunks = [items[i:i + self.batch_size] for i in range(0, len(items), self.batch_size)]

        def run(chunk_index: int) -> list[tuple[str, float] | None]:
            chunk = chunks[chunk_index]
            reqs = [absa_request(f"absa-{chunk_index}-{j}", list(tokens), span)
                    for j, (tokens, span) in enumerate(chunk)]
            try:
                return [_parse_absa(obj) for obj in self.client.post_batch("absa", reqs)]
            except ProviderError as err:
                logger.warning("absa batch %d failed: %s", chunk_index, err)
                return [None] * len(chunk)

        results: list[tuple[str, float] | None] = []
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            for chunk_result in pool.map(run, range(len(chunks))):
                results.extend(chunk_result)
        return results


def _parse_absa(obj: dict) -> tuple[str, float]:
    confidence = check_confidence(obj)
    label = obj.get("label")
    if label not in ABSA_LABELS:
        raise ProviderError(f"unknown sentiment label {label!r}")
    return label, confidence


@dataclass(frozen=True)
class LabeledMention:
    """A professional mention with its targeted sentiment attached."""
    classified: ProfessionalMention
    sentiment: str
    sentiment_confidence: float
    absa_provider: str


def apply_sentiment(mentions: list[ProfessionalMention], sentences,
                    provider) -> tuple[list[LabeledMention], int]:
    """Label each mention; provider failures are excluded and counted.

    ``sentences`` maps (doc, sentence index) to token sequences.
    """
    items = []
    for pm in mentions:
        tokens = sentences[(pm.mention.doc, pm.mention.sentence)]
        items.append((tokens, (pm.mention.start, pm.mention.end)))
    if hasattr(provider, "classify_batch"):
        outcomes = provider.classify_batch(items)
    else:
        outcomes = []
        for tokens, span in items:
            try:
                outcomes.append(provider.classify(tokens, span))
            except ProviderError as err:
                logger.warning("absa failure: %s", err)
                outcomes.append(None)
    labeled, undecided = [], 0
    for pm, outcome in zip(mentions, outcomes):
        if outcome is None:
            undecided += 1
            continue
        label, confidence = outcome
        labeled.append(LabeledMention(pm, label, confidence, provider.provider_id))
    return labeled, undecided


# --- sentiment dataset ---------------------------------------------------------

SPLIT_NAMES = ("train", "validation", "test")

DATASET_COLUMNS = ("sentence", "start", "end", "title", "gold", "split")


@dataclass(frozen=True)
class SentimentRow:
    tokens: tuple[str, ...]
    start: int
    end: int
    title: str
    gold: str
    split: str | None = None


@dataclass
class SentimentDataset:
    rows: list[SentimentRow] = field(default_factory=list)

    def split_rows(self, name: str) -> list[SentimentRow]:
        return [r for r in self.rows if r.split == name]

    def professions(self, name: str) -> set[str]:
        return {r.title for r in self.split_rows(name)}


def split_dataset(rows: list[SentimentRow], ratios: Sequence[tuple[str, float]],
                  seed: int) -> SentimentDataset:
    """Assign whole professions to splits, approximating row-count ratios.

    Professions are shuffled deterministically by seed and greedily assigned
    to the split with the largest remaining row deficit; when as many
    professions remain as there are empty splits, only empty splits may
    receive them. Split profession sets are disjoint by construction.
    """
    names = [name for name, _ in ratios]
    fractions = [frac for _, frac in ratios]
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise SentimentError(f"split ratios must sum to 1, got {sum(fractions)}")
    by_title: dict[str, list[SentimentRow]] = {}
    for row in rows:
        by_title.setdefault(row.title, []).append(row)
    if len(by_title) < len(names):
        raise SentimentError(
            f"need at least {len(names)} distinct professions, got {len(by_title)}")

    titles = sorted(by_title)
    random.Random(seed).shuffle(titles)
    total = len(rows)
    deficits = {name: frac * total for name, frac in ratios}
    assigned: dict[str, str] = {}
    empty = set(names)
    for position, title in enumerate(titles):
        remaining = len(titles) - position
        candidates = sorted(empty) if remaining <= len(empty) else names
        best = max(candidates, key=lambda n: (deficits[n], -names.index(n)))
        assigned[title] = best
        deficits[best] -= len(by_title[title])
        empty.discard(best)

    out = [replace(row, split=assigned[row.title]) for row in rows]
    return SentimentDataset(rows=out)


def save_dataset_tsv(dataset: SentimentDataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(DATASET_COLUMNS)
        for row in dataset.rows:
            writer.writerow([" ".join(row.tokens), row.start, row.end,
                             row.title, row.gold, row.split or ""])


def load_dataset_tsv(path: str | Path) -> SentimentDataset:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        missing = [c for c in DATASET_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise SentimentError(f"{path}: missing columns {missing}")
        for raw in reader:
            rows.append(SentimentRow(
                tokens=tuple(raw["sentence"].split()),
                start=int(raw["start"]), end=int(raw["end"]),
                title=raw["title"], gold=raw["gold"],
                split=raw["split"] or None))
    return SentimentDataset(rows=rows)


# --- evaluation -----------------------------------------------------------------

@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class SentimentMetrics:
    accuracy: float
    macro_f1: float
    per_class: dict[str, ClassScores]

    @property
    def total_support(self) -> int:
        return sum(c.support for c in self.per_class.values())


def evaluate_sentiment(gold: Sequence[str], predicted: Sequence[str]) -> SentimentMetrics:
    """Multi-class accuracy, per-class P/R/F1 and their macro-F1 mean.

    Classes with empty denominators score 0 for the affected metric.
    """
    if not gold:
        raise SentimentError("empty evaluation split")
    if len(gold) != len(predicted):
        raise SentimentError("gold/predicted length mismatch")
    per_class = {}
    for label in ABSA_LABELS:
        tp = sum(1 for g, p in zip(gold, predicted) if g == label and p == label)
        fp = sum(1 for g, p in zip(gold, predicted) if g != label and p == label)
        fn = sum(1 for g, p in zip(gold, predicted) if g == label and p != label)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = ClassScores(precision, recall, f1, support=tp + fn)
    accuracy = sum(1 for g, p in zip(gold, predicted) if g == p) / len(gold)
    macro_f1 = sum(c.f1 for c in per_class.values()) / len(per_class)
    return SentimentMetrics(accuracy=accuracy, macro_f1=macro_f1, per_class=per_class)


def predict_rows(rows: Iterable[SentimentRow], provider) -> list[str]:
    return [provider.classify(row.tokens, (row.start, row.end))[0] for row in rows]
