"""Subtitle corpus ingestion.

Parses SubRip files into caption blocks, segments and tokenizes them into
sentences with structural flags (speaker prefixes, parenthesized spans,
lyric blocks), joins IMDb-style metadata and accumulates per-year word
n-gram totals for n = 1..5.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .snapshot import read_snapshot, write_snapshot

logger = logging.getLogger(__name__)

CORPUS_MAGIC = b"PMCS"
MAX_NGRAM = 5

TITLE_TYPES = ("movie", "tv_episode", "other")

# Conventional subtitle music markers; '#' counts only at a line edge.
LYRIC_MARKERS = ("♪", "♫")

_TAG_RE = re.compile(r"<[^>]*>")
_TIME_RE = re.compile(
    r"(\d{1,2}):(\d{2}):(\d{2})[,.](\d{1,3})\s*-->\s*(\d{1,2}):(\d{2}):(\d{2})[,.](\d{1,3})")
_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*|[^\w\s]", re.UNICODE)

TERMINALS = {".", "!", "?"}

# Dotted abbreviations that do not end a sentence.
ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "gen", "col", "sgt",
    "lt", "capt", "maj", "rev", "etc", "vs", "inc", "co", "corp", "ltd",
    "no", "mt", "ave",
}


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class CaptionBlock:
    index: int
    start_ms: int
    end_ms: int
    text: str
    lyric: bool


@dataclass(frozen=True)
class Sentence:
    """One tokenized sentence; ``tokens`` lowercase, ``orig`` as written."""
    index: int
    tokens: tuple[str, ...]
    orig: tuple[str, ...]
    paren_spans: tuple[tuple[int, int], ...] = ()
    speaker_prefix_end: int | None = None
    lyric: bool = False


@dataclass(frozen=True)
class MediaAttributes:
    imdb_id: str
    year: int
    title_type: str
    genres: frozenset[str]
    countries: frozenset[str]


@dataclass
class SubtitleDocument:
    attrs: MediaAttributes
    sentences: list[Sentence]


@dataclass
class NgramTotals:
    """Per (year, n) counts of word n-grams, n = 1..5."""
    counts: dict[tuple[int, int], int] = field(default_factory=dict)

    def total(self, year: int, n: int) -> int:
        return self.counts.get((year, n), 0)

    def add(self, year: int, n: int, amount: int) -> None:
        if amount:
            self.counts[(year, n)] = self.counts.get((year, n), 0) + amount

    def merge(self, other: "NgramTotals") -> "NgramTotals":
        for key, value in other.counts.items():
            self.counts[key] = self.counts.get(key, 0) + value
        return self

    def years(self) -> list[int]:
        return sorted({year for (year, _) in self.counts})


# --- SRT parsing -----------------------------------------------------------

def _read_subtitle_text(path: Path) -> str:
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        text = raw.decode("latin-1")
    return text.lstrip("﻿")


def _is_lyric_text(lines: Sequence[str]) -> bool:
    for line in lines:
        if any(marker in line for marker in LYRIC_MARKERS):
            return True
        stripped = line.strip()
        if stripped.startswith("#") or stripped.endswith("#"):
            return True
    return False


def parse_srt(path: str | Path) -> list[CaptionBlock]:
    """Parse a SubRip file into ordered caption blocks.

    HTML-like tags are stripped; blocks with unparseable timestamps are
    skipped with a warning; an empty file yields an empty list.
    """
    path = Path(path)
    text = _read_subtitle_text(path)
    blocks: list[CaptionBlock] = []
    for chunk in re.split(r"\n\s*\n", text):
        lines = [line.strip() for line in chunk.splitlines()]
        lines = [line for line in lines if line]
        if not lines:
            continue
        cursor = 0
        if _TIME_RE.search(lines[0]) is None and lines[0].lstrip("-").isdigit():
            cursor = 1
        if cursor >= len(lines):
            continue
        match = _TIME_RE.search(lines[cursor])
        if match is None:
            logger.warning("%s: skipping block with bad timestamp: %r", path, lines[cursor][:60])
            continue
        h1, m1, s1, ms1, h2, m2, s2, ms2 = (int(g) for g in match.groups())
        text_lines = [_TAG_RE.sub("", line) for line in lines[cursor + 1:]]
        text_lines = [line for line in (l.strip() for l in text_lines) if line]
        blocks.append(CaptionBlock(
            index=len(blocks) + 1,
            start_ms=((h1 * 60 + m1) * 60 + s1) * 1000 + ms1,
            end_ms=((h2 * 60 + m2) * 60 + s2) * 1000 + ms2,
            text=" ".join(text_lines),
            lyric=_is_lyric_text(text_lines),
        ))
    return blocks


# --- segmentation and tokenization ------------------------------------------

_HYPHEN_RE = re.compile(r"(?<=[^\W_])-(?=[^\W_])")


def _block_tokens(block: CaptionBlock) -> list[str]:
    # Intra-word hyphens separate tokens so "flight-attendant" matches the
    # two-word title form; other punctuation stays as its own token.
    return _TOKEN_RE.findall(_HYPHEN_RE.sub(" ", block.text))


def _is_word(token: str) -> bool:
    return any(ch.isalnum() for ch in token)


def _ends_sentence(orig_tokens: list[str], pos: int) -> bool:
    token = orig_tokens[pos]
    if token in ("!", "?"):
        return True
    if token != ".":
        return False
    # Guard dotted abbreviations and single-letter initials.
    if pos > 0:
        prev = orig_tokens[pos - 1]
        if prev.lower() in ABBREVIATIONS or (len(prev) == 1 and prev.isalpha()):
            return False
    return True


def _speaker_prefix_end(orig: Sequence[str]) -> int | None:
    # At most 3 capitalized word tokens, then ':'.
    limit = min(len(orig), 4)
    for pos in range(limit):
        token = orig[pos]
        if token == ":":
            return pos + 1 if pos > 0 else None
        if not (_is_word(token) and token[0].isupper()):
            return None
    return None


def _paren_spans(orig: Sequence[str]) -> tuple[tuple[int, int], ...]:
    spans = []
    stack: list[int] = []
    closer = {")": "(", "]": "["}
    for pos, token in enumerate(orig):
        if token in ("(", "["):
            stack.append(pos)
        elif token in closer and stack:
            start = stack.pop()
            if not stack:  # only outermost spans
                spans.append((start, pos + 1))
    return tuple(spans)


def segment_and_tokenize(blocks: Iterable[CaptionBlock]) -> list[Sentence]:
    """Split caption blocks into sentences of lowercase tokens.

    Sentences end at terminal punctuation (with an abbreviation guard) and
    at a block boundary when the block's text lacks a terminal and the next
    block starts capitalized. A sentence overlapping a lyric block is
    flagged lyric as a whole.
    """
    stream: list[tuple[str, bool]] = []  # (orig token, block lyric flag)
    breaks: set[int] = set()             # indices after which a sentence must end
    blocks = list(blocks)
    for bi, block in enumerate(blocks):
        tokens = _block_tokens(block)
        if not tokens:
            continue
        stream.extend((tok, block.lyric) for tok in tokens)
        last = stream[-1][0]
        if last not in TERMINALS and bi + 1 < len(blocks):
            nxt = _block_tokens(blocks[bi + 1])
            if nxt and _is_word(nxt[0]) and nxt[0][0].isupper():
                breaks.add(len(stream) - 1)

    sentences: list[Sentence] = []
    current: list[tuple[str, bool]] = []
    orig_all = [tok for tok, _ in stream]

    def flush() -> None:
        if not current:
            return
        orig = tuple(tok for tok, _ in current)
        lyric = any(flag for _, flag in current)
        sentences.append(Sentence(
            index=len(sentences),
            tokens=tuple(tok.lower() for tok in orig),
            orig=orig,
            paren_spans=_paren_spans(orig),
            speaker_prefix_end=_speaker_prefix_end(orig),
            lyric=lyric,
        ))
        current.clear()

    for pos, item in enumerate(stream):
        current.append(item)
        if _ends_sentence(orig_all, pos) or pos in breaks:
            flush()
    flush()
    return sentences


# --- metadata ---------------------------------------------------------------

METADATA_COLUMNS = ("imdb_id", "year", "title_type", "genres", "countries")


def parse_metadata(path: str | Path) -> dict[str, MediaAttributes]:
    """Parse the tab-separated metadata file into per-id attributes."""
    path = Path(path)
    records: dict[str, MediaAttributes] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        header = reader.fieldnames or []
        missing = [c for c in METADATA_COLUMNS if c not in header]
        if missing:
            raise CorpusError(f"{path}: missing metadata columns {missing}")
        for lineno, row in enumerate(reader, 2):
            imdb_id = (row["imdb_id"] or "").strip()
            if not imdb_id:
                raise CorpusError(f"{path}:{lineno}: empty imdb_id")
            if imdb_id in records:
                raise CorpusError(f"{path}:{lineno}: duplicate imdb_id {imdb_id!r}")
            try:
                year = int(row["year"])
            except (TypeError, ValueError):
                raise CorpusError(f"{path}:{lineno}: non-integer year {row['year']!r}")
            title_type = (row["title_type"] or "").strip().lower()
            if title_type not in TITLE_TYPES:
                title_type = "other"
            genres = frozenset(g.strip() for g in (row["genres"] or "").split(",") if g.strip())
            countries = frozenset(c.strip() for c in (row["countries"] or "").split(",") if c.strip())
            records[imdb_id] = MediaAttributes(imdb_id, year, title_type, genres, countries)
    return records


# --- n-gram totals ----------------------------------------------------------

def sentence_word_count(sentence: Sentence) -> int:
    return sum(1 for tok in sentence.tokens if _is_word(tok))


def count_ngrams(docs: Iterable[SubtitleDocument]) -> NgramTotals:
    """Word n-gram totals per year; sentence-bounded, punctuation excluded."""
    totals = NgramTotals()
    for doc in docs:
        year = doc.attrs.year
        for sentence in doc.sentences:
            words = sentence_word_count(sentence)
            for n in range(1, MAX_NGRAM + 1):
                totals.add(year, n, max(0, words - n + 1))
    return totals


def document_ngram_total(doc: SubtitleDocument, n: int) -> int:
    return sum(max(0, sentence_word_count(s) - n + 1) for s in doc.sentences)


# --- corpus container and snapshot -------------------------------------------

@dataclass
class Corpus:
    documents: dict[str, SubtitleDocument]
    totals: NgramTotals

    def doc_ids(self) -> list[str]:
        return sorted(self.documents)


def ingest_corpus(srt_dir: str | Path, metadata_path: str | Path) -> Corpus:
    """Parse every ``<imdb_id>.srt`` under ``srt_dir`` with metadata joined.

    Subtitle files without a metadata row are an error; metadata rows without
    a subtitle file are ignored (the metadata may describe a larger universe).
    """
    srt_dir = Path(srt_dir)
    metadata = parse_metadata(metadata_path)
    documents: dict[str, SubtitleDocument] = {}
    for path in sorted(srt_dir.glob("*.srt")):
        imdb_id = path.stem
        attrs = metadata.get(imdb_id)
        if attrs is None:
            raise CorpusError(f"{path}: no metadata row for {imdb_id!r}")
        sentences = segment_and_tokenize(parse_srt(path))
        documents[imdb_id] = SubtitleDocument(attrs=attrs, sentences=sentences)
    return Corpus(documents=documents, totals=count_ngrams(documents.values()))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    records: list[dict] = [{
        "kind": "corpus",
        "documents": len(corpus.documents),
    }]
    for imdb_id in corpus.doc_ids():
        doc = corpus.documents[imdb_id]
        records.append({
            "imdb_id": imdb_id,
            "year": doc.attrs.year,
            "title_type": doc.attrs.title_type,
            "genres": sorted(doc.attrs.genres),
            "countries": sorted(doc.attrs.countries),
            "sentences": [
                {
                    "tokens": list(s.tokens),
                    "orig": list(s.orig),
                    "paren": [list(span) for span in s.paren_spans],
                    "speaker": s.speaker_prefix_end,
                    "lyric": s.lyric,
                }
                for s in doc.sentences
            ],
        })
    records.append({
        "totals": sorted([year, n, count] for (year, n), count in corpus.totals.counts.items()),
    })
    write_snapshot(path, CORPUS_MAGIC, records)


def load_corpus(path: str | Path) -> Corpus:
    records = read_snapshot(path, CORPUS_MAGIC)
    documents: dict[str, SubtitleDocument] = {}
    for row in records[1:-1]:
        sentences = [
            Sentence(
                index=i,
                tokens=tuple(s["tokens"]),
                orig=tuple(s["orig"]),
                paren_spans=tuple(tuple(span) for span in s["paren"]),
                speaker_prefix_end=s["speaker"],
                lyric=s["lyric"],
            )
            for i, s in enumerate(row["sentences"])
        ]
        attrs = MediaAttributes(
            imdb_id=row["imdb_id"], year=row["year"], title_type=row["title_type"],
            genres=frozenset(row["genres"]), countries=frozenset(row["countries"]))
        documents[row["imdb_id"]] = SubtitleDocument(attrs=attrs, sentences=sentences)
    totals = NgramTotals()
    for year, n, count in records[-1]["totals"]:
        totals.add(year, n, count)
    return Corpus(documents=documents, totals=totals)


def corpus_stats_rows(corpus: Corpus) -> dict[str, list[tuple]]:
    """Counts per year/type, per genre, and per country, as CSV-ready rows."""
    by_year: dict[tuple[int, str], int] = {}
    by_genre: dict[str, int] = {}
    by_country: dict[str, int] = {}
    for doc in corpus.documents.values():
        key = (doc.attrs.year, doc.attrs.title_type)
        by_year[key] = by_year.get(key, 0) + 1
        for genre in doc.attrs.genres:
            by_genre[genre] = by_genre.get(genre, 0) + 1
        for country in doc.attrs.countries:
            by_country[country] = by_country.get(country, 0) + 1
    return {
        "by_year": [(y, t, c) for (y, t), c in sorted(by_year.items())],
        "by_genre": sorted(by_genre.items()),
        "by_country": sorted(by_country.items()),
    }
