"""Inverted index over the corpus and job-title mention retrieval.

Titles are matched as exact consecutive token sequences, in singular and
rule-pluralized form. Matches inside structurally excluded regions
(parenthesized spans, speaker prefixes, lyric sentences) are dropped, and a
match is suppressed when a longer taxonomy title ending at the same token
also matches there.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable

from .corpus import Corpus, Sentence

_DATA_DIR = Path(__file__).parent / "data"

SIBILANT_ENDINGS = ("s", "x", "z", "ch", "sh")
VOWELS = set("aeiou")


class SearchError(Exception):
    pass


@lru_cache(maxsize=1)
def plural_exceptions() -> dict[str, str]:
    table = {}
    for line in (_DATA_DIR / "plural_exceptions.tsv").read_text("utf-8").splitlines():
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        singular, plural = body.split("\t")
        table[singular.strip().lower()] = plural.strip().lower()
    return table


def pluralize(title: str, exceptions: dict[str, str] | None = None) -> str:
    """English plural of a job title, applied to the head (last) word."""
    if not title:
        raise ValueError("title must be nonempty")
    if exceptions is None:
        exceptions = plural_exceptions()
    lowered = title.lower()
    if lowered in exceptions:
        return exceptions[lowered]
    words = lowered.split()
    head = words[-1]
    if head in exceptions:
        plural = exceptions[head]
    elif head.endswith("man"):
        plural = head[:-3] + "men"
    elif head.endswith(SIBILANT_ENDINGS):
        plural = head + "es"
    elif head.endswith("y") and len(head) > 1 and head[-2] not in VOWELS:
        plural = head[:-1] + "ies"
    else:
        plural = head + "s"
    return " ".join(words[:-1] + [plural])


@dataclass
class InvertedIndex:
    """token -> postings sorted by (document, sentence, position)."""
    postings: dict[str, list[tuple[str, int, int]]] = field(default_factory=dict)

    @property
    def vocabulary_size(self) -> int:
        return len(self.postings)

    @property
    def posting_count(self) -> int:
        return sum(len(p) for p in self.postings.values())

    def lookup(self, token: str) -> list[tuple[str, int, int]]:
        return self.postings.get(token.lower(), [])


def build_index(corpus: Corpus) -> InvertedIndex:
    index = InvertedIndex()
    for doc_id in corpus.doc_ids():
        doc = corpus.documents[doc_id]
        for sentence in doc.sentences:
            for pos, token in enumerate(sentence.tokens):
                index.postings.setdefault(token, []).append((doc_id, sentence.index, pos))
    for plist in index.postings.values():
        plist.sort()
    return index


@dataclass(frozen=True)
class RawMention:
    doc: str
    sentence: int
    start: int
    end: int            # exclusive
    title: str
    surface: str
    plural: bool

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


def _overlaps(a_start: int, a_end: int, b_start: int, b_end: int) -> bool:
    return a_start < b_end and b_start < a_end


def span_excluded(sentence: Sentence, start: int, end: int) -> bool:
    """True when [start, end) falls in a structurally excluded region."""
    if sentence.lyric:
        return True
    if sentence.speaker_prefix_end is not None and start < sentence.speaker_prefix_end:
        return True
    return any(_overlaps(start, end, s, e) for s, e in sentence.paren_spans)


def _match_at(tokens: tuple[str, ...], pos: int, form: tuple[str, ...]) -> bool:
    return tokens[pos:pos + len(form)] == form


class MentionSearcher:
    """Index-backed title search over a tokenized corpus.

    The taxonomy's full title set drives longest-match suppression: an
    "estate agent" match is dropped where "real estate agent" also matches
    and ends at the same token.
    """

    def __init__(self, index: InvertedIndex, corpus: Corpus, titles: Iterable[str]):
        self.index = index
        self.corpus = corpus
        self.titles = {t.lower() for t in titles}
        self._forms: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {}
        for title in self.titles:
            singular = tuple(title.split())
            plural = tuple(pluralize(title).split())
            self._forms[title] = (singular, plural)
        # title -> longer titles having it as a word suffix
        self._suffix_parents: dict[str, list[str]] = {t: [] for t in self.titles}
        for title in self.titles:
            words = tuple(title.split())
            for other in self.titles:
                other_words = tuple(other.split())
                if len(other_words) > len(words) and other_words[-len(words):] == words:
                    self._suffix_parents[title].append(other)

    def search_title(self, title: str) -> list[RawMention]:
        """All unsuppressed singular and plural mentions of a taxonomy title."""
        key = title.lower()
        if key not in self.titles:
            raise SearchError(f"unknown title {key!r}")
        mentions = []
        seen: set[tuple[str, int, int, int]] = set()
        singular, plural = self._forms[key]
        for form, is_plural in ((singular, False), (plural, True)):
            if is_plural and form == singular:
                continue
            for doc_id, sent_idx, pos in self.index.lookup(form[0]):
                sentence = self.corpus.documents[doc_id].sentences[sent_idx]
                end = pos + len(form)
                if end > len(sentence.tokens) or not _match_at(sentence.tokens, pos, form):
                    continue
                if span_excluded(sentence, pos, end):
                    continue
                if self._suppressed(sentence, key, pos, end):
                    continue
                mention_key = (doc_id, sent_idx, pos, end)
                if mention_key in seen:
                    continue
                seen.add(mention_key)
                mentions.append(RawMention(
                    doc=doc_id, sentence=sent_idx, start=pos, end=end, title=key,
                    surface=" ".join(sentence.tokens[pos:end]), plural=is_plural))
        mentions.sort(key=lambda m: (m.doc, m.sentence, m.start, m.end))
        return mentions

    def _suppressed(self, sentence: Sentence, title: str, start: int, end: int) -> bool:
        for parent in self._suffix_parents[title]:
            for form in self._forms[parent]:
                parent_start = end - len(form)
                if parent_start < 0 or parent_start >= start:
                    continue
                if _match_at(sentence.tokens, parent_start, form):
                    return True
        return False

    def search_all(self, titles: Iterable[str] | None = None) -> list[RawMention]:
        results = []
        for title in sorted(self.titles if titles is None else {t.lower() for t in titles}):
            results.extend(self.search_title(title))
        results.sort(key=lambda m: (m.doc, m.sentence, m.start, m.end, m.title))
        return results


MENTION_COLUMNS = ("doc", "imdb_id", "year", "sentence", "start", "end",
                   "title", "surface", "plural")


def write_mentions_csv(mentions: list[RawMention], corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MENTION_COLUMNS)
        for m in mentions:
            attrs = corpus.documents[m.doc].attrs
            writer.writerow([m.doc, attrs.imdb_id, attrs.year, m.sentence,
                             m.start, m.end, m.title, m.surface, int(m.plural)])
