from __future__ import annotations

from pathlib import Path

import pytest

from profmedia.corpus import (CaptionBlock, Corpus, MediaAttributes, SubtitleDocument,
                              count_ngrams, segment_and_tokenize)
from profmedia.taxonomy import load_curation, parse_soc
from profmedia.wordnet import load_wordnet

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def wn_store():
    return load_wordnet(FIXTURES / "wordnet")


@pytest.fixture(scope="session")
def curation(wn_store):
    return load_curation(wn_store)


@pytest.fixture(scope="session")
def soc_entries():
    return parse_soc(FIXTURES / "soc_fixture.csv")


@pytest.fixture(scope="session")
def soc_golden_entries():
    return parse_soc(FIXTURES / "soc_golden.csv")


@pytest.fixture(scope="session")
def taxonomy(wn_store, curation, soc_entries):
    """Expanded + SOC-mapped taxonomy over the bundled SOC fixture."""
    from profmedia.taxonomy import (candidate_substrings, map_to_soc,
                                    professional_synsets, split_stoplist, synonym_expand)
    stop = split_stoplist()
    candidates = {e.title.lower() for e in soc_entries}
    for e in soc_entries:
        candidates.update(c.lower() for c in candidate_substrings(e.title, stop))
    tax = synonym_expand(professional_synsets(candidates, wn_store, curation),
                         wn_store, soc_entries)
    map_to_soc(tax, soc_entries, curation, sorted(tax.title_synsets), wn_store)
    return tax


def make_blocks(texts: list[str]) -> list[CaptionBlock]:
    blocks = []
    for i, text in enumerate(texts):
        start = 1000 * (i + 1)
        blocks.append(CaptionBlock(index=i + 1, start_ms=start, end_ms=start + 900,
                                   text=text, lyric=("♪" in text)))
    return blocks


def make_doc(imdb_id: str, year: int, texts: list[str], title_type: str = "movie",
             genres: tuple[str, ...] = ("Drama",),
             countries: tuple[str, ...] = ("United States",)) -> SubtitleDocument:
    attrs = MediaAttributes(imdb_id=imdb_id, year=year, title_type=title_type,
                            genres=frozenset(genres), countries=frozenset(countries))
    return SubtitleDocument(attrs=attrs, sentences=segment_and_tokenize(make_blocks(texts)))


def make_corpus(docs: list[SubtitleDocument]) -> Corpus:
    documents = {d.attrs.imdb_id: d for d in docs}
    return Corpus(documents=documents, totals=count_ngrams(documents.values()))


# Acceptance criteria get one visible pass/fail line each at the end of the run.
ACCEPTANCE_PREFIX = "tests/test_acceptance.py"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if ACCEPTANCE_PREFIX in nodeid and getattr(report, "when", "call") == "call":
                name = nodeid.split("::")[-1]
                lines.append((name, outcome.upper()))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, outcome in sorted(lines):
            terminalreporter.write_line(f"{outcome:7s} {name}")
