"""SOC taxonomy parsing and WordNet-driven expansion.

Pipeline: parse the SOC CSV, derive candidate titles by cumulative suffix
splitting, attach person/group synsets (plus hyponyms, minus curated
removals), expand synonyms into new titles, and map titles to SOC major
groups either automatically (unique match) or through the manual curation
map. Unresolved (title, synset) pairs land in a pending-curation report and
are never mapped silently.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .wordnet import (GROUP_LEXNAME, PERSON_LEXNAME, SynsetId, WordNetError,
                      WordNetStore, hyponym_closure, normalize_lemma, synsets_of)

TAXONOMY_SCHEMA = "profmedia-taxonomy/1"

_DATA_DIR = Path(__file__).parent / "data"
_SOC_CODE_RE = re.compile(r"^\d{2}-\d{4}$")

DEFAULT_SOC_COLUMNS = {
    "major_code": "major_code", "major_name": "major_name",
    "minor_code": "minor_code", "minor_name": "minor_name",
    "broad_code": "broad_code", "broad_name": "broad_name",
    "detailed_code": "detailed_code", "detailed_name": "detailed_name",
    "title": "title",
}


class TaxonomyError(Exception):
    pass


@dataclass(frozen=True)
class SocEntry:
    major_code: str
    major_name: str
    minor_code: str
    minor_name: str
    broad_code: str
    broad_name: str
    detailed_code: str
    detailed_name: str
    title: str


def parse_soc(path: str | Path, columns: dict[str, str] | None = None) -> list[SocEntry]:
    """Parse the SOC CSV; duplicate titles across detailed groups stay distinct."""
    columns = dict(DEFAULT_SOC_COLUMNS, **(columns or {}))
    path = Path(path)
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in columns.values() if col not in header]
        if missing:
            raise TaxonomyError(f"{path}: missing columns {missing}")
        for lineno, row in enumerate(reader, 2):
            title = (row[columns["title"]] or "").strip()
            if not title:
                raise TaxonomyError(f"{path}:{lineno}: empty profession title")
            codes = {tier: (row[columns[f"{tier}_code"]] or "").strip()
                     for tier in ("major", "minor", "broad", "detailed")}
            for tier, code in codes.items():
                if not _SOC_CODE_RE.match(code):
                    raise TaxonomyError(f"{path}:{lineno}: malformed {tier} code {code!r}")
            prefix = codes["major"][:2]
            if any(not code.startswith(prefix) for code in codes.values()):
                raise TaxonomyError(
                    f"{path}:{lineno}: tier codes disagree on major prefix {prefix!r}")
            entries.append(SocEntry(
                major_code=codes["major"], major_name=row[columns["major_name"]].strip(),
                minor_code=codes["minor"], minor_name=row[columns["minor_name"]].strip(),
                broad_code=codes["broad"], broad_name=row[columns["broad_name"]].strip(),
                detailed_code=codes["detailed"], detailed_name=row[columns["detailed_name"]].strip(),
                title=title))
    return entries


def _load_word_list(path: Path) -> frozenset[str]:
    words = set()
    for line in path.read_text("utf-8").splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


def split_stoplist() -> frozenset[str]:
    """Conjunctions/prepositions that block suffix splitting (shipped config)."""
    return _load_word_list(_DATA_DIR / "split_stoplist.txt")


_PUNCT_RE = re.compile(r"[^\w\s]")
MAX_SPLIT_WORDS = 5
MAX_ABBREV_LEN = 6


def candidate_substrings(title: str, stoplist: frozenset[str] | None = None) -> list[str]:
    """Cumulative end-joined suffixes of a title, shortest first.

    Returns [] when the title contains a conjunction, preposition or
    punctuation, is an abbreviation (every letter uppercase, short), or has
    more than five words. A one-word title yields no candidates.
    """
    if stoplist is None:
        stoplist = split_stoplist()
    words = title.split()
    letters = [c for c in title if c.isalpha()]
    if (
        len(words) > MAX_SPLIT_WORDS
        or _PUNCT_RE.search(title)
        or (letters and all(c.isupper() for c in letters) and len(title) <= MAX_ABBREV_LEN)
        or any(w.lower() in stoplist for w in words)
    ):
        return []
    return [" ".join(words[start:]) for start in range(len(words) - 1, 0, -1)]


@dataclass
class CurationList:
    """File-driven record of the manual curation steps."""
    removed_synsets: frozenset[SynsetId] = frozenset()
    manual_soc_map: dict[tuple[str, SynsetId], str] = field(default_factory=dict)

    def validate(self) -> None:
        referenced = {sid for (_, sid) in self.manual_soc_map}
        overlap = self.removed_synsets & referenced
        if overlap:
            raise TaxonomyError(f"curation conflict: removed synsets also mapped: {sorted(overlap)}")


def load_curation(store: WordNetStore,
                  removed_path: str | Path | None = None,
                  manual_map_path: str | Path | None = None) -> CurationList:
    """Load curation files (defaults to the shipped starter files).

    removed file: one synset display name per line, '#' comments allowed.
    manual map: TSV of title, synset name, SOC major group code.
    """
    if removed_path is None:
        removed_path = _DATA_DIR / "curation" / "removed_synsets.txt"
    if manual_map_path is None:
        manual_map_path = _DATA_DIR / "curation" / "manual_soc_map.tsv"

    removed = set()
    for lineno, line in enumerate(Path(removed_path).read_text("utf-8").splitlines(), 1):
        name = line.split("#", 1)[0].strip()
        if not name:
            continue
        try:
            removed.add(store.resolve(name))
        except WordNetError:
            raise TaxonomyError(f"{removed_path}:{lineno}: unknown synset {name!r}")

    manual: dict[tuple[str, SynsetId], str] = {}
    for lineno, line in enumerate(Path(manual_map_path).read_text("utf-8").splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split("\t")
        if len(parts) != 3:
            raise TaxonomyError(f"{manual_map_path}:{lineno}: expected 3 tab-separated fields")
        title, name, code = (p.strip() for p in parts)
        if not _SOC_CODE_RE.match(code):
            raise TaxonomyError(f"{manual_map_path}:{lineno}: malformed SOC code {code!r}")
        try:
            sid = store.resolve(name)
        except WordNetError:
            raise TaxonomyError(f"{manual_map_path}:{lineno}: unknown synset {name!r}")
        manual[(title.lower(), sid)] = code

    curation = CurationList(removed_synsets=frozenset(removed), manual_soc_map=manual)
    curation.validate()
    return curation


PROFESSIONAL_LEXNAMES = frozenset({PERSON_LEXNAME, GROUP_LEXNAME})


def professional_synsets(candidates: set[str], store: WordNetStore,
                         curation: CurationList) -> dict[str, set[SynsetId]]:
    """Person/group senses of each candidate, plus their hyponym closures.

    The lexname filter applies to hyponyms too, curated removals are
    subtracted everywhere, and candidates left with no synset are dropped.
    """
    result: dict[str, set[SynsetId]] = {}
    for candidate in candidates:
        key = candidate.lower()
        retained = [
            s for s in synsets_of(store, candidate)
            if s.lexname in PROFESSIONAL_LEXNAMES and s.id not in curation.removed_synsets
        ]
        pool = {s.id for s in retained}
        for synset in retained:
            for hypo in hyponym_closure(store, synset.id):
                entry = store.get(hypo)
                if entry.lexname in PROFESSIONAL_LEXNAMES and hypo not in curation.removed_synsets:
                    pool.add(hypo)
        if pool:
            result[key] = pool
    return result


@dataclass
class ExpandedTaxonomy:
    """Job titles linked to professional synsets and SOC major groups.

    Titles are keyed by lowercase form; ``titles`` maps to the display form.
    ``title_synsets`` is partial (titles without professional senses are
    absent), as is ``synset_soc`` (only curated/mapped senses).
    """
    wordnet_version: str
    titles: dict[str, str]
    title_synsets: dict[str, frozenset[SynsetId]]
    synset_soc: dict[SynsetId, str]
    provenance: dict[str, str]

    def soc_groups_of(self, title: str) -> set[str]:
        return {self.synset_soc[s] for s in self.title_synsets.get(title.lower(), ())
                if s in self.synset_soc}

    def titles_of_group(self, code: str) -> list[str]:
        return sorted(t for t in self.titles if code in self.soc_groups_of(t))


def _display_form(lemma: str) -> str:
    return " ".join(part.capitalize() for part in lemma.replace("_", " ").split())


def synonym_expand(title_synsets: dict[str, set[SynsetId]], store: WordNetStore,
                   soc_entries: list[SocEntry]) -> ExpandedTaxonomy:
    """Turn every lemma of every professional synset into a job title.

    The result unions the original SOC titles (provenance ``soc``), the
    surviving split candidates (``substring``) and lemma-derived titles
    (``synonym``); each title is then linked to the professional synsets that
    carry it as a lemma.
    """
    titles: dict[str, str] = {}
    provenance: dict[str, str] = {}
    for entry in soc_entries:
        key = entry.title.lower()
        if key not in titles:
            titles[key] = entry.title
            provenance[key] = "soc"
    for candidate in title_synsets:
        if candidate not in titles:
            titles[candidate] = _display_form(candidate)
            provenance[candidate] = "substring"

    pool = sorted({sid for sids in title_synsets.values() for sid in sids})
    lemma_map: dict[str, set[SynsetId]] = {}
    for sid in pool:
        for lemma in store.get(sid).lemmas:
            key = lemma.replace("_", " ").lower()
            lemma_map.setdefault(key, set()).add(sid)
            if key not in titles:
                titles[key] = _display_form(lemma)
                provenance[key] = "synonym"

    final_synsets = {
        title: frozenset(lemma_map[title]) for title in titles if title in lemma_map
    }
    return ExpandedTaxonomy(
        wordnet_version=store.version,
        titles=titles,
        title_synsets=final_synsets,
        synset_soc={},
        provenance=provenance,
    )


def _word_contains(haystack_title: str, needle_words: list[str]) -> bool:
    words = [w.lower() for w in haystack_title.split()]
    n = len(needle_words)
    return any(words[i:i + n] == needle_words for i in range(len(words) - n + 1))


@dataclass(frozen=True)
class PendingCuration:
    title: str
    synset: str
    candidate_groups: tuple[str, ...]
    reason: str


def map_to_soc(taxonomy: ExpandedTaxonomy, soc_entries: list[SocEntry],
               curation: CurationList, top_titles: list[str],
               store: WordNetStore) -> list[PendingCuration]:
    """Assign SOC major groups to the synsets of the given titles, in place.

    A title whose word sequence occurs in the titles of exactly one SOC major
    group is mapped automatically; otherwise each synset falls back to the
    manual curation map. Returns the pending-curation report rows for
    everything that stayed unresolved.
    """
    pending: list[PendingCuration] = []
    for raw_title in top_titles:
        title = raw_title.lower()
        if title not in taxonomy.titles:
            raise TaxonomyError(f"title not in taxonomy: {raw_title!r}")
        words = title.split()
        groups = sorted({e.major_code for e in soc_entries if _word_contains(e.title, words)})
        synsets = sorted(taxonomy.title_synsets.get(title, frozenset()))
        for sid in synsets:
            if len(groups) == 1:
                code = groups[0]
            else:
                code = curation.manual_soc_map.get((title, sid))
            if code is None:
                reason = "no SOC match" if not groups else f"{len(groups)} SOC groups match"
                pending.append(PendingCuration(title, store.name_of(sid), tuple(groups), reason))
                continue
            existing = taxonomy.synset_soc.get(sid)
            if existing is not None and existing != code:
                pending.append(PendingCuration(
                    title, store.name_of(sid), (existing, code),
                    "conflicting group assignment"))
                continue
            taxonomy.synset_soc[sid] = code
    return pending


# --- serialization ---------------------------------------------------------

def taxonomy_to_json(taxonomy: ExpandedTaxonomy, store: WordNetStore) -> dict:
    rows = []
    for title in sorted(taxonomy.titles):
        synsets = sorted(store.name_of(s) for s in taxonomy.title_synsets.get(title, frozenset()))
        rows.append({
            "title": title,
            "display": taxonomy.titles[title],
            "provenance": taxonomy.provenance[title],
            "synsets": synsets,
        })
    return {
        "schema": TAXONOMY_SCHEMA,
        "wordnet_version": taxonomy.wordnet_version,
        "titles": rows,
        "synset_soc": {store.name_of(s): code
                       for s, code in sorted(taxonomy.synset_soc.items())},
    }


def save_taxonomy(taxonomy: ExpandedTaxonomy, store: WordNetStore, path: str | Path) -> None:
    doc = taxonomy_to_json(taxonomy, store)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
                          "utf-8")


def load_taxonomy(path: str | Path, store: WordNetStore) -> ExpandedTaxonomy:
    doc = json.loads(Path(path).read_text("utf-8"))
    if doc.get("schema") != TAXONOMY_SCHEMA:
        raise TaxonomyError(f"{path}: unsupported taxonomy schema {doc.get('schema')!r}")
    if doc.get("wordnet_version") != store.version:
        raise TaxonomyError(
            f"{path}: taxonomy built against WordNet {doc.get('wordnet_version')!r}, "
            f"store is {store.version!r}")
    titles, provenance, title_synsets = {}, {}, {}
    for row in doc["titles"]:
        titles[row["title"]] = row["display"]
        provenance[row["title"]] = row["provenance"]
        if row["synsets"]:
            title_synsets[row["title"]] = frozenset(store.resolve(n) for n in row["synsets"])
    synset_soc = {store.resolve(name): code for name, code in doc["synset_soc"].items()}
    return ExpandedTaxonomy(
        wordnet_version=doc["wordnet_version"],
        titles=titles, title_synsets=title_synsets,
        synset_soc=synset_soc, provenance=provenance,
    )
