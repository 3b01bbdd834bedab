"""WordNet noun database parsing and an immutable in-memory synset store.

Reads the WNDB-format ``index.noun`` and ``data.noun`` files (plus the
``lexnames`` table when present) and exposes lemma lookup, lexname filtering
and hyponym traversal. Only the noun database is loaded. The store is
immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

from .snapshot import read_snapshot, write_snapshot

WORDNET_MAGIC = b"PMWS"

# Lexicographer file numbers, fixed across WordNet 3.x distributions. A
# lexnames file in the data directory overrides this table when present.
LEXNAMES = {
    0: "adj.all", 1: "adj.pert", 2: "adv.all", 3: "noun.Tops", 4: "noun.act",
    5: "noun.animal", 6: "noun.artifact", 7: "noun.attribute", 8: "noun.body",
    9: "noun.cognition", 10: "noun.communication", 11: "noun.event",
    12: "noun.feeling", 13: "noun.food", 14: "noun.group", 15: "noun.location",
    16: "noun.motive", 17: "noun.object", 18: "noun.person",
    19: "noun.phenomenon", 20: "noun.plant", 21: "noun.possession",
    22: "noun.process", 23: "noun.quantity", 24: "noun.relation",
    25: "noun.shape", 26: "noun.state", 27: "noun.substance", 28: "noun.time",
    29: "verb.body", 30: "verb.change", 31: "verb.cognition",
    32: "verb.communication", 33: "verb.competition", 34: "verb.consumption",
    35: "verb.contact", 36: "verb.creation", 37: "verb.emotion",
    38: "verb.motion", 39: "verb.perception", 40: "verb.possession",
    41: "verb.social", 42: "verb.stative", 43: "verb.weather", 44: "adj.ppl",
}

PERSON_LEXNAME = "noun.person"
GROUP_LEXNAME = "noun.group"


class WordNetError(Exception):
    """Malformed database file, dangling reference or unknown synset."""


class SynsetId(NamedTuple):
    pos: str
    offset: int

    def __str__(self) -> str:
        return f"{self.pos}{self.offset:08d}"


@dataclass(frozen=True)
class Synset:
    id: SynsetId
    lemmas: tuple[str, ...]          # file order, underscores denote spaces
    gloss: str
    examples: tuple[str, ...]
    lexname: str
    hyponyms: tuple[SynsetId, ...]
    hypernyms: tuple[SynsetId, ...]


def normalize_lemma(lemma: str) -> str:
    return lemma.strip().lower().replace(" ", "_")


@dataclass
class WordNetStore:
    """Immutable lookup structure over noun synsets.

    ``lemma_index`` maps each lowercase lemma to its synset ids in sense-rank
    (index file) order, which is also the order :func:`synsets_of` returns.
    """

    version: str
    synsets: dict[SynsetId, Synset]
    lemma_index: dict[str, tuple[SynsetId, ...]]
    _name_cache: dict[str, SynsetId] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.synsets)

    def get(self, sid: SynsetId) -> Synset:
        try:
            return self.synsets[sid]
        except KeyError:
            raise WordNetError(f"unknown synset id {sid}") from None

    def name_of(self, sid: SynsetId) -> str:
        """Canonical ``lemma.pos.index`` display name of a synset."""
        synset = self.get(sid)
        head = normalize_lemma(synset.lemmas[0])
        senses = self.lemma_index.get(head, ())
        try:
            rank = senses.index(sid) + 1
        except ValueError:
            raise WordNetError(f"synset {sid} missing from index entry of {head!r}")
        return f"{head}.{sid.pos}.{rank:02d}"

    def resolve(self, name: str) -> SynsetId:
        """Inverse of :meth:`name_of`; accepts names like ``conductor.n.02``."""
        if name in self._name_cache:
            return self._name_cache[name]
        try:
            lemma, pos, index = name.rsplit(".", 2)
            rank = int(index)
        except ValueError:
            raise WordNetError(f"malformed synset name {name!r}") from None
        senses = self.lemma_index.get(normalize_lemma(lemma), ())
        if pos != "n" or rank < 1 or rank > len(senses):
            raise WordNetError(f"no synset named {name!r}")
        sid = senses[rank - 1]
        self._name_cache[name] = sid
        return sid


def synsets_of(store: WordNetStore, lemma: str) -> list[Synset]:
    """All noun synsets of a lemma in sense-rank order; [] when unknown.

    Lookup is case-insensitive and spaces map to underscores, so
    ``"Train Conductor"`` and ``"train_conductor"`` are equivalent.
    """
    if not lemma:
        raise ValueError("lemma must be a nonempty string")
    ids = store.lemma_index.get(normalize_lemma(lemma), ())
    return [store.synsets[sid] for sid in ids]


def hyponym_closure(store: WordNetStore, sid: SynsetId) -> set[SynsetId]:
    """All synsets reachable through hyponym links, excluding the start."""
    start = store.get(sid)
    seen: set[SynsetId] = set()
    stack = list(start.hyponyms)
    while stack:
        current = stack.pop()
        if current in seen:
            continue
        seen.add(current)
        stack.extend(store.get(current).hyponyms)
    seen.discard(sid)
    return seen


# --- WNDB parsing ---------------------------------------------------------

def _read_lexnames(data_dir: Path) -> dict[int, str]:
    path = data_dir / "lexnames"
    if not path.exists():
        return dict(LEXNAMES)
    table = {}
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 2:
            raise WordNetError(f"{path}:{lineno}: malformed lexnames line")
        table[int(parts[0])] = parts[1]
    return table


def _data_lines(path: Path) -> Iterator[tuple[int, str]]:
    # License header lines begin with a space and are not synset records.
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.startswith(" "):
                continue
            yield lineno, line.rstrip("\n")


def _parse_data_line(path: Path, lineno: int, line: str,
                     lexnames: dict[int, str]) -> tuple[Synset, list[tuple[str, SynsetId]]]:
    fields = line.split(" ")
    try:
        offset = int(fields[0])
        lex_filenum = int(fields[1])
        ss_type = fields[2]
        w_cnt = int(fields[3], 16)
        pos = 4
        lemmas = []
        for _ in range(w_cnt):
            lemmas.append(fields[pos])
            int(fields[pos + 1], 16)  # lex_id, validated but unused
            pos += 2
        p_cnt = int(fields[pos])
        pos += 1
        pointers = []
        for _ in range(p_cnt):
            symbol = fields[pos]
            target = SynsetId(fields[pos + 2], int(fields[pos + 1]))
            pointers.append((symbol, target))
            pos += 4
    except (ValueError, IndexError):
        raise WordNetError(f"{path}:{lineno}: malformed data line") from None
    if ss_type != "n":
        raise WordNetError(f"{path}:{lineno}: non-noun synset type {ss_type!r} in noun file")
    if not lemmas:
        raise WordNetError(f"{path}:{lineno}: synset without words")
    if lex_filenum not in lexnames:
        raise WordNetError(f"{path}:{lineno}: unknown lexicographer file number {lex_filenum}")

    gloss = line.split("|", 1)[1].strip() if "|" in line else ""
    definition, examples = _split_gloss(gloss)
    synset = Synset(
        id=SynsetId("n", offset),
        lemmas=tuple(lemmas),
        gloss=definition,
        examples=tuple(examples),
        lexname=lexnames[lex_filenum],
        hyponyms=tuple(t for s, t in pointers if s == "~" and t.pos == "n"),
        hypernyms=tuple(t for s, t in pointers if s == "@" and t.pos == "n"),
    )
    return synset, pointers


def _split_gloss(gloss: str) -> tuple[str, list[str]]:
    parts = gloss.split('"')
    definition = parts[0].strip().rstrip(";").strip()
    examples = [parts[i].strip() for i in range(1, len(parts), 2) if parts[i].strip()]
    return definition, examples


def _parse_index_line(path: Path, lineno: int, line: str) -> tuple[str, list[SynsetId]]:
    fields = line.split()
    try:
        lemma, pos = fields[0], fields[1]
        synset_cnt = int(fields[2])
        p_cnt = int(fields[3])
        # p_cnt pointer symbols, then sense_cnt and tagsense_cnt, then offsets
        tail = fields[4 + p_cnt:]
        int(tail[0]), int(tail[1])
        offsets = [SynsetId(pos, int(raw)) for raw in tail[2:2 + synset_cnt]]
        if len(offsets) != synset_cnt:
            raise ValueError
    except (ValueError, IndexError):
        raise WordNetError(f"{path}:{lineno}: malformed index line") from None
    return lemma, offsets


def load_wordnet(data_dir: str | Path, version: str = "3.0") -> WordNetStore:
    """Parse ``index.noun``/``data.noun`` under ``data_dir`` into a store.

    Raises :class:`WordNetError` for missing files, malformed lines (reported
    with file and line number), dangling references, or index/data mismatch.
    """
    data_dir = Path(data_dir)
    data_path = data_dir / "data.noun"
    index_path = data_dir / "index.noun"
    for path in (data_path, index_path):
        if not path.exists():
            raise WordNetError(f"missing WordNet database file: {path}")
    lexnames = _read_lexnames(data_dir)

    synsets: dict[SynsetId, Synset] = {}
    first_line: dict[SynsetId, int] = {}
    for lineno, line in _data_lines(data_path):
        synset, _ = _parse_data_line(data_path, lineno, line, lexnames)
        if synset.id in synsets:
            raise WordNetError(f"{data_path}:{lineno}: duplicate synset offset {synset.id}")
        synsets[synset.id] = synset
        first_line[synset.id] = lineno

    # Every noun-POS link must land on a loaded synset, and hypo/hypernym
    # links must be symmetric.
    for synset in synsets.values():
        for target in synset.hyponyms + synset.hypernyms:
            if target not in synsets:
                raise WordNetError(
                    f"{data_path}:{first_line[synset.id]}: dangling reference "
                    f"{target} from {synset.id}")
        for target in synset.hyponyms:
            if synset.id not in synsets[target].hypernyms:
                raise WordNetError(
                    f"{data_path}: asymmetric link {synset.id} ~ {target}")
        for target in synset.hypernyms:
            if synset.id not in synsets[target].hyponyms:
                raise WordNetError(
                    f"{data_path}: asymmetric link {synset.id} @ {target}")

    lemma_index: dict[str, tuple[SynsetId, ...]] = {}
    for lineno, line in _data_lines(index_path):
        lemma, offsets = _parse_index_line(index_path, lineno, line)
        for sid in offsets:
            if sid not in synsets:
                raise WordNetError(f"{index_path}:{lineno}: dangling synset reference {sid}")
        lemma_index[normalize_lemma(lemma)] = tuple(offsets)

    data_lemmas = {normalize_lemma(lemma) for s in synsets.values() for lemma in s.lemmas}
    indexed = set(lemma_index)
    if data_lemmas != indexed:
        missing = sorted(data_lemmas ^ indexed)[:5]
        raise WordNetError(f"{index_path}: index/data lemma mismatch (first diffs: {missing})")

    return WordNetStore(version=version, synsets=synsets, lemma_index=lemma_index)


# --- snapshot export ------------------------------------------------------

def save_store(store: WordNetStore, path: str | Path) -> None:
    """Binary-stable export: identical stores produce identical bytes."""
    records: list[dict] = [{
        "kind": "wordnet-store",
        "wordnet_version": store.version,
        "synsets": len(store.synsets),
    }]
    for sid in sorted(store.synsets):
        s = store.synsets[sid]
        records.append({
            "offset": sid.offset,
            "pos": sid.pos,
            "lemmas": list(s.lemmas),
            "gloss": s.gloss,
            "examples": list(s.examples),
            "lexname": s.lexname,
            "hyponyms": [t.offset for t in sorted(s.hyponyms)],
            "hypernyms": [t.offset for t in sorted(s.hypernyms)],
        })
    records.append({
        "lemma_index": {lemma: [sid.offset for sid in ids]
                        for lemma, ids in sorted(store.lemma_index.items())},
    })
    write_snapshot(path, WORDNET_MAGIC, records)


def load_store(path: str | Path) -> WordNetStore:
    records = read_snapshot(path, WORDNET_MAGIC)
    header, rows, index_rec = records[0], records[1:-1], records[-1]
    synsets = {}
    for row in rows:
        sid = SynsetId(row["pos"], row["offset"])
        synsets[sid] = Synset(
            id=sid,
            lemmas=tuple(row["lemmas"]),
            gloss=row["gloss"],
            examples=tuple(row["examples"]),
            lexname=row["lexname"],
            hyponyms=tuple(SynsetId("n", o) for o in row["hyponyms"]),
            hypernyms=tuple(SynsetId("n", o) for o in row["hypernyms"]),
        )
    lemma_index = {lemma: tuple(SynsetId("n", o) for o in offsets)
                   for lemma, offsets in index_rec["lemma_index"].items()}
    return WordNetStore(version=header["wordnet_version"], synsets=synsets,
                        lemma_index=lemma_index)
