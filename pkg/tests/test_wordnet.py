import os
import random
from pathlib import Path

import pytest

from profmedia.wordnet import (PERSON_LEXNAME, SynsetId, WordNetError, hyponym_closure,
                               load_store, load_wordnet, save_store, synsets_of)

FIXTURES = Path(__file__).parent / "fixtures"

# Independent oracle: raw line/pointer walk over data.noun, no store involved.


def _raw_graph():
    hypo, names = {}, {}
    for line in (FIXTURES / "wordnet" / "data.noun").read_text().splitlines():
        if line.startswith(" ") or not line.strip():
            continue
        f = line.split(" ")
        off, wcnt = int(f[0]), int(f[3], 16)
        p = 4 + 2 * wcnt
        pcnt = int(f[p]); p += 1
        targets = []
        for _ in range(pcnt):
            if f[p] == "~":
                targets.append(int(f[p + 1]))
            p += 4
        hypo[off] = targets
        names[off] = f[4]
    return hypo, names


def _oracle_closure(hypo, start):
    seen = set()
    stack = list(hypo[start])
    while stack:
        cur = stack.pop()
        if cur not in seen:
            seen.add(cur)
            stack.extend(hypo[cur])
    seen.discard(start)
    return seen


def test_fixture_synset_count_matches_line_count(wn_store):
    hypo, _ = _raw_graph()
    assert len(wn_store) == len(hypo) == 49


def test_conductor_has_exactly_three_senses(wn_store):
    senses = synsets_of(wn_store, "conductor")
    assert len(senses) == 3
    assert [wn_store.name_of(s.id) for s in senses] == \
        ["conductor.n.01", "conductor.n.02", "conductor.n.03"]


def test_conductor_second_sense_is_substance(wn_store):
    senses = synsets_of(wn_store, "conductor")
    assert senses[1].lexname == "noun.substance"
    assert "conducts" in senses[1].gloss


def test_unknown_lemma_gives_empty_list(wn_store):
    assert synsets_of(wn_store, "zzzznotaword") == []


def test_doctor_first_sense_is_person(wn_store):
    senses = synsets_of(wn_store, "doctor")
    assert senses and senses[0].lexname == PERSON_LEXNAME


def test_lookup_normalizes_case_and_spaces(wn_store):
    assert synsets_of(wn_store, "Music Director") == synsets_of(wn_store, "music_director")
    assert synsets_of(wn_store, "VET") == synsets_of(wn_store, "vet")


def test_empty_lemma_rejected(wn_store):
    with pytest.raises(ValueError):
        synsets_of(wn_store, "")


def test_doctor_closure_contains_specialists(wn_store):
    doctor = wn_store.resolve("doctor.n.01")
    closure = hyponym_closure(wn_store, doctor)
    names = {wn_store.name_of(s) for s in closure}
    assert {"surgeon.n.01", "veterinarian.n.01"} <= names
    assert doctor not in closure


def test_leaf_closure_is_empty(wn_store):
    leaf = wn_store.resolve("allergist.n.01")
    assert hyponym_closure(wn_store, leaf) == set()


def test_closures_match_raw_walk_oracle(wn_store):
    hypo, _ = _raw_graph()
    rng = random.Random(7)
    offsets = rng.sample(sorted(hypo), min(100, len(hypo)))
    for off in offsets:
        sid = SynsetId("n", off)
        assert {s.offset for s in hyponym_closure(wn_store, sid)} == _oracle_closure(hypo, off)


def test_closure_is_one_step_expansion_fixed_point(wn_store):
    rng = random.Random(11)
    ids = rng.sample(sorted(wn_store.synsets), 20)
    for sid in ids:
        closure = hyponym_closure(wn_store, sid)
        expanded = set(closure)
        for member in closure:
            expanded.update(wn_store.get(member).hyponyms)
        expanded.discard(sid)
        assert expanded == closure


def test_unknown_id_raises(wn_store):
    with pytest.raises(WordNetError):
        hyponym_closure(wn_store, SynsetId("n", 99999999))


def test_link_symmetry_invariant(wn_store):
    for synset in wn_store.synsets.values():
        for target in synset.hyponyms:
            assert synset.id in wn_store.get(target).hypernyms
        for target in synset.hypernyms:
            assert synset.id in wn_store.get(target).hyponyms


def test_lemma_index_covers_exactly_stored_lemmas(wn_store):
    from profmedia.wordnet import normalize_lemma
    data_lemmas = {normalize_lemma(lemma)
                   for s in wn_store.synsets.values() for lemma in s.lemmas}
    assert data_lemmas == set(wn_store.lemma_index)


def test_name_resolution_roundtrip(wn_store):
    for sid in wn_store.synsets:
        assert wn_store.resolve(wn_store.name_of(sid)) == sid


def test_missing_files_error(tmp_path):
    with pytest.raises(WordNetError, match="missing"):
        load_wordnet(tmp_path)


def test_malformed_line_reports_position(tmp_path):
    (tmp_path / "data.noun").write_text("00000000 18 n zz broken\n")
    (tmp_path / "index.noun").write_text("")
    with pytest.raises(WordNetError, match=r"data\.noun:1"):
        load_wordnet(tmp_path)


def test_dangling_reference_detected(tmp_path):
    line = "00000000 18 n 01 doctor 0 001 ~ 00009999 n 0000 | a healer\n"
    (tmp_path / "data.noun").write_text(line)
    (tmp_path / "index.noun").write_text("doctor n 1 1 ~ 1 0 00000000\n")
    with pytest.raises(WordNetError, match="dangling"):
        load_wordnet(tmp_path)


def test_same_bytes_identical_snapshot(wn_store, tmp_path):
    a, b = tmp_path / "a.snap", tmp_path / "b.snap"
    save_store(wn_store, a)
    save_store(load_wordnet(FIXTURES / "wordnet"), b)
    assert a.read_bytes() == b.read_bytes()


def test_snapshot_roundtrip(wn_store, tmp_path):
    path = tmp_path / "store.snap"
    save_store(wn_store, path)
    loaded = load_store(path)
    assert len(loaded) == len(wn_store)
    assert loaded.lemma_index == wn_store.lemma_index
    sid = wn_store.resolve("conductor.n.01")
    assert loaded.get(sid).lemmas == wn_store.get(sid).lemmas
    assert loaded.get(sid).hyponyms == tuple(sorted(wn_store.get(sid).hyponyms))


@pytest.mark.skipif("PROFMEDIA_WORDNET_DIR" not in os.environ,
                    reason="full WordNet 3.0 noun database not bundled")
def test_full_wordnet_noun_count():
    store = load_wordnet(os.environ["PROFMEDIA_WORDNET_DIR"])
    assert len(store) == 82115
