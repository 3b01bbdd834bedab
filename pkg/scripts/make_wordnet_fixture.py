#!/usr/bin/env python3
"""Generate the bundled WNDB-format noun database fixture.

Writes index.noun, data.noun and lexnames under tests/fixtures/wordnet/.
Synset offsets are real byte offsets into data.noun, computed in a second
pass once line lengths are known (offset fields are fixed-width, so the
substitution never changes a line's length).

Content is a 50-synset profession-focused subset with WordNet-3.0-style
lemmas and glosses, kept small enough to audit by hand. Regenerate with:

    python scripts/make_wordnet_fixture.py
"""

from __future__ import annotations

import sys
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "wordnet"

TOPS, FOOD, GROUP, PERSON, SUBSTANCE = 3, 13, 14, 18, 27

# key: (lex_filenum, words, gloss, hyponym keys)
SYNSETS: dict[str, tuple[int, list[str], str, list[str]]] = {
    "person": (TOPS, ["person", "individual", "someone", "somebody", "mortal", "soul"],
               'a human being; "there was too much for one person to do"',
               ["conductor1", "conductor3", "doctor", "cobbler1", "engineer1",
                "engineer2", "actor", "lawyer", "governor", "baker", "referee",
                "teacher", "hacker", "programmer", "waiter", "nurse", "singer",
                "musician", "astronaut", "farmer", "detective", "pilot", "tailor",
                "sheriff", "judge", "scientist", "cook", "guard", "banker",
                "policeman", "veteran"]),
    "group": (TOPS, ["group", "grouping"],
              "any number of entities (members) considered as a unit",
              ["orchestra", "crew"]),
    "substance": (TOPS, ["substance"],
                  "the real physical matter of which a person or thing consists",
                  ["conductor2"]),
    "pie": (FOOD, ["pie"], "dish baked in pastry-lined pan often with a pastry top",
            ["cobbler2"]),
    "conductor1": (PERSON, ["conductor", "music_director"],
                   "the person who leads a musical group",
                   ["bandleader", "bandmaster"]),
    "conductor2": (SUBSTANCE, ["conductor"],
                   "a substance that readily conducts e.g. electricity and heat", []),
    "conductor3": (PERSON, ["conductor"],
                   "the person who collects fares on a public conveyance",
                   ["conductress"]),
    "bandleader": (PERSON, ["bandleader"], "the leader of a dance band", []),
    "bandmaster": (PERSON, ["bandmaster"], "the conductor of a band", []),
    "conductress": (PERSON, ["conductress"], "a woman conductor", []),
    "doctor": (PERSON, ["doctor", "doc", "physician", "medico"],
               'a licensed medical practitioner; "I felt so bad I went to see my doctor"',
               ["surgeon", "veterinarian", "allergist"]),
    "surgeon": (PERSON, ["surgeon", "operating_surgeon", "sawbones"],
                "a physician who specializes in surgery", ["neurosurgeon"]),
    "veterinarian": (PERSON, ["veterinarian", "veterinary", "veterinary_surgeon", "vet"],
                     "a doctor who practices veterinary medicine", []),
    "allergist": (PERSON, ["allergist"],
                  "a physician skilled in the diagnosis and treatment of allergies", []),
    "neurosurgeon": (PERSON, ["neurosurgeon", "brain_surgeon"],
                     "someone who does surgery on the nervous system", []),
    "cobbler1": (PERSON, ["cobbler", "shoemaker"], "a person who makes or repairs shoes", []),
    "cobbler2": (FOOD, ["cobbler", "deep-dish_pie"],
                 "a pie made of fruit with rich biscuit dough usually only on top of the fruit", []),
    "engineer1": (PERSON, ["engineer", "applied_scientist", "technologist"],
                  "a person who uses scientific knowledge to solve practical problems", []),
    "engineer2": (PERSON, ["engineer", "locomotive_engineer", "railroad_engineer",
                           "engine_driver"],
                  "the driver of a railroad locomotive", []),
    "actor": (PERSON, ["actor", "histrion", "player", "thespian", "role_player"],
              "a theatrical performer", ["actress"]),
    "actress": (PERSON, ["actress"], "a female actor or performer", []),
    "lawyer": (PERSON, ["lawyer", "attorney"],
               "a professional person authorized to practice law; conducts lawsuits or gives legal advice", []),
    "governor": (PERSON, ["governor"], "the head of a state government", []),
    "baker": (PERSON, ["baker"], "someone who bakes commercially", []),
    "referee": (PERSON, ["referee", "ref"],
                "(sports) the chief official (as in boxing or American football) who is expected to ensure fair play", []),
    "teacher": (PERSON, ["teacher", "instructor"], "a person whose occupation is teaching", []),
    "hacker": (PERSON, ["hacker", "cyber-terrorist", "cyberpunk"],
               "a programmer who breaks into computer systems in order to steal or change or destroy information", []),
    "programmer": (PERSON, ["programmer", "computer_programmer", "coder", "software_engineer"],
                   "a person who designs and writes and tests computer programs", []),
    "waiter": (PERSON, ["waiter", "server"],
               "a person whose occupation is to serve at table (as in a restaurant)",
               ["waitress"]),
    "waitress": (PERSON, ["waitress"], "a woman waiter", []),
    "nurse": (PERSON, ["nurse"],
              "one skilled in caring for young children or the sick (usually under the supervision of a physician)", []),
    "singer": (PERSON, ["singer", "vocalist", "vocalizer", "vocaliser"], "a person who sings", []),
    "musician": (PERSON, ["musician", "instrumentalist", "player"],
                 "someone who plays a musical instrument (as a profession)", []),
    "astronaut": (PERSON, ["astronaut", "spaceman", "cosmonaut"],
                  'a person trained to travel in a spacecraft; "the Russians called their astronauts cosmonauts"', []),
    "farmer": (PERSON, ["farmer", "husbandman", "granger", "sodbuster"],
               "a person who operates a farm", []),
    "detective": (PERSON, ["detective", "investigator", "tec", "police_detective"],
                  "a police officer who investigates crimes", []),
    "pilot": (PERSON, ["pilot", "airplane_pilot"],
              "someone who is licensed to operate an aircraft in flight", []),
    "tailor": (PERSON, ["tailor", "seamster", "sartor"],
               "a person whose occupation is making and altering garments", []),
    "sheriff": (PERSON, ["sheriff"],
                "the principal law-enforcement officer in a county", []),
    "judge": (PERSON, ["judge", "justice", "jurist"],
              "a public official authorized to decide questions brought before a court of justice", []),
    "scientist": (PERSON, ["scientist"],
                  "a person with advanced knowledge of one or more sciences", []),
    "cook": (PERSON, ["cook"], "someone who cooks food", ["chef"]),
    "chef": (PERSON, ["chef"], "a professional cook", []),
    "guard": (PERSON, ["guard"], "a person who keeps watch over something or someone", []),
    "banker": (PERSON, ["banker"], "a financier who owns or is an executive in a bank", []),
    "policeman": (PERSON, ["policeman", "police_officer", "officer"],
                  'a member of a police force; "it was an accident, officer"', []),
    "veteran": (PERSON, ["veteran", "veteran_soldier", "ex-serviceman", "vet"],
                "a person who has served in the armed forces", []),
    "orchestra": (GROUP, ["orchestra"],
                  "a musical organization consisting of a group of instrumentalists including string players", []),
    "crew": (GROUP, ["crew"], "the men and women who man a vehicle (ship, aircraft, etc.)", []),
}

# Explicit sense order for polysemous lemmas (first entry = sense 1). Lemmas
# not listed get their senses in SYNSETS table order.
SENSE_ORDER = {
    "conductor": ["conductor1", "conductor2", "conductor3"],
    "vet": ["veterinarian", "veteran"],
    "engineer": ["engineer1", "engineer2"],
    "cobbler": ["cobbler1", "cobbler2"],
    "player": ["actor", "musician"],
}

DATA_HEADER = (
    "  1 This file is a generated WNDB-format noun database fixture.\n"
    "  2 Offsets are byte offsets of each line within this file.\n"
)
INDEX_HEADER = (
    "  1 This file is a generated WNDB-format noun index fixture.\n"
    "  2 Lemmas are sorted lexicographically.\n"
)

LEXNAMES_ROWS = [
    (0, "adj.all", 3), (1, "adj.pert", 3), (2, "adv.all", 4), (3, "noun.Tops", 1),
    (4, "noun.act", 1), (5, "noun.animal", 1), (6, "noun.artifact", 1),
    (7, "noun.attribute", 1), (8, "noun.body", 1), (9, "noun.cognition", 1),
    (10, "noun.communication", 1), (11, "noun.event", 1), (12, "noun.feeling", 1),
    (13, "noun.food", 1), (14, "noun.group", 1), (15, "noun.location", 1),
    (16, "noun.motive", 1), (17, "noun.object", 1), (18, "noun.person", 1),
    (19, "noun.phenomenon", 1), (20, "noun.plant", 1), (21, "noun.possession", 1),
    (22, "noun.process", 1), (23, "noun.quantity", 1), (24, "noun.relation", 1),
    (25, "noun.shape", 1), (26, "noun.state", 1), (27, "noun.substance", 1),
    (28, "noun.time", 1), (29, "verb.body", 2), (30, "verb.change", 2),
    (31, "verb.cognition", 2), (32, "verb.communication", 2),
    (33, "verb.competition", 2), (34, "verb.consumption", 2), (35, "verb.contact", 2),
    (36, "verb.creation", 2), (37, "verb.emotion", 2), (38, "verb.motion", 2),
    (39, "verb.perception", 2), (40, "verb.possession", 2), (41, "verb.social", 2),
    (42, "verb.stative", 2), (43, "verb.weather", 2), (44, "adj.ppl", 3),
]


def build_pointers() -> dict[str, list[tuple[str, str]]]:
    """Per synset key: ordered (symbol, target key) pairs, both directions."""
    pointers: dict[str, list[tuple[str, str]]] = {key: [] for key in SYNSETS}
    for key, (_, _, _, hypos) in SYNSETS.items():
        for hypo in hypos:
            if hypo not in SYNSETS:
                raise SystemExit(f"unknown hyponym key {hypo!r} under {key!r}")
            pointers[key].append(("~", hypo))
            pointers[hypo].append(("@", key))
    return pointers


def render_data_line(key: str, offsets: dict[str, int],
                     pointers: dict[str, list[tuple[str, str]]]) -> str:
    lexnum, words, gloss, _ = SYNSETS[key]
    fields = [f"{offsets[key]:08d}", f"{lexnum:02d}", "n", f"{len(words):02x}"]
    for word in words:
        fields += [word, "0"]
    ptrs = pointers[key]
    fields.append(f"{len(ptrs):03d}")
    for symbol, target in ptrs:
        fields += [symbol, f"{offsets[target]:08d}", "n", "0000"]
    return " ".join(fields) + " | " + gloss


def main() -> None:
    pointers = build_pointers()
    keys = list(SYNSETS)

    # First pass with zero offsets fixes every line length; second pass
    # substitutes the real byte offsets.
    zero = {key: 0 for key in keys}
    provisional = [render_data_line(key, zero, pointers) for key in keys]
    offsets: dict[str, int] = {}
    position = len(DATA_HEADER.encode("utf-8"))
    for key, line in zip(keys, provisional):
        offsets[key] = position
        position += len(line.encode("utf-8")) + 1
    data_lines = [render_data_line(key, offsets, pointers) for key in keys]
    for final, draft in zip(data_lines, provisional):
        assert len(final) == len(draft), "offset substitution changed a line length"

    # Index: lemma -> synsets in sense order.
    lemma_senses: dict[str, list[str]] = {}
    for key, (_, words, _, _) in SYNSETS.items():
        for word in words:
            lemma_senses.setdefault(word.lower(), []).append(key)
    for lemma, order in SENSE_ORDER.items():
        if sorted(lemma_senses[lemma]) != sorted(order):
            raise SystemExit(f"sense order for {lemma!r} does not cover its synsets")
        lemma_senses[lemma] = list(order)

    index_lines = []
    for lemma in sorted(lemma_senses):
        senses = lemma_senses[lemma]
        symbols = sorted({sym for key in senses for sym, _ in pointers[key]})
        fields = [lemma, "n", str(len(senses)), str(len(symbols)), *symbols,
                  str(len(senses)), "0", *(f"{offsets[key]:08d}" for key in senses)]
        index_lines.append(" ".join(fields))

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    (OUT_DIR / "data.noun").write_text(DATA_HEADER + "\n".join(data_lines) + "\n", "utf-8")
    (OUT_DIR / "index.noun").write_text(INDEX_HEADER + "\n".join(index_lines) + "\n", "utf-8")
    (OUT_DIR / "lexnames").write_text(
        "".join(f"{num:02d}\t{name}\t{cat}\n" for num, name, cat in LEXNAMES_ROWS), "utf-8")

    # Independent offset audit: every data line must sit at its own offset.
    blob = (OUT_DIR / "data.noun").read_bytes()
    for key in keys:
        claimed = offsets[key]
        assert blob[claimed:claimed + 8].decode() == f"{claimed:08d}", key
    print(f"wrote {len(keys)} synsets, {len(index_lines)} index lemmas to {OUT_DIR}")


if __name__ == "__main__":
    sys.exit(main())
