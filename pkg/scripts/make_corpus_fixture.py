#!/usr/bin/env python3
"""Generate the 30-document subtitle fixture corpus.

Writes tests/fixtures/corpus/*.srt plus metadata.tsv, cast.tsv and
employment.csv. Content is fully deterministic: per-document planted
mention counts drive known frequency trends (detective up, farmer down,
teacher flat), sentiment trends (astronaut up, lawyer down), ambiguous
senses, structural exclusions, a verb usage, an organization name and a
cast-member collision. Attribute configurations are arranged so the GLM
design is full rank at min_config_titles = 5.

Regenerate with: python scripts/make_corpus_fixture.py
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

import numpy as np

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "corpus"

# (title_type, genres, countries); six configurations of five documents each.
CONFIGS = [
    ("movie", ("Drama",), ("United States",)),
    ("movie", ("Comedy",), ("United States",)),
    ("tv_episode", ("Drama",), ("United States",)),
    ("movie", ("Drama",), ("United Kingdom",)),
    ("movie", ("Comedy", "Drama"), ("United States",)),
    ("tv_episode", ("Comedy",), ("United Kingdom", "United States")),
]

FILLER = [
    "The evening settled over the quiet town .",
    "Nobody seemed to remember the old house by the river .",
    "They talked for hours about everything and nothing .",
    "Rain kept falling on the empty street outside .",
    "A long journey waited for them in the morning .",
]


def doc_sentences(i: int) -> list[str]:
    rng = random.Random(1000 + i)
    out = list(FILLER[:3])
    out.extend(rng.sample(FILLER, i % 3))

    # frequency planting
    doc = 2 + (2 if "Drama" in CONFIGS[i % 6][1] else 0) \
        + (1 if CONFIGS[i % 6][0] == "tv_episode" else 0)
    out += ["The doctor examined the patient carefully today ."] * doc
    out += ["A detective followed the suspect quietly ."] * (1 + i // 4)
    out += ["The farmer plowed the field before dawn ."] * (8 - i // 4)
    out += ["The teacher wrote the lesson on the board ."] * (3 + rng.choice([0, 1]))

    # sentiment planting (proportion positive rises for astronaut, falls for lawyer)
    pos_a, neg_a = 1 + i // 5, 6 - i // 5
    out += ["The astronaut was brilliant through the landing ."] * pos_a
    out += ["The astronaut was reckless with the fuel ."] * neg_a
    out += ["The lawyer was brilliant in court ."] * (6 - i // 5)
    out += ["That damn lawyer lied to the jury ."] * (1 + i // 5)

    # ambiguous senses and multiword titles
    if i % 6 in (0, 3):
        out.append("the conductor raised his baton before the orchestra played .")
    if i % 6 in (1, 4):
        out.append("the conductor collects fares on this conveyance .")
    if i % 5 == 0:
        out.append("The train conductor checked every ticket twice .")
    if i % 4 == 0:
        out.append("Two doctors arrived in the morning .")
    if i % 3 == 0:
        out.append("The sheriff rode into town slowly .")
    if i % 6 == 2:
        out.append("But that damn vet kept ordering test after test !")

    # pruning material
    if i % 7 == 0:
        out.append("They wanted to doctor the evidence quietly .")
    if i % 8 == 0:
        out.append("He sued Cook Industries yesterday afternoon .")

    # structural exclusions (never counted)
    out.append("Sheriff : Drop your weapon now !")
    out.append("(doctor coughs) He left quickly .")
    out.append("♪ the sheriff of the county ♪")
    return out


def write_srt(path: Path, sentences: list[str]) -> None:
    blocks = []
    t = 0
    for k, sentence in enumerate(sentences, 1):
        start = t
        end = t + 2000
        t = end + 500
        def clock(ms):
            h, ms = divmod(ms, 3600000)
            m, ms = divmod(ms, 60000)
            s, ms = divmod(ms, 1000)
            return f"{h:02d}:{m:02d}:{s:02d},{ms:03d}"
        blocks.append(f"{k}\n{clock(start)} --> {clock(end)}\n{sentence}\n")
    path.write_text("\n".join(blocks), "utf-8")


def check_design_rank() -> None:
    rows = []
    genres = sorted({g for _, gs, _ in CONFIGS for g in gs})
    countries = sorted({c for _, _, cs in CONFIGS for c in cs})
    for i in range(30):
        title_type, gs, cs = CONFIGS[i % 6]
        row = [1.0, float(1988 + i - 1950)]
        row += [1.0 if g in gs else 0.0 for g in genres]
        row += [1.0 if c in cs else 0.0 for c in countries]
        row += [1.0 if title_type == "tv_episode" else 0.0]
        rows.append(row)
    matrix = np.array(rows)
    rank = np.linalg.matrix_rank(matrix)
    assert rank == matrix.shape[1], f"design rank {rank} < {matrix.shape[1]}"


def main() -> None:
    check_design_rank()
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    meta_lines = ["imdb_id\tyear\ttitle_type\tgenres\tcountries"]
    for i in range(30):
        imdb_id = f"tt{i + 1:07d}"
        year = 1988 + i
        title_type, genres, countries = CONFIGS[i % 6]
        write_srt(OUT_DIR / f"{imdb_id}.srt", doc_sentences(i))
        meta_lines.append(f"{imdb_id}\t{year}\t{title_type}\t"
                          f"{','.join(genres)}\t{','.join(countries)}")
    (OUT_DIR / "metadata.tsv").write_text("\n".join(meta_lines) + "\n", "utf-8")
    (OUT_DIR / "cast.tsv").write_text("tt0000003\tJane Doctor\n"
                                      "tt0000003\tSam Spade\n", "utf-8")

    emp_lines = ["year,soc_code,employment"]
    series = {
        "33-0000": lambda k: 1000 + 40 * k,
        "45-0000": lambda k: 2000 - 50 * k,
        "29-0000": lambda k: 3000 + 10 * k,
        "27-0000": lambda k: 1500 + 5 * k,
        "53-0000": lambda k: 1200 - 10 * k,
        "23-0000": lambda k: 800 + 3 * k,
        "25-0000": lambda k: 2500,
        "11-0000": lambda k: 1800 - 5 * k,
    }
    for year in range(1999, 2018):
        k = year - 1999
        for code in sorted(series):
            emp_lines.append(f"{year},{code},{series[code](k)}")
    (OUT_DIR / "employment.csv").write_text("\n".join(emp_lines) + "\n", "utf-8")
    print(f"wrote 30 documents + metadata + cast + employment to {OUT_DIR}")


if __name__ == "__main__":
    sys.exit(main())
