#!/usr/bin/env python3
"""Regenerate the bundled mini corpus (src/scholarlda/data/mini_corpus.jsonl).

Three synthetic venues, each with a planted vocabulary theme. Every theme
has 5 seed words (the ones a trained model's top-20 lists must surface
together) plus support words, mixed with shared background vocabulary and
English glue words so ingestion has real stoplist work to do. Fully
deterministic for a fixed seed.
"""

import json
from pathlib import Path

import numpy as np

SEED = 20170613
DOCS_PER_VENUE = 100
YEARS = [2013, 2014, 2015, 2016, 2017]

THEMES = {
    "NEUROCONF": {
        "seeds": ["neuron", "synapse", "cortex", "plasticity", "spike"],
        "support": ["dendrite", "axon", "hippocampus", "membrane", "oscillation"],
        "authors": [f"neuro-{i:02d}" for i in range(1, 13)],
    },
    "CRYPTCON": {
        "seeds": ["cipher", "encryption", "lattice", "adversary", "signature"],
        "support": ["protocol", "nonce", "decryption", "homomorphic", "ciphertext"],
        "authors": [f"crypto-{i:02d}" for i in range(1, 13)],
    },
    "ROBOSYM": {
        "seeds": ["manipulator", "gripper", "trajectory", "actuator", "slam"],
        "support": ["kinematics", "locomotion", "grasping", "odometry", "waypoint"],
        "authors": [f"robo-{i:02d}" for i in range(1, 13)],
    },
}

BACKGROUND = [
    "model", "data", "method", "results", "evaluation", "approach", "propose",
    "performance", "analysis", "learning", "framework", "experiments",
    "benchmark", "training", "accuracy", "dataset", "system", "baseline",
    "study", "comparison",
]

GLUE = ["we", "the", "of", "a", "in", "is", "and", "for", "on", "with", "this", "to"]


def _theme_word(rng, theme):
    # seeds twice as likely as support words
    pool = theme["seeds"] * 2 + theme["support"]
    return pool[rng.integers(len(pool))]


def _content_word(rng, theme, theme_fraction):
    if rng.random() < theme_fraction:
        return _theme_word(rng, theme)
    return BACKGROUND[rng.integers(len(BACKGROUND))]


def _sentence(rng, theme, theme_fraction, n_content):
    words = []
    for _ in range(n_content):
        words.append(_content_word(rng, theme, theme_fraction))
        if rng.random() < 0.45:
            words.append(GLUE[rng.integers(len(GLUE))])
    return " ".join(words).capitalize() + "."


def make_records():
    rng = np.random.default_rng(SEED)
    records = []
    for venue, theme in THEMES.items():
        for i in range(DOCS_PER_VENUE):
            year = YEARS[rng.integers(len(YEARS))]
            # theme emphasis drifts upward over the years so the venue's
            # main topic shows a visible trend
            theme_fraction = 0.55 + 0.05 * (year - YEARS[0])
            title = _sentence(rng, theme, theme_fraction, int(rng.integers(4, 7)))[:-1]
            sentences = [
                _sentence(rng, theme, theme_fraction, int(rng.integers(6, 10)))
                for _ in range(int(rng.integers(5, 8)))
            ]
            n_authors = int(rng.integers(1, 4))
            authors = list(rng.choice(theme["authors"], size=n_authors, replace=False))
            records.append(
                {
                    "id": f"{venue.lower()}-{i:04d}",
                    "title": title,
                    "abstract": " ".join(sentences),
                    "venue": venue,
                    "year": int(year),
                    "authors": authors,
                }
            )
    return records


def main():
    out = Path(__file__).resolve().parent.parent / "src" / "scholarlda" / "data" / "mini_corpus.jsonl"
    records = make_records()
    with open(out, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} records to {out}")


if __name__ == "__main__":
    main()
