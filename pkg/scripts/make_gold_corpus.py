#!/usr/bin/env python3
"""Generate the synthetic gold-alignment corpus shipped with the package.

Fifty caption pairs covering the patterns the aligner must learn:
identical captions, substitutions in and at the end of context, modifier
swaps, deletions and insertions. A slice of the substituted/deleted slots
uses generated pseudo-words that occur exactly once in the corpus, so the
trained scores cannot rely on token identity and must fall back to the
positional/transition structure instead.
"""

import json
import random
from pathlib import Path

NOUNS = [
    "house", "horse", "boat", "lamp", "cup", "apple", "tree", "bird",
    "river", "door", "window", "chair", "phone", "star", "cloud", "moon",
    "field", "bottle", "hill", "bread",
]
ADJS = ["tall", "small", "dark", "bright", "golden", "dirty", "shiny", "new", "old", "pink"]
PREPS = ["on", "near", "with", "under", "over"]

ONSETS = ["br", "cl", "dr", "fl", "gr", "pl", "sk", "tr", "v", "z"]
VOWELS = ["a", "e", "i", "o", "u"]
CODAS = ["ck", "ld", "mp", "nd", "nt", "rk", "sh", "st", "x", "b"]


def identity(n):
    return [[i, i] for i in range(n)]


class Words:
    def __init__(self, rng):
        self.rng = rng
        self.used = set()

    def pseudo(self):
        while True:
            word = (
                self.rng.choice(ONSETS)
                + self.rng.choice(VOWELS)
                + self.rng.choice(CODAS)
            )
            if word not in self.used:
                self.used.add(word)
                return word

    def noun(self, pseudo=False):
        return self.pseudo() if pseudo else self.rng.choice(NOUNS)


def build(rng):
    words = Words(rng)
    records = []

    def sample(seq, k):
        return rng.sample(seq, k)

    # identical captions; everything aligns to itself
    for _ in range(8):
        n1, n2 = sample(NOUNS, 2)
        prep = rng.choice(PREPS)
        text = f"a {n1} {prep} a {n2}"
        records.append({"source": text, "target": text, "alignment": identity(5)})

    # trailing-noun substitution inside identical context
    for k in range(10):
        adj = rng.choice(ADJS)
        n1 = rng.choice(NOUNS)
        n2, n3 = words.noun(k >= 5), words.noun(k >= 5)
        prep = rng.choice(PREPS)
        records.append({
            "source": f"a {adj} {n1} {prep} the {n2}",
            "target": f"a {adj} {n1} {prep} the {n3}",
            "alignment": identity(6),
        })

    # mid-caption substitution
    for k in range(6):
        n1, n3 = words.noun(k >= 3), words.noun(k >= 3)
        n2 = rng.choice(NOUNS)
        prep = rng.choice(PREPS)
        records.append({
            "source": f"the {n1} {prep} the {n2}",
            "target": f"the {n3} {prep} the {n2}",
            "alignment": identity(5),
        })

    # modifier swap on a shared noun
    for k in range(8):
        if k >= 5:
            a1, a2 = words.pseudo(), words.pseudo()
        else:
            a1, a2 = sample(ADJS, 2)
        noun = rng.choice(NOUNS)
        records.append({
            "source": f"a {a1} {noun}",
            "target": f"a {a2} {noun}",
            "alignment": identity(3),
        })

    # deletion: trailing phrase only in the source
    for k in range(8):
        n1 = rng.choice(NOUNS)
        n2 = words.noun(k >= 4)
        prep = rng.choice(PREPS)
        records.append({
            "source": f"a {n1} {prep} a {n2}",
            "target": f"a {n1}",
            "alignment": identity(2),
        })

    # insertion: trailing phrase only in the target
    for k in range(6):
        n1 = rng.choice(NOUNS)
        n2 = words.noun(k >= 3)
        prep = rng.choice(PREPS)
        records.append({
            "source": f"a {n1}",
            "target": f"a {n1} {prep} a {n2}",
            "alignment": identity(2),
        })

    # longer caption with one substitution after a conjunction
    for k in range(4):
        adj = rng.choice(ADJS)
        n1, n3 = sample(NOUNS, 2)
        n2, n4 = words.noun(k >= 2), words.noun(k >= 2)
        records.append({
            "source": f"a {adj} {n1} and a {n2} near the {n3}",
            "target": f"a {adj} {n1} and a {n4} near the {n3}",
            "alignment": identity(9),
        })

    return records


def main():
    rng = random.Random(20240601)
    records = build(rng)
    assert len(records) == 50, len(records)
    out = Path(__file__).resolve().parents[1] / "src" / "dmalign" / "data" / "gold_alignments.json"
    out.write_text(json.dumps(records, indent=1))
    print(f"wrote {len(records)} records to {out}")


if __name__ == "__main__":
    main()
