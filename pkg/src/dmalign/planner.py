"""Turn word alignments plus noun phrases into keep/alter edit verdicts.

For every noun head in the source caption: unaligned nouns were dropped
from the instruction and stay untouched (DELETED/keep); nouns aligned to
a different lemma get replaced (SUBSTITUTED/alter); same lemma but a
different multiset of adjective modifiers means a property edit
(MODIFIER_CHANGED/alter); otherwise the region is preserved
(IDENTICAL/keep). Target nouns nothing maps onto are INSERTED and carry
no source region.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from enum import Enum

from .captions import NounPhrase, TokenizedCaption, stem
from .errors import IndexOutOfRange
from .alignment.types import WordAlignmentSet

PLAN_SCHEMA_VERSION = 1


class Verdict(str, Enum):
    IDENTICAL = "IDENTICAL"
    SUBSTITUTED = "SUBSTITUTED"
    MODIFIER_CHANGED = "MODIFIER_CHANGED"
    DELETED = "DELETED"


@dataclass(frozen=True)
class AlterItem:
    source: NounPhrase
    verdict: Verdict  # SUBSTITUTED or MODIFIER_CHANGED
    target: NounPhrase


@dataclass(frozen=True)
class KeepItem:
    source: NounPhrase
    verdict: Verdict  # IDENTICAL or DELETED


@dataclass
class EditPlan:
    source: TokenizedCaption
    target: TokenizedCaption
    alter: list[AlterItem]
    keep: list[KeepItem]
    inserted: list[NounPhrase]

    def alter_phrases(self) -> list[NounPhrase]:
        return [item.source for item in self.alter]

    def keep_phrases(self) -> list[NounPhrase]:
        return [item.source for item in self.keep]


def _modifier_lemmas(caption: TokenizedCaption, phrase: NounPhrase) -> Counter:
    return Counter(stem(caption.tokens[i]) for i in phrase.modifier_indices)


def classify(
    c1: TokenizedCaption, c2: TokenizedCaption, alignment: WordAlignmentSet
) -> EditPlan:
    """Build the edit plan for a caption pair under a word alignment."""
    for i, j in alignment.pairs:
        if not (0 <= i < len(c1.tokens)) or not (0 <= j < len(c2.tokens)):
            raise IndexOutOfRange(f"alignment pair ({i},{j}) outside the captions")

    target_heads = {p.head_index: p for p in c2.phrases}
    alter: list[AlterItem] = []
    keep: list[KeepItem] = []
    claimed_targets: set[int] = set()

    for phrase in c1.phrases:
        i = phrase.head_index
        partners = sorted(j for (a, j) in alignment.pairs if a == i)
        noun_partners = [j for j in partners if j in target_heads]
        if not noun_partners:
            # never aligned, or aligned only to non-noun tokens: the user
            # stopped mentioning it, so its region must survive untouched
            keep.append(KeepItem(phrase, Verdict.DELETED))
            continue
        j = noun_partners[0]
        target_phrase = target_heads[j]
        claimed_targets.add(j)
        if stem(c1.tokens[i]) != stem(c2.tokens[j]):
            alter.append(AlterItem(phrase, Verdict.SUBSTITUTED, target_phrase))
        elif _modifier_lemmas(c1, phrase) != _modifier_lemmas(c2, target_phrase):
            alter.append(AlterItem(phrase, Verdict.MODIFIER_CHANGED, target_phrase))
        else:
            keep.append(KeepItem(phrase, Verdict.IDENTICAL))

    inserted = [p for p in c2.phrases if p.head_index not in claimed_targets]
    return EditPlan(source=c1, target=c2, alter=alter, keep=keep, inserted=inserted)


def _phrase_dict(caption: TokenizedCaption, phrase: NounPhrase) -> dict:
    return {
        "head": phrase.head_index,
        "lemma": stem(caption.tokens[phrase.head_index]),
        "modifiers": list(phrase.modifier_indices),
    }


def plan_to_dict(plan: EditPlan, alignment: WordAlignmentSet | None = None) -> dict:
    """JSON-ready view consumed by the CLI dump and the browser UI."""
    payload = {
        "schema_version": PLAN_SCHEMA_VERSION,
        "source_tokens": list(plan.source.tokens),
        "target_tokens": list(plan.target.tokens),
        "alter": [
            {
                "source": _phrase_dict(plan.source, item.source),
                "verdict": item.verdict.value,
                "target": _phrase_dict(plan.target, item.target),
            }
            for item in plan.alter
        ],
        "keep": [
            {
                "source": _phrase_dict(plan.source, item.source),
                "verdict": item.verdict.value,
            }
            for item in plan.keep
        ],
        "inserted": [_phrase_dict(plan.target, p) for p in plan.inserted],
    }
    if alignment is not None:
        payload["alignment"] = alignment.sorted_pairs()
    return payload


def plan_to_json(plan: EditPlan, alignment: WordAlignmentSet | None = None) -> str:
    return json.dumps(plan_to_dict(plan, alignment), indent=2)
