"""Bidirectional merge of span alignments into word alignments."""

from __future__ import annotations

from ..errors import CaptionMismatch
from .types import SpanAlignmentPath, WordAlignmentSet


def expand_word_pairs(path: SpanAlignmentPath) -> set[tuple[int, int]]:
    """Cross product of every aligned span pair, in the path's own frame."""
    pairs = set()
    for seg in path.segments:
        if seg.target is None:
            continue
        for i in range(seg.source.start, seg.source.end):
            for j in range(seg.target.start, seg.target.end):
                pairs.add((i, j))
    return pairs


def align_bidirectional_merge(
    path_s2t: SpanAlignmentPath, path_t2s: SpanAlignmentPath
) -> WordAlignmentSet:
    """Keep exactly the word pairs both directions agree on."""
    if (
        path_s2t.n_source != path_t2s.n_target
        or path_s2t.n_target != path_t2s.n_source
    ):
        raise CaptionMismatch(
            f"paths disagree on caption sizes: "
            f"{path_s2t.n_source}x{path_s2t.n_target} vs {path_t2s.n_source}x{path_t2s.n_target}"
        )
    forward = expand_word_pairs(path_s2t)
    backward = expand_word_pairs(path_t2s)
    return WordAlignmentSet(
        frozenset(pair for pair in forward if (pair[1], pair[0]) in backward)
    )
