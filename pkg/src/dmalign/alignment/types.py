"""Structural types for span alignment."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import MalformedPath


@dataclass(frozen=True)
class Span:
    """Half-open token range [start, end)."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise MalformedPath(f"invalid span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Segment:
    """One source span mapped to a target span, or to nothing."""

    source: Span
    target: Span | None


@dataclass
class SpanAlignmentPath:
    """A full segmentation of the source side with per-segment labels."""

    segments: list[Segment]
    direction: str  # "s2t" or "t2s"
    score: float
    n_source: int
    n_target: int

    def validate(self, max_span: int) -> None:
        pos = 0
        for seg in self.segments:
            if seg.source.start != pos:
                raise MalformedPath("source spans must tile the caption in order")
            if len(seg.source) > max_span:
                raise MalformedPath(f"source span longer than {max_span}")
            if seg.target is not None:
                if len(seg.target) > max_span:
                    raise MalformedPath(f"target span longer than {max_span}")
                if seg.target.end > self.n_target:
                    raise MalformedPath("target span outside target caption")
            pos = seg.source.end
        if pos != self.n_source:
            raise MalformedPath("source spans do not cover the caption")


@dataclass(frozen=True)
class WordAlignmentSet:
    """Symmetric word-level pairs (source index, target index)."""

    pairs: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return pair in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def transpose(self) -> "WordAlignmentSet":
        return WordAlignmentSet(frozenset((j, i) for i, j in self.pairs))

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.pairs)
