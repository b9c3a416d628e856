"""Semi-Markov alignment scoring and exact dynamic programming.

A path segments the source caption into contiguous spans of length at
most ``max_span``; each segment either maps to a target span (also
length-capped) or to nothing. The path score is the sum of per-segment
similarity scores (null segments contribute the learned null score) plus
a transition term between consecutive *aligned* segments: the negative
distance between the current target start and the previous target end,
weighted by ``w_tr``. Null segments are invisible to transitions.

The DP state is (source position, end of last aligned target span);
column 0 encodes "no aligned segment yet". Both the partition function
and the Viterbi argmax run over this state space, so they agree with
exhaustive enumeration by construction (tests enforce it anyway).
"""

from __future__ import annotations

import numpy as np

from ..captions import TokenizedCaption
from ..errors import MalformedPath
from .embeddings import embed_span
from .model import AlignerParams
from .types import Segment, Span, SpanAlignmentPath

DEFAULT_DP_TOKEN_LIMIT = 64


def candidate_spans(n: int, max_span: int) -> list[Span]:
    """All spans over n tokens, ordered by (start, length)."""
    return [
        Span(start, start + length)
        for start in range(n)
        for length in range(1, min(max_span, n - start) + 1)
    ]


class PairScorer:
    """Precomputed similarity scores for every (source, target) span pair."""

    def __init__(self, source: TokenizedCaption, target: TokenizedCaption, params: AlignerParams):
        self.params = params
        self.source_spans = candidate_spans(len(source.tokens), params.max_span)
        self.target_spans = candidate_spans(len(target.tokens), params.max_span)
        self.source_index = {s: k for k, s in enumerate(self.source_spans)}
        self.target_index = {s: k for k, s in enumerate(self.target_spans)}
        src = np.stack([embed_span(source, s, params.embedder) for s in self.source_spans])
        tgt = np.stack([embed_span(target, s, params.embedder) for s in self.target_spans])
        ns, nt = len(self.source_spans), len(self.target_spans)
        pairs = np.concatenate(
            [np.repeat(src, nt, axis=0), np.tile(tgt, (ns, 1))], axis=1
        )
        flat, self.cache = params.similarity(pairs)
        self.scores = flat.reshape(ns, nt)

    def score(self, source_span: Span, target_span: Span) -> float:
        return float(self.scores[self.source_index[source_span], self.target_index[target_span]])


def score_alignment(
    path: SpanAlignmentPath,
    source: TokenizedCaption,
    target: TokenizedCaption,
    params: AlignerParams,
    scorer: PairScorer | None = None,
) -> float:
    """Recompute a path's score from its segments."""
    if path.n_source != len(source.tokens) or path.n_target != len(target.tokens):
        raise MalformedPath("path does not match the captions it claims to align")
    path.validate(params.max_span)
    scorer = scorer or PairScorer(source, target, params)
    total = 0.0
    last_end = None
    for seg in path.segments:
        if seg.target is None:
            total = total + float(params.null_score)
            continue
        # transition added before the pair score: keeps the accumulation
        # order identical to the DP so scores match bit for bit
        if last_end is not None:
            total = total + float(params.w_tr) * -abs(seg.target.start - last_end)
        total = total + scorer.score(seg.source, seg.target)
        last_end = seg.target.end
    return total


class DpTables:
    """Forward/backward log-sum tables shared by decoding and training."""

    def __init__(
        self,
        source: TokenizedCaption,
        target: TokenizedCaption,
        params: AlignerParams,
        augment: np.ndarray | None = None,
        token_limit: int = DEFAULT_DP_TOKEN_LIMIT,
        scorer: PairScorer | None = None,
    ):
        n, m = len(source.tokens), len(target.tokens)
        if n > token_limit or m > token_limit:
            raise ValueError(f"exact DP limited to {token_limit} tokens per side")
        self.n, self.m = n, m
        self.params = params
        self.scorer = scorer or PairScorer(source, target, params)
        self.seg_scores = self.scorer.scores if augment is None else self.scorer.scores + augment
        self.null = float(params.null_score)
        self.max_span = params.max_span
        # trans[col, span] = transition into target span given previous end col
        starts = np.array([s.start for s in self.scorer.target_spans])
        ends = np.arange(m + 1)  # col 0 = no previous aligned segment
        self.trans = float(params.w_tr) * -np.abs(starts[None, :] - ends[:, None])
        self.trans[0, :] = 0.0
        self.target_cols = np.array([s.end for s in self.scorer.target_spans])
        self._alpha: np.ndarray | None = None
        self._beta: np.ndarray | None = None

    def _source_row(self, span: Span) -> int:
        return self.scorer.source_index[span]

    def alpha(self) -> np.ndarray:
        if self._alpha is not None:
            return self._alpha
        a = np.full((self.n + 1, self.m + 1), -np.inf)
        a[0, 0] = 0.0
        for i in range(self.n):
            if not np.isfinite(a[i]).any():
                continue
            for length in range(1, min(self.max_span, self.n - i) + 1):
                j = i + length
                # null segment keeps the column
                np.logaddexp(a[j], a[i] + self.null, out=a[j])
                # aligned segments move the column to the span end
                row = self._source_row(Span(i, j))
                incoming = a[i][:, None] + self.trans + self.seg_scores[row][None, :]
                per_span = np.logaddexp.reduce(incoming, axis=0)
                for col in range(1, self.m + 1):
                    hits = per_span[self.target_cols == col]
                    if hits.size:
                        a[j, col] = np.logaddexp(a[j, col], np.logaddexp.reduce(hits))
        self._alpha = a
        return a

    def beta(self) -> np.ndarray:
        if self._beta is not None:
            return self._beta
        b = np.full((self.n + 1, self.m + 1), -np.inf)
        b[self.n, :] = 0.0
        for i in range(self.n - 1, -1, -1):
            for length in range(1, min(self.max_span, self.n - i) + 1):
                j = i + length
                np.logaddexp(b[i], self.null + b[j], out=b[i])
                row = self._source_row(Span(i, j))
                # outgoing[col, span] = trans + score + beta at the landing state
                outgoing = self.trans + (self.seg_scores[row] + b[j, self.target_cols])[None, :]
                np.logaddexp(b[i], np.logaddexp.reduce(outgoing, axis=1), out=b[i])
        self._beta = b
        return b

    def log_partition(self) -> float:
        return float(np.logaddexp.reduce(self.alpha()[self.n]))


def log_partition(
    source: TokenizedCaption,
    target: TokenizedCaption,
    params: AlignerParams,
    token_limit: int = DEFAULT_DP_TOKEN_LIMIT,
) -> float:
    """Log of the summed exponentiated scores over all alignment paths."""
    return DpTables(source, target, params, token_limit=token_limit).log_partition()


def viterbi_decode(
    source: TokenizedCaption,
    target: TokenizedCaption,
    params: AlignerParams,
    direction: str = "s2t",
) -> SpanAlignmentPath:
    """Highest-scoring path under a leftmost-lexicographic tie-break.

    Among equal-score paths the winner has the lexicographically smallest
    sequence of segment keys (source length, target start, target end),
    with null labels sorting after every aligned label. Running the max
    recurrence backward makes each state's decision the *first* segment
    of the remaining suffix, so greedy reconstruction from the start
    realizes exactly that global order.
    """
    n, m = len(source.tokens), len(target.tokens)
    scorer = PairScorer(source, target, params)
    null = float(params.null_score)
    w_tr = float(params.w_tr)

    # best[i, col] = best score of any completion from source position i
    # given the previous aligned target span ended at col (0 = none yet)
    best = np.full((n + 1, m + 1), -np.inf)
    best[n, :] = 0.0
    choice: dict[tuple[int, int], tuple[int, Span | None]] = {}
    for i in range(n - 1, -1, -1):
        for col in range(m + 1):
            top_score = -np.inf
            top_key = None
            top = None
            for length in range(1, min(params.max_span, n - i) + 1):
                j = i + length
                candidates = [(null + best[j, col], (length, m + 1, m + 1), None)]
                for tgt in scorer.target_spans:
                    trans = 0.0 if col == 0 else w_tr * -abs(tgt.start - col)
                    candidates.append(
                        (
                            trans + scorer.score(Span(i, j), tgt) + best[j, tgt.end],
                            (length, tgt.start, tgt.end),
                            tgt,
                        )
                    )
                for cand_score, cand_key, cand_tgt in candidates:
                    if cand_score > top_score or (
                        cand_score == top_score and cand_key < top_key
                    ):
                        top_score, top_key, top = cand_score, cand_key, (length, cand_tgt)
            best[i, col] = top_score
            choice[(i, col)] = top

    segments: list[Segment] = []
    i, col = 0, 0
    while i < n:
        length, tgt = choice[(i, col)]
        segments.append(Segment(Span(i, i + length), tgt))
        if tgt is not None:
            col = tgt.end
        i += length
    path = SpanAlignmentPath(
        segments=segments,
        direction=direction,
        score=float(best[0, 0]),
        n_source=n,
        n_target=m,
    )
    path.score = score_alignment(path, source, target, params, scorer=scorer)
    return path
