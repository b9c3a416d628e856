"""Aligner training: cost-augmented likelihood with analytic gradients.

The loss for one caption pair sums both directions. Per direction it is

    -score(gold path) + log sum over paths of exp(score + lam * hamming)

where hamming counts the word pairs on which a path and the gold path
disagree (symmetric difference of their cross-product expansions). That
count decomposes over segments because source spans never overlap, so
the augmented partition runs through the ordinary DP with per-pair score
offsets plus one constant.

Gradients come from edge posteriors of the augmented forward/backward
tables: expected segment counts minus gold counts, pushed through the
similarity head in one batched backward pass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..captions import TokenizedCaption, analyze
from ..errors import MalformedPath, NonFiniteLoss
from .dp import DpTables, PairScorer, score_alignment
from .model import AlignerParams
from .types import Segment, Span, SpanAlignmentPath

DEFAULT_LAMBDA = 1.0


@dataclass
class GoldExample:
    source: TokenizedCaption
    target: TokenizedCaption
    pairs: frozenset[tuple[int, int]]


def load_corpus(path) -> list[GoldExample]:
    """Parse gold-alignment records {source, target, alignment: [[i,j],..]}."""
    with open(path, encoding="utf-8") as fh:
        records = json.load(fh)
    examples = []
    for rec in records:
        source = analyze(rec["source"])
        target = analyze(rec["target"])
        pairs = frozenset((int(i), int(j)) for i, j in rec["alignment"])
        for i, j in pairs:
            if i >= len(source.tokens) or j >= len(target.tokens):
                raise MalformedPath(f"gold pair ({i},{j}) outside captions in {rec}")
        examples.append(GoldExample(source, target, pairs))
    return examples


def gold_path(pairs: frozenset[tuple[int, int]], n_source: int, n_target: int,
              direction: str = "s2t") -> SpanAlignmentPath:
    """Gold span path from word pairs: singleton source spans, each mapped
    to the contiguous range of its aligned target tokens (or to nothing)."""
    segments = []
    for i in range(n_source):
        targets = sorted(j for (a, j) in pairs if a == i)
        if not targets:
            segments.append(Segment(Span(i, i + 1), None))
            continue
        lo, hi = targets[0], targets[-1]
        if targets != list(range(lo, hi + 1)):
            raise MalformedPath(f"gold targets for token {i} are not contiguous: {targets}")
        segments.append(Segment(Span(i, i + 1), Span(lo, hi + 1)))
    return SpanAlignmentPath(
        segments=segments, direction=direction, score=0.0,
        n_source=n_source, n_target=n_target,
    )


def hamming_augmentation(tables_scorer, pairs: frozenset[tuple[int, int]], lam: float) -> tuple[np.ndarray, float]:
    """Per-(source span, target span) score offsets lam*(|cross| - 2*overlap)
    plus the path-independent constant lam*|gold pairs|."""
    src_spans = tables_scorer.source_spans
    tgt_spans = tables_scorer.target_spans
    aug = np.zeros((len(src_spans), len(tgt_spans)))
    for si, ss in enumerate(src_spans):
        for ti, ts in enumerate(tgt_spans):
            overlap = sum(
                1
                for (i, j) in pairs
                if ss.start <= i < ss.end and ts.start <= j < ts.end
            )
            aug[si, ti] = lam * (len(ss) * len(ts) - 2 * overlap)
    return aug, lam * len(pairs)


def _zero_grads(params: AlignerParams) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(arr) for name, arr in params.arrays().items()}


def _accumulate(total: dict[str, np.ndarray], part: dict[str, np.ndarray]) -> None:
    for name, grad in part.items():
        total[name] += grad


def _direction_loss_and_grads(
    source: TokenizedCaption,
    target: TokenizedCaption,
    pairs: frozenset[tuple[int, int]],
    params: AlignerParams,
    lam: float,
) -> tuple[float, dict[str, np.ndarray]]:
    gold = gold_path(pairs, len(source.tokens), len(target.tokens))
    scorer = PairScorer(source, target, params)
    aug_matrix, aug_const = hamming_augmentation(scorer, pairs, lam)
    tables = DpTables(
        source, target, params, augment=aug_matrix if lam else None, scorer=scorer
    )
    gold_score = score_alignment(gold, source, target, params, scorer=scorer)
    log_z_aug = tables.log_partition()
    loss = -gold_score + log_z_aug + aug_const

    alpha, beta = tables.alpha(), tables.beta()
    n, m = tables.n, tables.m
    # expected minus gold counts per (source span, target span)
    coeff = np.zeros_like(scorer.scores)
    d_wtr = 0.0
    d_null = 0.0
    starts = np.array([s.start for s in scorer.target_spans])
    ends = np.arange(m + 1)
    gaps = -np.abs(starts[None, :] - ends[:, None]).astype(float)
    gaps[0, :] = 0.0  # the first aligned segment pays no transition
    for i in range(n):
        if not np.isfinite(alpha[i]).any():
            continue
        for length in range(1, min(params.max_span, n - i) + 1):
            j = i + length
            row = scorer.source_index[Span(i, j)]
            # aligned edges: posterior over (previous column, target span)
            logs = (
                alpha[i][:, None]
                + tables.trans
                + tables.seg_scores[row][None, :]
                + beta[j, tables.target_cols][None, :]
                - log_z_aug
            )
            post = np.exp(logs)
            coeff[row] += post.sum(axis=0)
            d_wtr += float((post * gaps).sum())
            # null edges keep the column
            d_null += float(np.exp(alpha[i] + tables.null + beta[j] - log_z_aug).sum())

    last_end = None
    for seg in gold.segments:
        if seg.target is None:
            d_null -= 1.0
            continue
        coeff[scorer.source_index[seg.source], scorer.target_index[seg.target]] -= 1.0
        if last_end is not None:
            d_wtr -= -abs(seg.target.start - last_end)
        last_end = seg.target.end

    grads = params.similarity_backward(scorer.cache, coeff.reshape(-1))
    grads["w_tr"] = grads["w_tr"] + d_wtr
    grads["null_score"] = grads["null_score"] + d_null
    return loss, grads


def example_loss_and_grads(
    example: GoldExample, params: AlignerParams, lam: float = DEFAULT_LAMBDA
) -> tuple[float, dict[str, np.ndarray]]:
    """Bidirectional cost-augmented loss and its parameter gradients."""
    loss_f, grads_f = _direction_loss_and_grads(
        example.source, example.target, example.pairs, params, lam
    )
    transposed = frozenset((j, i) for (i, j) in example.pairs)
    loss_b, grads_b = _direction_loss_and_grads(
        example.target, example.source, transposed, params, lam
    )
    _accumulate(grads_f, grads_b)
    return loss_f + loss_b, grads_f


def bidirectional_nll(examples, params: AlignerParams) -> float:
    """Plain negative log-likelihood of the gold paths, both directions."""
    total = 0.0
    for ex in examples:
        for src, tgt, pairs in (
            (ex.source, ex.target, ex.pairs),
            (ex.target, ex.source, frozenset((j, i) for (i, j) in ex.pairs)),
        ):
            gold = gold_path(pairs, len(src.tokens), len(tgt.tokens))
            tables = DpTables(src, tgt, params)
            total += tables.log_partition() - score_alignment(
                gold, src, tgt, params, scorer=tables.scorer
            )
    return total


@dataclass
class AdamState:
    """Adam with per-parameter rate multipliers.

    The head weights are frozen by default: the difference-detector
    initialization already solves span matching, and what training has to
    find is the balance between pair scores, the null score and the
    transition weight. Letting the head move lets it memorize the training
    pairs, which wrecks generalization to unseen tokens; pass a different
    rate_scale to unfreeze it.
    """

    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    rate_scale: dict[str, float] = field(
        default_factory=lambda: {
            "w1": 0.0, "b1": 0.0, "w2": 0.0, "b2": 0.0, "slope1": 0.0, "slope2": 0.0,
        }
    )
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def update(self, params: AlignerParams, grads: dict[str, np.ndarray]) -> None:
        self.step += 1
        for name, arr in params.arrays().items():
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(arr)
                self.v[name] = np.zeros_like(arr)
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g * g
            m_hat = self.m[name] / (1 - self.beta1**self.step)
            v_hat = self.v[name] / (1 - self.beta2**self.step)
            rate = self.lr * self.rate_scale.get(name, 1.0)
            setattr(params, name, arr - rate * m_hat / (np.sqrt(v_hat) + self.eps))
        params.invalidate_cache()


def train_step(
    batch: list[GoldExample],
    params: AlignerParams,
    state: AdamState,
    lam: float = DEFAULT_LAMBDA,
) -> float:
    """One optimizer step over a batch; returns the summed loss."""
    total_loss = 0.0
    grads = _zero_grads(params)
    for example in batch:
        loss, g = example_loss_and_grads(example, params, lam)
        total_loss += loss
        _accumulate(grads, g)
    if not np.isfinite(total_loss):
        raise NonFiniteLoss(f"loss became {total_loss}")
    state.update(params, grads)
    return total_loss


def train(
    corpus: list[GoldExample],
    params: AlignerParams,
    epochs: int = 100,
    lr: float = 0.05,
    lam: float = DEFAULT_LAMBDA,
    log=None,
) -> list[float]:
    """Full-batch training; returns the per-epoch loss history."""
    state = AdamState(lr=lr)
    history = []
    for epoch in range(epochs):
        loss = train_step(corpus, params, state, lam)
        history.append(loss)
        if log is not None:
            log(f"epoch {epoch + 1}: loss {loss:.4f}")
    return history
