from .dp import candidate_spans, log_partition, score_alignment, viterbi_decode
from .embeddings import FileEmbedder, HashEmbedder, embed_span
from .merge import align_bidirectional_merge, expand_word_pairs
from .model import (
    AlignerParams,
    init_difference_params,
    init_params,
    load_params,
    save_params,
    snap_to_float32,
)
from .training import (
    AdamState,
    GoldExample,
    bidirectional_nll,
    example_loss_and_grads,
    gold_path,
    load_corpus,
    train,
    train_step,
)
from .types import Segment, Span, SpanAlignmentPath, WordAlignmentSet

__all__ = [
    "AdamState",
    "AlignerParams",
    "FileEmbedder",
    "GoldExample",
    "HashEmbedder",
    "Segment",
    "Span",
    "SpanAlignmentPath",
    "WordAlignmentSet",
    "align_bidirectional_merge",
    "bidirectional_nll",
    "candidate_spans",
    "embed_span",
    "example_loss_and_grads",
    "expand_word_pairs",
    "gold_path",
    "init_difference_params",
    "init_params",
    "load_corpus",
    "load_params",
    "log_partition",
    "save_params",
    "score_alignment",
    "snap_to_float32",
    "train",
    "train_step",
    "viterbi_decode",
]
