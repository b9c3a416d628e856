"""Caption tokenization, POS tagging and noun-phrase extraction.

The bundled tagger is a closed lexicon (shipped as ``data/lexicon.tsv``)
plus a handful of suffix heuristics; out-of-vocabulary tokens fall back to
NN so that an unknown word can only ever *add* a keep-region candidate.
Pre-tagged captions can be supplied through a TSV file instead (one
``token<TAB>tag`` per line, blank line between sentences).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from .errors import EmptyCaption

TAGSET = {"DT", "NN", "NNS", "JJ", "IN", "CC", "OTHER"}
_VERB_RE = re.compile(r"^VB[DGNPZ]?$")
_TOKEN_RE = re.compile(r"[a-z0-9']+")

# default cut for "similar enough" caption pairs when filtering a dataset
# by unigram overlap (0.7 also appears in the wild; this is configurable)
DEFAULT_ROUGE_THRESHOLD = 0.75


def _valid_tag(tag: str) -> bool:
    return tag in TAGSET or bool(_VERB_RE.match(tag))


@dataclass(frozen=True)
class NounPhrase:
    """A noun head plus the adjective modifiers attached to it."""

    head_index: int
    modifier_indices: tuple[int, ...] = ()


@dataclass
class TokenizedCaption:
    """A caption with tokens, tags and extracted noun phrases."""

    text: str
    tokens: list[str]
    tags: list[str] = field(default_factory=list)
    phrases: list[NounPhrase] = field(default_factory=list)

    def __post_init__(self):
        if self.tags and len(self.tags) != len(self.tokens):
            raise ValueError("tokens and tags must have the same length")


def tokenize(text: str) -> list[str]:
    """Lowercase a caption and split it into alphanumeric tokens."""
    tokens = _TOKEN_RE.findall(text.lower())
    if not tokens:
        raise EmptyCaption(f"no tokens in {text!r}")
    return tokens


def stem(token: str) -> str:
    """Trivial plural stripper so 'flowers' and 'flower' compare equal."""
    if len(token) > 3 and token.endswith("s") and not token.endswith("ss"):
        return token[:-1]
    return token


class LexiconTagger:
    """Deterministic tagger backed by the shipped closed lexicon."""

    def __init__(self, lexicon: dict[str, str] | None = None):
        self.lexicon = dict(_bundled_lexicon()) if lexicon is None else dict(lexicon)

    def tag(self, tokens: list[str]) -> list[str]:
        return [self._tag_one(tok) for tok in tokens]

    def _tag_one(self, token: str) -> str:
        hit = self.lexicon.get(token)
        if hit is not None:
            return hit
        # plural of a known noun
        if token.endswith("s"):
            base = self.lexicon.get(token[:-1])
            if base in ("NN", "NNS"):
                return "NNS"
        if token.endswith("ing") and len(token) > 5:
            return "VBG"
        if token.endswith("ed") and len(token) > 4:
            return "VBD"
        if token.endswith("ly") and len(token) > 4:
            return "OTHER"
        if token.endswith("s") and len(token) > 3 and not token.endswith("ss"):
            return "NNS"
        return "NN"  # unknown words default to the safe class


class TsvTagger:
    """Tagger that replays externally produced tags from a TSV file.

    Sentences are keyed by their token sequence; captions absent from the
    file fall back to the bundled lexicon tagger.
    """

    def __init__(self, path, fallback: LexiconTagger | None = None):
        self.sentences: dict[tuple[str, ...], list[str]] = {}
        self.fallback = fallback or LexiconTagger()
        current: list[tuple[str, str]] = []
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.rstrip("\n")
                if not line.strip():
                    self._flush(current)
                    current = []
                    continue
                token, tag = line.split("\t")
                if not _valid_tag(tag):
                    raise ValueError(f"unknown tag {tag!r} in {path}")
                current.append((token.lower(), tag))
        self._flush(current)

    def _flush(self, sentence: list[tuple[str, str]]) -> None:
        if sentence:
            tokens = tuple(tok for tok, _ in sentence)
            self.sentences[tokens] = [tag for _, tag in sentence]

    def tag(self, tokens: list[str]) -> list[str]:
        hit = self.sentences.get(tuple(tokens))
        if hit is not None:
            return list(hit)
        return self.fallback.tag(tokens)


def pos_tag(tokens: list[str], tagger=None) -> list[str]:
    """Tag tokens with the bundled lexicon tagger unless one is supplied."""
    if not tokens:
        raise EmptyCaption("cannot tag an empty token list")
    tagger = tagger or LexiconTagger()
    tags = tagger.tag(tokens)
    if len(tags) != len(tokens):
        raise ValueError("tagger returned wrong number of tags")
    return tags


def extract_noun_phrases(caption: TokenizedCaption) -> list[NounPhrase]:
    """Attach to each noun head its contiguous preceding adjective run.

    Attachment only happens inside an unbroken DT/JJ/NN(S) run, and a
    modifier can never be claimed by two heads.
    """
    if len(caption.tags) != len(caption.tokens):
        raise ValueError("caption must be tagged before phrase extraction")
    phrases = []
    run_start = 0  # first index of the current DT/JJ/NN run
    for i, tag in enumerate(caption.tags):
        if tag not in ("DT", "JJ", "NN", "NNS"):
            run_start = i + 1
            continue
        if tag in ("NN", "NNS"):
            mods = []
            j = i - 1
            while j >= run_start and caption.tags[j] == "JJ":
                mods.append(j)
                j -= 1
            phrases.append(NounPhrase(i, tuple(reversed(mods))))
            run_start = i + 1  # modifiers are never shared across heads
    return phrases


def analyze(text: str, tagger=None) -> TokenizedCaption:
    """Tokenize, tag and chunk a raw caption string."""
    tokens = tokenize(text)
    caption = TokenizedCaption(text=text, tokens=tokens, tags=pos_tag(tokens, tagger))
    caption.phrases = extract_noun_phrases(caption)
    return caption


def rouge_similarity(c1: TokenizedCaption, c2: TokenizedCaption) -> float:
    """Unigram overlap F1 between two tokenized captions."""
    if not c1.tokens or not c2.tokens:
        raise EmptyCaption("both captions must be tokenized and non-empty")
    counts1: dict[str, int] = {}
    for tok in c1.tokens:
        counts1[tok] = counts1.get(tok, 0) + 1
    overlap = 0
    for tok in c2.tokens:
        if counts1.get(tok, 0) > 0:
            counts1[tok] -= 1
            overlap += 1
    return 2.0 * overlap / (len(c1.tokens) + len(c2.tokens))


def _bundled_lexicon() -> dict[str, str]:
    text = resources.files("dmalign").joinpath("data/lexicon.tsv").read_text("utf-8")
    lexicon = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        token, tag = line.split("\t")
        if not _valid_tag(tag):
            raise ValueError(f"invalid tag {tag!r} in bundled lexicon")
        lexicon[token] = tag
    return lexicon
