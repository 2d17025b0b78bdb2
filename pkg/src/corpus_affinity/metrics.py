"""Distributional and lexical similarity measures: JSD, TVC, TTR.

JSD is computed in base-2 logs so it lives in [0, 1] (0 = identical
distributions, 1 = disjoint supports). TVC counts only content words (nouns,
verbs, adjectives) on both sides; words missing from the lexicon fall back to
"alphabetic means content".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

from .errors import DataError, EmptyCorpusError, EmptyVocabularyError
from .ngram import Distribution

CONTENT_TAGS = frozenset({"noun", "verb", "adjective"})
_VALID_TAGS = frozenset({"noun", "verb", "adjective", "other"})

#: measure name -> how its value relates to similarity
MEASURE_DIRECTIONS = {
    "ppl": "lower-is-more-similar",
    "jsd_pooled": "lower-is-more-similar",
    "jsd_1": "lower-is-more-similar",
    "jsd_2": "lower-is-more-similar",
    "jsd_3": "lower-is-more-similar",
    "tvc": "higher-is-more-similar",
    "ttr": "diversity",
}

MEASURE_NAMES = tuple(MEASURE_DIRECTIONS)


@dataclass(frozen=True)
class MeasureValue:
    measure: str
    value: float
    direction: str


def measure_value(measure: str, value: float) -> MeasureValue:
    if measure not in MEASURE_DIRECTIONS:
        raise ValueError(f"unknown measure: {measure!r}")
    return MeasureValue(measure, value, MEASURE_DIRECTIONS[measure])


def jsd(p: Distribution, q: Distribution) -> float:
    """Jensen-Shannon divergence between two term distributions, base 2.

    JSD = KL(P||M)/2 + KL(Q||M)/2 with M = (P + Q)/2. Terms absent from one
    side contribute through M only, so no extra smoothing is needed. The
    union of terms is walked in sorted order and each term's two summands are
    formed symmetrically, which makes ``jsd(p, q) == jsd(q, p)`` bit-exact.
    """
    if p.pooling != q.pooling:
        raise ValueError(f"pooling modes differ: {p.pooling!r} vs {q.pooling!r}")
    pp = p.probs
    qp = q.probs
    log2 = math.log2
    acc = 0.0
    for term in sorted(pp.keys() | qp.keys()):
        a = pp.get(term, 0.0)
        b = qp.get(term, 0.0)
        m = a + b  # = 2M(term)
        left = a * log2(2.0 * a / m) if a > 0.0 else 0.0
        right = b * log2(2.0 * b / m) if b > 0.0 else 0.0
        acc += 0.5 * (left + right)
    # Rounding can push the sum epsilon outside the theoretical range.
    return min(max(acc, 0.0), 1.0)


class ContentWordLexicon:
    """Word -> coarse part-of-speech map with a total fallback rule.

    Words absent from the map count as content words when alphabetic and as
    non-content otherwise, so a small bundled list of closed-class function
    words is enough to make TVC behave sensibly.
    """

    def __init__(self, tags: dict[str, str], source_name: str = "custom"):
        self.tags = tags
        self.source_name = source_name

    @classmethod
    def load(cls, path) -> "ContentWordLexicon":
        """Read a ``word<TAB>tag`` file; ``#`` lines are comments."""
        tags: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) != 2 or not fields[0]:
                    raise DataError(f"{path}: malformed lexicon line {lineno}")
                word, tag = fields
                if tag not in _VALID_TAGS:
                    raise DataError(f"{path}: line {lineno}: unknown tag {tag!r}")
                tags[word.lower()] = tag
        return cls(tags, source_name=str(path))

    @classmethod
    def bundled(cls) -> "ContentWordLexicon":
        """The lexicon shipped with the package (English function words)."""
        ref = resources.files("corpus_affinity").joinpath("data/content_word_lexicon.tsv")
        with resources.as_file(ref) as path:
            lex = cls.load(path)
        lex.source_name = "bundled"
        return lex

    def is_content(self, token: str) -> bool:
        tag = self.tags.get(token.lower())
        if tag is not None:
            return tag in CONTENT_TAGS
        return token.isalpha()


def filter_content_words(tokens: Iterable[str], lexicon: ContentWordLexicon) -> list[str]:
    """Keep nouns, verbs, adjectives, and unknown alphabetic tokens, in order."""
    is_content = lexicon.is_content
    return [t for t in tokens if is_content(t)]


def content_types(tokens: Iterable[str], lexicon: ContentWordLexicon) -> set[str]:
    """The set of content-word types occurring in ``tokens``."""
    is_content = lexicon.is_content
    return {t for t in set(tokens) if is_content(t)}


def vocabulary_coverage(target_types: set[str], source_types: set[str]) -> float:
    """Fraction of target types also present in the source."""
    if not target_types:
        raise EmptyVocabularyError("target has no content-word types")
    return len(target_types & source_types) / len(target_types)


def tvc(
    target_tokens: Iterable[str],
    source_tokens: Iterable[str],
    lexicon: ContentWordLexicon,
) -> float:
    """Target vocabulary covered: share of the target's content-word types
    that appear in the source (both sides content-filtered)."""
    return vocabulary_coverage(
        content_types(target_tokens, lexicon), content_types(source_tokens, lexicon)
    )


def ttr(tokens: Sequence[str]) -> float:
    """Type-token ratio: distinct token types over total tokens."""
    if not tokens:
        raise EmptyCorpusError("type-token ratio of an empty token stream")
    return len(set(tokens)) / len(tokens)
