"""Interpolated modified Kneser-Ney 3-gram language model and perplexity.

Training consumes an :class:`~corpus_affinity.ngram.NgramTable` counted with
sentence markers. Lower orders use continuation counts (the number of
distinct left contexts), except n-grams starting with ``<s>``, which keep raw
counts because nothing can precede a sentence start. ``<unk>`` is a first-
class vocabulary member that receives the interpolated zero-count mass at the
unigram level, so out-of-vocabulary text always scores finite probabilities.

Probabilities are stored raw (not logs); scoring takes logs on accumulation.
For every context ``h`` (seen or unseen), ``sum_w p(w | h)`` over the full
vocabulary is 1 up to float rounding.
"""

from __future__ import annotations

import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConfigMismatchError, DataError, EmptyCorpusError
from .ngram import BOS, BOUNDARY_MARKERS, EOS, NgramTable

UNK = "<unk>"

# Discounts live in [0, 1) so that every stored count keeps positive mass.
_MAX_DISCOUNT = 1.0 - 1e-9

ARPA_CONTEXT_ONLY = -99.0  # conventional log10 "probability" of <s>-type entries


def _estimate_discounts(values, order: int) -> tuple[float, float, float]:
    """Count-of-counts discount estimates (D1, D2, D3+) for one order.

    Degenerate statistics (no singletons or no doubletons) fall back to a
    fixed 0.5 with a warning; a missing n3 reuses D2 for the 3+ band.
    """
    n1 = n2 = n3 = n4 = 0
    for v in values:
        if v == 1:
            n1 += 1
        elif v == 2:
            n2 += 1
        elif v == 3:
            n3 += 1
        elif v == 4:
            n4 += 1
    if n1 == 0 or n2 == 0:
        warnings.warn(
            f"degenerate count-of-counts at order {order} "
            f"(n1={n1}, n2={n2}); falling back to fixed discount 0.5"
        )
        return (0.5, 0.5, 0.5)
    y = n1 / (n1 + 2 * n2)
    clamp = lambda d: min(max(d, 0.0), _MAX_DISCOUNT)
    d1 = clamp(1 - 2 * y * n2 / n1)
    d2 = clamp(2 - 3 * y * n3 / n2)
    d3 = clamp(3 - 4 * y * n4 / n3) if n3 > 0 else d2
    return (d1, d2, d3)


@dataclass
class PerplexityResult:
    """Corpus-level scoring summary (natural-log accumulation)."""

    perplexity: float
    scored_token_count: int
    oov_count: int
    total_log_prob: float


class KneserNeyModel:
    """Trained trigram model: interpolated probabilities plus backoff weights.

    ``p1``/``p2``/``p3`` map space-joined n-grams to probabilities; ``bow1``/
    ``bow2`` map contexts to backoff weights (the leftover interpolation
    mass). Instances are immutable in practice and safe to share across
    workers.
    """

    def __init__(
        self,
        vocab: set[str],
        p1: dict[str, float],
        p2: dict[str, float],
        p3: dict[str, float],
        bow1: dict[str, float],
        bow2: dict[str, float],
        discounts: dict[int, tuple[float, float, float]],
        fingerprint: str | None = None,
        discount_mode: str = "auto",
        min_count: int = 1,
    ):
        self.vocab = vocab
        self.p1 = p1
        self.p2 = p2
        self.p3 = p3
        self.bow1 = bow1
        self.bow2 = bow2
        self.discounts = discounts
        self.fingerprint = fingerprint
        self.discount_mode = discount_mode
        self.min_count = min_count

    def prob(self, word: str, context: Sequence[str] = ()) -> float:
        """p(word | context), using the last two context tokens.

        OOV words (in the query or the context) are mapped to ``<unk>``;
        ``<s>`` is legal in the context only.
        """
        vocab = self.vocab
        if word not in vocab:
            word = UNK
        ctx = [t if (t in vocab or t == BOS) else UNK for t in context[-2:]]
        if len(ctx) == 2:
            u, v = ctx
            r = self.p3.get(f"{u} {v} {word}")
            if r is not None:
                return r
            back = self.bow2.get(f"{u} {v}", 1.0)
        elif len(ctx) == 1:
            v = ctx[0]
            back = 1.0
        else:
            return self.p1.get(word, self.p1[UNK])
        r = self.p2.get(f"{v} {word}")
        if r is not None:
            return back * r
        return back * self.bow1.get(v, 1.0) * self.p1.get(word, self.p1[UNK])

    def log_prob(self, word: str, context: Sequence[str] = ()) -> float:
        return math.log(self.prob(word, context))

    def score_document(self, tokens: Sequence[str]) -> tuple[float, int]:
        """Natural-log probability of one padded document and its OOV count.

        ``<s>`` markers condition but are never scored; ``</s>`` is scored.
        """
        # Hot path: local bindings, inline backoff chain.
        vocab = self.vocab
        p3_get = self.p3.get
        p2_get = self.p2.get
        p1 = self.p1
        bow1_get = self.bow1.get
        bow2_get = self.bow2.get
        log = math.log
        unk_p = p1[UNK]
        total = 0.0
        oov = 0
        u = v = BOS
        for w in tokens:
            if w not in vocab:
                w = UNK
                oov += 1
            r = p3_get(f"{u} {v} {w}")
            if r is None:
                r2 = p2_get(f"{v} {w}")
                if r2 is None:
                    r2 = bow1_get(v, 1.0) * p1.get(w, unk_p)
                r = bow2_get(f"{u} {v}", 1.0) * r2
            total += log(r)
            u, v = v, w
        w = EOS
        r = p3_get(f"{u} {v} {w}")
        if r is None:
            r2 = p2_get(f"{v} {w}")
            if r2 is None:
                r2 = bow1_get(v, 1.0) * p1.get(w, unk_p)
            r = bow2_get(f"{u} {v}", 1.0) * r2
        total += log(r)
        return total, oov


def train_kn(
    table: NgramTable,
    discount: float | None = None,
    min_count: int = 1,
    fingerprint: str | None = None,
) -> KneserNeyModel:
    """Train an interpolated modified Kneser-Ney model from trigram counts.

    ``discount=None`` estimates the three per-order discounts from
    count-of-counts; a float applies that single discount at every order and
    count band. ``min_count`` prunes raw counts below the threshold at orders
    2 and 3 only, so the vocabulary never shrinks.
    """
    if table.max_order != 3:
        raise ValueError(f"Kneser-Ney training needs a max_order=3 table, got {table.max_order}")
    if table.boundary != BOUNDARY_MARKERS:
        raise ValueError("Kneser-Ney training needs a sentence-markers table")
    if table.totals[1] == 0:
        raise EmptyCorpusError("cannot train a language model on an empty table")
    if discount is not None and not 0.0 <= discount < 1.0:
        raise ValueError(f"fixed discount must lie in [0, 1), got {discount}")
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")

    c1 = table.counts[1]
    c2 = table.counts[2]
    c3 = table.counts[3]
    if min_count > 1:
        c2 = {k: v for k, v in c2.items() if v >= min_count}
        c3 = {k: v for k, v in c3.items() if v >= min_count}

    bos_prefix = BOS + " "
    bos_suffix = " " + BOS
    partition = str.partition
    rpartition = str.rpartition

    # Adjusted counts. Highest order: raw. Bigrams: continuation counts
    # (distinct left contexts) except <s>-initial ones, which keep raw
    # counts. Entries that would predict <s> are context-only, never scored.
    cont2 = Counter()
    for key in c3:
        cont2[partition(key, " ")[2]] += 1
    a2: dict[str, int] = {}
    for key, cnt in c2.items():
        if key.endswith(bos_suffix):
            continue
        a2[key] = cnt if key.startswith(bos_prefix) else cont2[key]
    del cont2

    cont1 = Counter()
    for key in c2:
        w = rpartition(key, " ")[2]
        if w != BOS:
            cont1[w] += 1
    if not cont1:
        # Defensive: a loaded counts artifact may carry no bigram entries.
        cont1 = Counter(c1)

    if discount is not None:
        d1 = d2 = d3 = (discount, discount, discount)
    else:
        d3 = _estimate_discounts(c3.values(), 3)
        d2 = _estimate_discounts(a2.values(), 2)
        d1 = _estimate_discounts(cont1.values(), 1)
    discounts = {1: d1, 2: d2, 3: d3}

    vocab = set(c1)
    vocab.discard(BOS)
    vocab.add(UNK)
    uniform = 1.0 / len(vocab)

    # Unigram level: discounted continuation counts interpolated with the
    # uniform distribution; <unk> gets exactly the leftover mass share.
    d1a, d1b, d1c = d1
    total1 = sum(cont1.values())
    removed = 0.0
    for cnt in cont1.values():
        removed += d1c if cnt >= 3 else (d1a if cnt == 1 else d1b)
    g1 = removed / total1
    g1u = g1 * uniform
    p1: dict[str, float] = {}
    for w, cnt in cont1.items():
        d = d1c if cnt >= 3 else (d1a if cnt == 1 else d1b)
        p1[w] = (cnt - d) / total1 + g1u
    p1[UNK] = g1u
    for w in vocab:
        if w not in p1:  # unigram type with no counted left context
            p1[w] = g1u

    # Bigram level.
    d2a, d2b, d2c = d2
    denom2: Counter = Counter()
    disc2: Counter = Counter()
    for key, cnt in a2.items():
        if cnt == 0:
            continue
        h = partition(key, " ")[0]
        denom2[h] += cnt
        disc2[h] += d2c if cnt >= 3 else (d2a if cnt == 1 else d2b)
    bow1 = {h: disc2[h] / dn for h, dn in denom2.items()}
    p2: dict[str, float] = {}
    for key, cnt in a2.items():
        h, _, w = rpartition(key, " ")
        g = bow1.get(h)
        if g is None:  # history whose only continuation lost its count
            bow1[h] = g = 1.0
        if cnt == 0:
            p2[key] = g * p1[w]
            continue
        d = d2c if cnt >= 3 else (d2a if cnt == 1 else d2b)
        p2[key] = (cnt - d) / denom2[h] + g * p1[w]

    # Trigram level.
    d3a, d3b, d3c = d3
    denom3: Counter = Counter()
    disc3: Counter = Counter()
    for key, cnt in c3.items():
        h = rpartition(key, " ")[0]
        denom3[h] += cnt
        disc3[h] += d3c if cnt >= 3 else (d3a if cnt == 1 else d3b)
    bow2 = {h: disc3[h] / dn for h, dn in denom3.items()}
    p3: dict[str, float] = {}
    for key, cnt in c3.items():
        h = rpartition(key, " ")[0]
        suffix = partition(key, " ")[2]
        d = d3c if cnt >= 3 else (d3a if cnt == 1 else d3b)
        p3[key] = (cnt - d) / denom3[h] + bow2[h] * p2[suffix]

    return KneserNeyModel(
        vocab,
        p1,
        p2,
        p3,
        bow1,
        bow2,
        discounts,
        fingerprint=fingerprint,
        discount_mode="fixed" if discount is not None else "auto",
        min_count=min_count,
    )


def sequence_log_prob(model: KneserNeyModel, tokens: Sequence[str]) -> float:
    """Natural-log probability of one document under the model.

    The document is padded with two leading ``<s>`` (conditioning only) and a
    scored trailing ``</s>``; OOV tokens are mapped to ``<unk>``.
    """
    return model.score_document(tokens)[0]


def perplexity(
    model: KneserNeyModel,
    corpus: Iterable[Sequence[str]],
    fingerprint: str | None = None,
) -> PerplexityResult:
    """Perplexity of a token-stream corpus under the model.

    ``N`` counts one ``</s>`` per document in addition to the content tokens.
    Pass the tokenizer fingerprint used on the corpus to assert it matches
    the one the model was trained with.
    """
    if fingerprint is not None and model.fingerprint is not None and fingerprint != model.fingerprint:
        raise ConfigMismatchError(
            f"tokenizer fingerprint mismatch: corpus {fingerprint!r} vs model {model.fingerprint!r}"
        )
    total = 0.0
    n = 0
    oov = 0
    for tokens in corpus:
        lp, doc_oov = model.score_document(tokens)
        total += lp
        oov += doc_oov
        n += len(tokens) + 1
    if n == 0:
        raise EmptyCorpusError("cannot compute perplexity of an empty corpus")
    return PerplexityResult(math.exp(-total / n), n, oov, total)


def write_arpa_stream(model: KneserNeyModel, fh) -> None:
    """Write the model in ARPA format to an open text stream.

    Standard ARPA: log10 probabilities, backoff column where a context backs
    off, ``-99`` for entries that exist only as contexts (``<s>``). Entries
    are sorted, so equal models produce byte-identical files.
    """
    log10 = math.log10
    keys_1 = sorted(model.vocab | {BOS})
    keys_2 = sorted(model.p2.keys() | model.bow2.keys())
    keys_3 = sorted(model.p3)
    fh.write("\\data\\\n")
    fh.write(f"ngram 1={len(keys_1)}\n")
    fh.write(f"ngram 2={len(keys_2)}\n")
    fh.write(f"ngram 3={len(keys_3)}\n")
    fh.write("\n\\1-grams:\n")
    for w in keys_1:
        prob = ARPA_CONTEXT_ONLY if w == BOS else log10(model.p1[w])
        if w in model.bow1:
            fh.write(f"{prob:.12g}\t{w}\t{log10(model.bow1[w]):.12g}\n")
        else:
            fh.write(f"{prob:.12g}\t{w}\n")
    fh.write("\n\\2-grams:\n")
    for key in keys_2:
        prob = log10(model.p2[key]) if key in model.p2 else ARPA_CONTEXT_ONLY
        if key in model.bow2:
            fh.write(f"{prob:.12g}\t{key}\t{log10(model.bow2[key]):.12g}\n")
        else:
            fh.write(f"{prob:.12g}\t{key}\n")
    fh.write("\n\\3-grams:\n")
    for key in keys_3:
        fh.write(f"{log10(model.p3[key]):.12g}\t{key}\n")
    fh.write("\n\\end\\\n")


def sidecar_dict(model: KneserNeyModel) -> dict:
    """Sidecar metadata stored beside the ARPA file."""
    return {
        "format": "corpus-affinity-kn-meta v1",
        "boundary": BOUNDARY_MARKERS,
        "discount_mode": model.discount_mode,
        "discounts": {str(k): list(v) for k, v in sorted(model.discounts.items())},
        "min_count": model.min_count,
        "tokenizer_fingerprint": model.fingerprint,
        "vocab_size": len(model.vocab),
    }


def save_arpa(model: KneserNeyModel, path) -> None:
    """Write the model as an ARPA file plus a JSON sidecar at ``<path>.json``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_arpa_stream(model, fh)
    with open(f"{path}.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar_dict(model), fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def load_arpa(path) -> KneserNeyModel:
    """Read a model written by :func:`save_arpa` (sidecar optional)."""
    p = [None, {}, {}, {}]
    bow = [None, {}, {}]
    expected: dict[int, int] = {}
    seen = {1: 0, 2: 0, 3: 0}
    order = 0
    with open(path, encoding="utf-8") as fh:
        state = "preamble"
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line == "\\data\\":
                state = "data"
                continue
            if line == "\\end\\":
                state = "end"
                break
            if line.startswith("\\") and line.endswith("-grams:"):
                try:
                    order = int(line[1:-7])
                except ValueError as exc:
                    raise DataError(f"{path}: bad section header {line!r}") from exc
                if not 1 <= order <= 3:
                    raise DataError(f"{path}: unsupported n-gram order {order}")
                state = "grams"
                continue
            if state == "data":
                if line.startswith("ngram "):
                    k, _, n = line[6:].partition("=")
                    expected[int(k)] = int(n)
                continue
            if state != "grams":
                continue
            fields = line.split("\t")
            if len(fields) == 2:
                lp, key = fields
                bo = None
            elif len(fields) == 3:
                lp, key, bo = fields
            else:
                raise DataError(f"{path}: malformed {order}-gram line: {line!r}")
            lp_val = float(lp)
            seen[order] += 1
            if lp_val != ARPA_CONTEXT_ONLY:
                p[order][key] = 10.0 ** lp_val
            if bo is not None:
                if order >= 3:
                    raise DataError(f"{path}: backoff weight on a highest-order entry")
                bow[order][key] = 10.0 ** float(bo)
    if state != "end":
        raise DataError(f"{path}: truncated ARPA file (missing \\end\\)")
    for k, n in expected.items():
        if seen.get(k, 0) != n:
            raise DataError(f"{path}: header declares {n} {k}-grams, file has {seen.get(k, 0)}")
    if UNK not in p[1]:
        raise DataError(f"{path}: model has no {UNK} unigram")

    vocab = set(p[1])
    fingerprint = None
    discount_mode = "auto"
    min_count = 1
    discounts: dict[int, tuple[float, float, float]] = {}
    sidecar_path = f"{path}.json"
    try:
        with open(sidecar_path, encoding="utf-8") as fh:
            meta = json.load(fh)
        fingerprint = meta.get("tokenizer_fingerprint")
        discount_mode = meta.get("discount_mode", "auto")
        min_count = int(meta.get("min_count", 1))
        discounts = {int(k): tuple(v) for k, v in meta.get("discounts", {}).items()}
    except FileNotFoundError:
        pass
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        raise DataError(f"{sidecar_path}: malformed model sidecar: {exc}") from exc

    return KneserNeyModel(
        vocab, p[1], p[2], p[3], bow[1], bow[2], discounts,
        fingerprint=fingerprint, discount_mode=discount_mode, min_count=min_count,
    )
