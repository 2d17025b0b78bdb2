"""Brute-force reference for interpolated modified Kneser-Ney probabilities.

Deliberately naive and structurally unlike the production trainer: counts are
tuple-keyed, adjusted counts are recomputed by scanning the next order on
every query, and probabilities follow the textbook recursion top-down with no
caching, no trie, and no precomputed backoff weights. Only suitable for tiny
corpora; used to pin expected values in tests.
"""

from collections import Counter

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

MAX_DISCOUNT = 1.0 - 1e-9


def ngram_counts(docs, max_order=3):
    """Tuple-keyed counts with the same padding scheme as production counting."""
    counts = {k: Counter() for k in range(1, max_order + 1)}
    for toks in docs:
        counts[1].update((w,) for w in toks)
        counts[1][(EOS,)] += 1
        padded = [BOS] * (max_order - 1) + list(toks) + [EOS]
        for k in range(2, max_order + 1):
            for i in range(len(padded) - k + 1):
                counts[k][tuple(padded[i : i + k])] += 1
    return counts


def vocabulary(counts):
    return {g[0] for g in counts[1]} | {UNK}


def adjusted_count(counts, gram, max_order):
    """Raw count at the highest order or for sentence-start grams, otherwise
    the number of distinct words that precede the gram."""
    if len(gram) == max_order or gram[0] == BOS:
        return counts[len(gram)].get(gram, 0)
    higher = counts[len(gram) + 1]
    return sum(1 for g in higher if g[1:] == gram)


def _band(d, count):
    return d[2] if count >= 3 else d[count - 1]


def estimate_discounts(counts, order, max_order):
    """Count-of-counts discounts over adjusted counts of one order."""
    n = Counter()
    for g in counts[order]:
        if g[-1] == BOS:
            continue
        a = adjusted_count(counts, g, max_order)
        if 1 <= a <= 4:
            n[a] += 1
    if n[1] == 0 or n[2] == 0:
        return (0.5, 0.5, 0.5)
    y = n[1] / (n[1] + 2 * n[2])
    clamp = lambda d: min(max(d, 0.0), MAX_DISCOUNT)
    d1 = clamp(1 - 2 * y * n[2] / n[1])
    d2 = clamp(2 - 3 * y * n[3] / n[2])
    d3 = clamp(3 - 4 * y * n[4] / n[3]) if n[3] > 0 else d2
    return (d1, d2, d3)


def discounts_for(counts, max_order, fixed=None):
    if fixed is not None:
        return {k: (fixed, fixed, fixed) for k in range(1, max_order + 1)}
    return {k: estimate_discounts(counts, k, max_order) for k in range(1, max_order + 1)}


def cond_prob(counts, discounts, word, context, max_order=3):
    """p(word | context) by direct recursion over scanned adjusted counts."""
    vocab = vocabulary(counts)
    if word not in vocab:
        word = UNK
    history = tuple(
        t if (t in vocab or t == BOS) else UNK for t in tuple(context)[-(max_order - 1) :]
    )

    def p(w, h):
        k = len(h) + 1
        if k == 1:
            lower = 1.0 / len(vocab)
            grams = [g for g in counts[1] if g[-1] != BOS]
        else:
            lower = p(w, h[1:])
            grams = [g for g in counts[k] if g[:-1] == h and g[-1] != BOS]
        pairs = [(g, adjusted_count(counts, g, max_order)) for g in grams]
        pairs = [(g, a) for g, a in pairs if a > 0]
        if not pairs:
            return lower
        denom = sum(a for _, a in pairs)
        d = discounts[k]
        gamma = sum(_band(d, a) for _, a in pairs) / denom
        a_w = dict(pairs).get(h + (w,), 0)
        discounted = (a_w - _band(d, a_w)) / denom if a_w > 0 else 0.0
        return max(discounted, 0.0) + gamma * lower

    return p(word, history)


def sequence_log_prob(counts, discounts, tokens, max_order=3):
    import math

    padded = [BOS] * (max_order - 1) + list(tokens) + [EOS]
    total = 0.0
    for i in range(max_order - 1, len(padded)):
        total += math.log(
            cond_prob(counts, discounts, padded[i], padded[max(0, i - max_order + 1) : i], max_order)
        )
    return total


def perplexity(counts, discounts, docs, max_order=3):
    import math

    total = 0.0
    n = 0
    for toks in docs:
        total += sequence_log_prob(counts, discounts, toks, max_order)
        n += len(toks) + 1
    return math.exp(-total / n)
