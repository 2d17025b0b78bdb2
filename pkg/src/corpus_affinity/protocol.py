"""Size-controlled measurement protocol.

To keep corpus size from confounding the measures, a source corpus is
sampled into several equal-budget sub-corpora (five of 10M tokens by
default); every measure is computed once per sub-corpus against the whole
target, and the profile reports the per-sub-corpus values with their mean
and population standard deviation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError, EmptyCorpusError, InsufficientTokensError
from .lm import perplexity, train_kn
from .metrics import (
    MEASURE_NAMES,
    ContentWordLexicon,
    content_types,
    jsd,
    vocabulary_coverage,
)
from .ngram import (
    BOUNDARY_MARKERS,
    BOUNDARY_NONE,
    POOLED,
    count_ngrams,
    strip_markers,
    to_distribution,
)

MODE_DISJOINT = "disjoint"
MODE_INDEPENDENT = "independent"


@dataclass(frozen=True)
class SamplingPlan:
    """How to draw sub-corpora from a source corpus."""

    num_subcorpora: int = 5
    token_budget: int = 10_000_000
    seed: int = 0
    mode: str = MODE_DISJOINT

    def __post_init__(self):
        if self.num_subcorpora < 1:
            raise ValueError(f"num_subcorpora must be >= 1, got {self.num_subcorpora}")
        if self.token_budget < 1:
            raise ValueError(f"token_budget must be >= 1, got {self.token_budget}")
        if self.mode not in (MODE_DISJOINT, MODE_INDEPENDENT):
            raise ValueError(f"unknown sampling mode: {self.mode!r}")

    def to_dict(self) -> dict:
        return {
            "num_subcorpora": self.num_subcorpora,
            "token_budget": self.token_budget,
            "seed": self.seed,
            "mode": self.mode,
        }


def _take_prefix(order: np.ndarray, token_counts, budget: int, start: int) -> tuple[list[int], int]:
    """Smallest run of whole documents from ``order[start:]`` reaching the budget."""
    picked: list[int] = []
    got = 0
    i = start
    n = len(order)
    while got < budget and i < n:
        idx = int(order[i])
        picked.append(idx)
        got += token_counts[idx]
        i += 1
    return picked, got


def plan_subcorpora(token_counts: Sequence[int], plan: SamplingPlan) -> tuple[list[list[int]], str]:
    """Choose document indices for each sub-corpus.

    Returns ``(groups, mode_used)``. Disjoint mode shuffles once and slices
    consecutive whole-document runs, each the minimal prefix reaching the
    budget; independent mode reshuffles per sub-corpus with ``seed + i``.
    Disjoint requests that cannot be satisfied downgrade to independent with
    a warning; a corpus below one budget is a hard error.
    """
    total = int(sum(token_counts))
    if total < plan.token_budget:
        raise InsufficientTokensError(
            f"corpus has {total} tokens, below the {plan.token_budget}-token budget"
        )
    n = len(token_counts)
    mode = plan.mode
    if mode == MODE_DISJOINT:
        needed = plan.num_subcorpora * plan.token_budget
        if total < needed:
            warnings.warn(
                f"corpus has {total} tokens but disjoint sampling of "
                f"{plan.num_subcorpora} x {plan.token_budget} needs {needed}; "
                "falling back to independent sampling"
            )
            mode = MODE_INDEPENDENT
    if mode == MODE_DISJOINT:
        order = np.random.default_rng(plan.seed).permutation(n)
        groups = []
        start = 0
        for _ in range(plan.num_subcorpora):
            picked, got = _take_prefix(order, token_counts, plan.token_budget, start)
            if got < plan.token_budget:
                # Whole-document granularity overshot earlier runs; retry
                # with overlapping samples instead of failing.
                warnings.warn(
                    "disjoint sampling ran out of documents before filling "
                    f"all {plan.num_subcorpora} sub-corpora; "
                    "falling back to independent sampling"
                )
                mode = MODE_INDEPENDENT
                break
            groups.append(picked)
            start += len(picked)
        if mode == MODE_DISJOINT:
            return groups, MODE_DISJOINT
    groups = []
    for i in range(plan.num_subcorpora):
        order = np.random.default_rng(plan.seed + i).permutation(n)
        picked, got = _take_prefix(order, token_counts, plan.token_budget, 0)
        if got < plan.token_budget:
            raise InsufficientTokensError(
                f"corpus has {total} tokens, below the {plan.token_budget}-token budget"
            )
        groups.append(picked)
    return groups, MODE_INDEPENDENT


def sample_subcorpora(
    docs: Sequence[list[str]], plan: SamplingPlan
) -> tuple[list[list[list[str]]], str]:
    """Materialize sub-corpora as lists of token streams (documents shared,
    not copied). Returns ``(subcorpora, mode_used)``."""
    token_counts = [len(d) for d in docs]
    groups, mode_used = plan_subcorpora(token_counts, plan)
    return [[docs[i] for i in group] for group in groups], mode_used


@dataclass
class MeasureStats:
    values: list[float]
    mean: float
    std: float


@dataclass
class SimilarityProfile:
    """Per-measure sub-corpus values and aggregates for one source/target pair."""

    source_id: str
    target_id: str
    plan: SamplingPlan
    mode_used: str
    measures: dict[str, MeasureStats] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        plan = self.plan.to_dict()
        plan["mode_used"] = self.mode_used
        return {
            "source": self.source_id,
            "target": self.target_id,
            "plan": plan,
            "measures": {
                name: {"values": st.values, "mean": st.mean, "std": st.std}
                for name, st in self.measures.items()
            },
        }

    def to_csv_rows(self) -> list[tuple[str, str, str, int, float]]:
        rows = []
        for name, st in self.measures.items():
            for i, v in enumerate(st.values):
                rows.append((self.source_id, self.target_id, name, i, v))
        return rows

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SimilarityProfile":
        try:
            plan_obj = dict(obj["plan"])
            mode_used = plan_obj.pop("mode_used")
            plan = SamplingPlan(**plan_obj)
            measures = {
                name: MeasureStats(list(st["values"]), float(st["mean"]), float(st["std"]))
                for name, st in obj["measures"].items()
            }
            return cls(str(obj["source"]), str(obj["target"]), plan, mode_used, measures)
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed similarity profile: {exc}") from exc


def _stats(values: list[float]) -> MeasureStats:
    arr = np.asarray(values, dtype=np.float64)
    return MeasureStats(values, float(arr.mean()), float(arr.std()))


def similarity_profile(
    source_docs: Sequence[list[str]],
    target_docs: Sequence[list[str]],
    plan: SamplingPlan,
    *,
    lexicon: ContentWordLexicon | None = None,
    discount: float | None = None,
    min_count: int = 1,
    fingerprint: str | None = None,
    source_id: str = "source",
    target_id: str = "target",
    sample_target: bool = False,
) -> SimilarityProfile:
    """Measure source-target similarity over the sampling plan.

    Per sub-corpus: a Kneser-Ney trigram model is trained on the sub-corpus
    and scores the whole target (ppl); pooled and per-order n-gram JSDs are
    computed between sub-corpus and target; tvc covers the target's content
    vocabulary with the sub-corpus; ttr is the sub-corpus's own diversity.
    The target is used whole unless ``sample_target`` draws one budget-sized
    sample from it (seeded with ``plan.seed + plan.num_subcorpora``).
    """
    if not source_docs or not target_docs:
        raise EmptyCorpusError("similarity profile needs non-empty source and target corpora")
    if lexicon is None:
        lexicon = ContentWordLexicon.bundled()

    if sample_target:
        target_plan = SamplingPlan(1, plan.token_budget, plan.seed + plan.num_subcorpora, MODE_INDEPENDENT)
        target_subs, _ = sample_subcorpora(target_docs, target_plan)
        target_docs = target_subs[0]

    target_table = count_ngrams(target_docs, 3, BOUNDARY_NONE)
    target_dists = {
        "jsd_pooled": to_distribution(target_table, POOLED),
        "jsd_1": to_distribution(target_table, 1),
        "jsd_2": to_distribution(target_table, 2),
        "jsd_3": to_distribution(target_table, 3),
    }
    target_vocab = content_types(target_table.counts[1], lexicon)

    subcorpora, mode_used = sample_subcorpora(source_docs, plan)
    values: dict[str, list[float]] = {name: [] for name in MEASURE_NAMES}
    for sub in subcorpora:
        marked = count_ngrams(sub, 3, BOUNDARY_MARKERS)
        model = train_kn(marked, discount=discount, min_count=min_count, fingerprint=fingerprint)
        values["ppl"].append(perplexity(model, target_docs).perplexity)
        plain = strip_markers(marked)
        values["jsd_pooled"].append(jsd(to_distribution(plain, POOLED), target_dists["jsd_pooled"]))
        values["jsd_1"].append(jsd(to_distribution(plain, 1), target_dists["jsd_1"]))
        values["jsd_2"].append(jsd(to_distribution(plain, 2), target_dists["jsd_2"]))
        values["jsd_3"].append(jsd(to_distribution(plain, 3), target_dists["jsd_3"]))
        source_vocab = content_types(plain.counts[1], lexicon)
        values["tvc"].append(vocabulary_coverage(target_vocab, source_vocab))
        values["ttr"].append(len(plain.counts[1]) / plain.totals[1])

    profile = SimilarityProfile(source_id, target_id, plan, mode_used)
    for name in MEASURE_NAMES:
        profile.measures[name] = _stats(values[name])
    return profile
