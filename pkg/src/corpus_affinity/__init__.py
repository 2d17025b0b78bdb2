"""Corpus similarity measures for nominating pretraining data.

The package measures how close an unlabeled source corpus is to a target
task's text: perplexity under a Kneser-Ney trigram model trained on the
source, Jensen-Shannon divergence of n-gram term distributions, target
vocabulary coverage over content words, and the source's type-token ratio.
A sampling protocol controls for corpus size, and the analysis layer
correlates similarity with observed downstream improvements.
"""

__version__ = "0.1.0"

from .analysis import (
    CorrelationReport,
    DeltaPoint,
    ResultsTable,
    attach_similarities,
    compute_deltas,
    correlation_matrix,
    load_bundled_results,
    pearson_r,
    rank_sources,
    read_results_csv,
    read_similarity_csv,
)
from .corpus import (
    Document,
    TokenizerConfig,
    normalize_tweet,
    read_corpus,
    read_token_streams,
    tokenize,
    tokenize_documents,
)
from .errors import (
    ConfigMismatchError,
    CorpusAffinityError,
    DataError,
    EmptyCorpusError,
    EmptyVocabularyError,
    InsufficientTokensError,
)
from .lm import (
    KneserNeyModel,
    PerplexityResult,
    load_arpa,
    perplexity,
    save_arpa,
    sequence_log_prob,
    train_kn,
)
from .metrics import (
    MEASURE_DIRECTIONS,
    ContentWordLexicon,
    MeasureValue,
    filter_content_words,
    jsd,
    ttr,
    tvc,
)
from .ngram import (
    Distribution,
    NgramTable,
    count_ngrams,
    merge_tables,
    read_counts,
    strip_markers,
    to_distribution,
    write_counts,
)
from .protocol import (
    SamplingPlan,
    SimilarityProfile,
    plan_subcorpora,
    sample_subcorpora,
    similarity_profile,
)

__all__ = [
    "__version__",
    # corpus
    "Document", "TokenizerConfig", "normalize_tweet", "tokenize",
    "read_corpus", "tokenize_documents", "read_token_streams",
    # ngram
    "NgramTable", "Distribution", "count_ngrams", "merge_tables",
    "strip_markers", "to_distribution", "write_counts", "read_counts",
    # lm
    "KneserNeyModel", "PerplexityResult", "train_kn", "sequence_log_prob",
    "perplexity", "save_arpa", "load_arpa",
    # metrics
    "ContentWordLexicon", "MeasureValue", "MEASURE_DIRECTIONS", "jsd",
    "filter_content_words", "tvc", "ttr",
    # protocol
    "SamplingPlan", "SimilarityProfile", "plan_subcorpora",
    "sample_subcorpora", "similarity_profile",
    # analysis
    "ResultsTable", "DeltaPoint", "CorrelationReport", "read_results_csv",
    "load_bundled_results", "compute_deltas", "read_similarity_csv",
    "attach_similarities", "pearson_r", "correlation_matrix", "rank_sources",
    # errors
    "CorpusAffinityError", "EmptyCorpusError", "EmptyVocabularyError",
    "InsufficientTokensError", "ConfigMismatchError", "DataError",
]
