"""Exception hierarchy shared across the package.

Argument misuse (wrong types, mismatched configurations) raises the builtin
``ValueError``; these classes cover data-dependent failures that a caller may
want to handle separately.
"""


class CorpusAffinityError(Exception):
    """Base class for all data-dependent errors raised by this package."""


class EmptyCorpusError(CorpusAffinityError):
    """An operation that needs at least one token/document got none."""


class EmptyVocabularyError(CorpusAffinityError):
    """A vocabulary-based measure found no content-word types to work with."""


class InsufficientTokensError(CorpusAffinityError):
    """A corpus is too small for the requested sampling budget."""


class ConfigMismatchError(CorpusAffinityError):
    """Two artifacts built under incompatible configurations were combined."""


class DataError(CorpusAffinityError):
    """An input file is malformed or incomplete (bad line, missing field)."""
