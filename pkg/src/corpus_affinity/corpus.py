"""Corpus ingestion, social-media normalization, and word-level tokenization.

Everything downstream (counting, language models, similarity measures)
consumes the token streams produced here, so the tokenizer is deterministic
by construction: equal ``(text, config)`` always yields the same tokens.
"""

from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DataError

TWITTER_USER_TOKEN = "[TwitterUser]"
URL_TOKEN = "[URL]"

# Tokens the tokenizer treats as atomic and case-preserved.
_SPECIAL_SPLIT_RE = re.compile(r"(\[TwitterUser\]|\[URL\])")

# A word is a run of word characters, optionally joined by single interior
# apostrophes or hyphens ("don't", "state-of-the-art"); anything else that is
# not whitespace becomes a single-character token.
_WORD_RE = re.compile(r"\w+(?:['’\-]\w+)*|\S")

_NONSPACE_RE = re.compile(r"\S+")

_URL_PREFIXES = ("http://", "https://", "www.")


@dataclass(frozen=True)
class Document:
    """One input unit (a line of text): a tweet, a review, a sentence."""

    id: str
    text: str


@dataclass(frozen=True)
class TokenizerConfig:
    """Deterministic tokenizer settings.

    ``normalization`` is ``"none"`` or ``"twitter"`` (apply
    :func:`normalize_tweet` before tokenizing). Special tokens produced by
    normalization are atomic and keep their case regardless of ``lowercase``.
    """

    lowercase: bool = True
    normalization: str = "none"
    keep_punctuation: bool = True

    def __post_init__(self):
        if self.normalization not in ("none", "twitter"):
            raise ValueError(f"unknown normalization mode: {self.normalization!r}")

    @property
    def fingerprint(self) -> str:
        """Canonical identity string; stored beside trained models."""
        return (
            "wordtok-v1"
            f";lowercase={'true' if self.lowercase else 'false'}"
            f";normalization={self.normalization}"
            f";keep_punctuation={'true' if self.keep_punctuation else 'false'}"
        )


def _replace_special(match: re.Match) -> str:
    tok = match.group(0)
    if tok.lower().startswith(_URL_PREFIXES):
        return URL_TOKEN
    if len(tok) >= 2 and tok[0] == "@" and tok[1] != "@":
        return TWITTER_USER_TOKEN
    return tok


def normalize_tweet(text: str) -> str:
    """Replace user handles and URLs with placeholder tokens.

    A whitespace-delimited token starting with ``@`` followed by a non-``@``
    character becomes ``[TwitterUser]``; a token starting with ``http://``,
    ``https://`` or ``www.`` (case-insensitive) becomes ``[URL]``. All other
    characters, including whitespace layout, are left untouched. Idempotent.
    """
    return _NONSPACE_RE.sub(_replace_special, text)


def tokenize(text: str, config: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Split ``text`` into word-level tokens.

    Unicode-aware: splits on whitespace, then separates punctuation into
    single-character tokens while keeping interior apostrophes and hyphens
    inside words. ``[TwitterUser]`` and ``[URL]`` survive as single tokens
    with case preserved. Tokens are interned so that repeated words share
    storage across large corpora.
    """
    if config.normalization == "twitter":
        text = normalize_tweet(text)
    intern = sys.intern
    findall = _WORD_RE.findall
    lower = config.lowercase
    out: list[str] = []
    for chunk in text.split():
        for part in _SPECIAL_SPLIT_RE.split(chunk):
            if not part:
                continue
            if part == TWITTER_USER_TOKEN or part == URL_TOKEN:
                out.append(part)
                continue
            if lower:
                part = part.lower()
            out.extend(map(intern, findall(part)))
    if not config.keep_punctuation:
        out = [t for t in out if any(ch.isalnum() for ch in t) or t in (TWITTER_USER_TOKEN, URL_TOKEN)]
    return out


def read_corpus(path, fmt: str = "text") -> Iterator[Document]:
    """Stream documents from ``path``, one per non-empty line.

    ``fmt="text"``: the line is the document text. ``fmt="jsonl"``: each line
    is a JSON object with a ``"text"`` string field and an optional ``"id"``.
    Document ids default to the 0-based line number. Constant memory in the
    corpus size.
    """
    if fmt not in ("text", "jsonl"):
        raise ValueError(f"unknown corpus format: {fmt!r}")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.rstrip("\r\n")
            if not line:
                continue
            if fmt == "text":
                yield Document(str(lineno), line)
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed JSON on line {lineno}: {exc.msg}") from exc
            if not isinstance(record, dict) or not isinstance(record.get("text"), str):
                raise DataError(f"{path}: line {lineno} has no string 'text' field")
            doc_id = str(record["id"]) if "id" in record else str(lineno)
            text = record["text"].replace("\n", " ").replace("\r", " ")
            yield Document(doc_id, text)


def tokenize_documents(
    docs: Iterable[Document], config: TokenizerConfig = TokenizerConfig()
) -> Iterator[list[str]]:
    """Map a document stream to a token-stream stream (lazy)."""
    for doc in docs:
        yield tokenize(doc.text, config)


def read_token_streams(path, fmt: str = "text", config: TokenizerConfig = TokenizerConfig()):
    """Convenience: :func:`read_corpus` piped through :func:`tokenize_documents`."""
    return tokenize_documents(read_corpus(path, fmt), config)
