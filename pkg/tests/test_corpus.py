"""Tokenization, normalization, and corpus reading."""

import json

import numpy as np
import pytest

from corpus_affinity.corpus import (
    Document,
    TokenizerConfig,
    normalize_tweet,
    read_corpus,
    tokenize,
)
from corpus_affinity.errors import DataError


class TestNormalizeTweet:
    def test_replaces_handles_and_urls(self):
        assert normalize_tweet("@john check https://t.co/ab") == "[TwitterUser] check [URL]"

    def test_noop_without_specials(self):
        assert normalize_tweet("no handles here") == "no handles here"

    def test_idempotent_on_already_normalized(self):
        assert normalize_tweet("[TwitterUser] hi [URL]") == "[TwitterUser] hi [URL]"

    def test_url_prefixes(self):
        assert normalize_tweet("www.example.com") == "[URL]"
        assert normalize_tweet("http://x.y") == "[URL]"
        assert normalize_tweet("HTTPS://X.Y") == "[URL]"
        assert normalize_tweet("notwww.example") == "notwww.example"

    def test_handle_rule_details(self):
        assert normalize_tweet("@a") == "[TwitterUser]"
        assert normalize_tweet("@") == "@"  # no following character
        assert normalize_tweet("@@host") == "@@host"  # second char is '@'
        assert normalize_tweet("mail me a@b.com") == "mail me a@b.com"  # mid-word '@'

    def test_whitespace_preserved(self):
        assert normalize_tweet("a  @b\t c\n") == "a  [TwitterUser]\t c\n"

    def test_idempotence_on_random_text(self):
        rng = np.random.default_rng(42)
        pieces = ["@user", "word", "https://a.b/c", "@@x", "[URL]", "a@b", "!?", "@", "www.x"]
        for _ in range(300):
            text = " ".join(rng.choice(pieces, size=rng.integers(0, 8)))
            once = normalize_tweet(text)
            assert normalize_tweet(once) == once


class TestTokenize:
    def test_contraction_and_punctuation(self):
        assert tokenize("Don't stop!") == ["don't", "stop", "!"]

    def test_empty(self):
        assert tokenize("") == []
        assert tokenize("   \t\n") == []

    def test_protected_tokens_keep_case(self):
        assert tokenize("[URL] ok") == ["[URL]", "ok"]
        assert tokenize("see [TwitterUser]!") == ["see", "[TwitterUser]", "!"]

    def test_protected_tokens_inside_chunks(self):
        assert tokenize("([URL])") == ["(", "[URL]", ")"]

    def test_hyphenated_words_kept_whole(self):
        assert tokenize("state-of-the-art") == ["state-of-the-art"]
        assert tokenize("x--y") == ["x", "-", "-", "y"]

    def test_lowercase_flag(self):
        cfg = TokenizerConfig(lowercase=False)
        assert tokenize("Hello World", cfg) == ["Hello", "World"]

    def test_drop_punctuation(self):
        cfg = TokenizerConfig(keep_punctuation=False)
        assert tokenize("hi, there!", cfg) == ["hi", "there"]
        assert tokenize("[URL] !", cfg) == ["[URL]"]

    def test_twitter_normalization_inside_tokenizer(self):
        cfg = TokenizerConfig(normalization="twitter")
        assert tokenize("@John says https://x.io rocks", cfg) == [
            "[TwitterUser]", "says", "[URL]", "rocks",
        ]

    def test_no_empty_tokens_and_deterministic(self):
        rng = np.random.default_rng(7)
        alphabet = list("ab c'!.-@é’[]/:")
        for _ in range(200):
            text = "".join(rng.choice(alphabet, size=rng.integers(0, 30)))
            first = tokenize(text)
            assert all(first), f"empty token from {text!r}"
            assert tokenize(text) == first

    def test_unicode_words(self):
        assert tokenize("Café déjà-vu") == ["café", "déjà-vu"]

    def test_bad_normalization_mode_rejected(self):
        with pytest.raises(ValueError):
            TokenizerConfig(normalization="shout")

    def test_fingerprint_distinguishes_configs(self):
        a = TokenizerConfig()
        b = TokenizerConfig(lowercase=False)
        c = TokenizerConfig(normalization="twitter")
        assert len({a.fingerprint, b.fingerprint, c.fingerprint}) == 3
        assert TokenizerConfig().fingerprint == a.fingerprint


class TestReadCorpus:
    def test_text_lines(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("one\ntwo\nthree\n", encoding="utf-8")
        docs = list(read_corpus(path))
        assert docs == [Document("0", "one"), Document("1", "two"), Document("2", "three")]

    def test_empty_file(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("", encoding="utf-8")
        assert list(read_corpus(path)) == []

    def test_blank_lines_skipped_ids_keep_line_numbers(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("one\n\nthree\n", encoding="utf-8")
        docs = list(read_corpus(path))
        assert [d.id for d in docs] == ["0", "2"]

    def test_nonempty_line_count_matches(self, tmp_path):
        rng = np.random.default_rng(3)
        lines = [("" if rng.random() < 0.3 else f"line {i}") for i in range(50)]
        path = tmp_path / "c.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        expected = sum(1 for line in lines if line)
        assert len(list(read_corpus(path))) == expected

    def test_jsonl(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"text":"hi"}\n{"id":"doc9","text":"yo"}\n', encoding="utf-8")
        docs = list(read_corpus(path, "jsonl"))
        assert docs[0] == Document("0", "hi")
        assert docs[1] == Document("doc9", "yo")

    def test_jsonl_malformed_names_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"text":"ok"}\n{broken\n', encoding="utf-8")
        with pytest.raises(DataError, match="line 1"):
            list(read_corpus(path, "jsonl"))

    def test_jsonl_missing_text_field(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"body":"ok"}\n', encoding="utf-8")
        with pytest.raises(DataError, match="text"):
            list(read_corpus(path, "jsonl"))

    def test_jsonl_newlines_flattened(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text(json.dumps({"text": "a\nb"}) + "\n", encoding="utf-8")
        (doc,) = read_corpus(path, "jsonl")
        assert "\n" not in doc.text

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            list(read_corpus(tmp_path / "nope.txt"))

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            list(read_corpus(tmp_path / "c.txt", "parquet"))
