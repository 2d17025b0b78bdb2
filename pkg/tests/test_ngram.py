"""N-gram counting, merging, distributions, and the count artifact."""

import math

import numpy as np
import pytest

from conftest import make_corpus, make_vocab
from corpus_affinity.errors import DataError, EmptyCorpusError
from corpus_affinity.ngram import (
    BOUNDARY_MARKERS,
    BOUNDARY_NONE,
    POOLED,
    NgramTable,
    count_ngrams,
    merge_tables,
    read_counts,
    strip_markers,
    to_distribution,
    write_counts,
)


class TestCountNgrams:
    def test_direct_enumeration(self):
        table = count_ngrams([["a", "b", "a"]], 2, BOUNDARY_NONE)
        assert dict(table.counts[1]) == {"a": 2, "b": 1}
        assert dict(table.counts[2]) == {"a b": 1, "b a": 1}
        assert table.totals[1] == 3 and table.totals[2] == 2

    def test_empty_stream(self):
        table = count_ngrams([], 3, BOUNDARY_NONE)
        assert table.totals[1:] == [0, 0, 0]

    def test_sentence_marker_padding_order2(self):
        table = count_ngrams([["a"]], 2, BOUNDARY_MARKERS)
        assert dict(table.counts[2]) == {"<s> a": 1, "a </s>": 1}
        assert dict(table.counts[1]) == {"a": 1, "</s>": 1}

    def test_sentence_marker_padding_order3(self):
        table = count_ngrams([["a"]], 3, BOUNDARY_MARKERS)
        assert dict(table.counts[2]) == {"<s> <s>": 1, "<s> a": 1, "a </s>": 1}
        assert dict(table.counts[3]) == {"<s> <s> a": 1, "<s> a </s>": 1}

    def test_bos_never_a_unigram(self):
        table = count_ngrams([["a"], []], 3, BOUNDARY_MARKERS)
        assert "<s>" not in table.counts[1]
        assert table.counts[1]["</s>"] == 2

    def test_totals_match_window_formula(self):
        rng = np.random.default_rng(5)
        docs = make_corpus(rng, make_vocab(20), 400, mean_len=4)
        for boundary in (BOUNDARY_NONE, BOUNDARY_MARKERS):
            table = count_ngrams(docs, 3, boundary)
            for n in range(1, 4):
                if boundary == BOUNDARY_NONE:
                    expected = sum(max(len(d) - n + 1, 0) for d in docs)
                elif n == 1:
                    expected = sum(len(d) + 1 for d in docs)
                else:
                    expected = sum(len(d) + 3 - n + 1 for d in docs)
                assert table.totals[n] == expected, (boundary, n)

    def test_prefix_suffix_closure(self):
        rng = np.random.default_rng(6)
        docs = make_corpus(rng, make_vocab(12), 300, mean_len=5)
        table = count_ngrams(docs, 3, BOUNDARY_MARKERS)
        for k in (2, 3):
            lower = table.counts[k - 1]
            for key in table.counts[k]:
                prefix = key.rsplit(" ", 1)[0]
                suffix = key.split(" ", 1)[1]
                assert prefix in lower or prefix == "<s>", key
                assert suffix in lower or suffix == "<s>", key

    def test_order_out_of_range(self):
        with pytest.raises(ValueError):
            count_ngrams([["a"]], 4)
        with pytest.raises(ValueError):
            count_ngrams([["a"]], 0)

    def test_streaming_accepts_generator(self):
        gen = (doc for doc in [["a", "b"], ["b"]])
        table = count_ngrams(gen, 2, BOUNDARY_NONE)
        assert table.counts[1]["b"] == 2


class TestMergeTables:
    def test_simple_sum(self):
        a = count_ngrams([["a"]], 1, BOUNDARY_NONE)
        b = count_ngrams([["a", "a", "b"]], 1, BOUNDARY_NONE)
        merged = merge_tables(a, b)
        assert dict(merged.counts[1]) == {"a": 3, "b": 1}

    def test_identity(self):
        t = count_ngrams([["a", "b"]], 2, BOUNDARY_NONE)
        empty = count_ngrams([], 2, BOUNDARY_NONE)
        assert merge_tables(t, empty).counts == t.counts

    def test_commutative_associative(self):
        rng = np.random.default_rng(8)
        vocab = make_vocab(6)
        tables = [
            count_ngrams(make_corpus(rng, vocab, 60, mean_len=3), 2, BOUNDARY_NONE)
            for _ in range(3)
        ]
        t1, t2, t3 = tables
        ab = merge_tables(t1, t2)
        ba = merge_tables(t2, t1)
        assert ab.counts == ba.counts
        left = merge_tables(merge_tables(t1, t2), t3)
        right = merge_tables(t1, merge_tables(t2, t3))
        assert left.counts == right.counts and left.totals == right.totals

    def test_config_mismatch_rejected(self):
        a = count_ngrams([["a"]], 2, BOUNDARY_NONE)
        b = count_ngrams([["a"]], 2, BOUNDARY_MARKERS)
        c = count_ngrams([["a"]], 3, BOUNDARY_NONE)
        with pytest.raises(ValueError):
            merge_tables(a, b)
        with pytest.raises(ValueError):
            merge_tables(a, c)

    def test_sharded_counting_equals_single_pass(self):
        rng = np.random.default_rng(9)
        docs = make_corpus(rng, make_vocab(15), 500, mean_len=6)
        whole = count_ngrams(docs, 3, BOUNDARY_MARKERS)
        for n_shards in (2, 3, 7):
            shards = [docs[i::n_shards] for i in range(n_shards)]
            tables = [count_ngrams(s, 3, BOUNDARY_MARKERS) for s in shards]
            merged = tables[0]
            for t in tables[1:]:
                merged = merge_tables(merged, t)
            assert merged.counts == whole.counts
            assert merged.totals == whole.totals


class TestStripMarkers:
    def test_equals_direct_plain_counting(self):
        rng = np.random.default_rng(10)
        docs = make_corpus(rng, make_vocab(18), 600, mean_len=5)
        marked = count_ngrams(docs, 3, BOUNDARY_MARKERS)
        direct = count_ngrams(docs, 3, BOUNDARY_NONE)
        stripped = strip_markers(marked)
        assert stripped.counts == direct.counts
        assert stripped.totals == direct.totals
        assert stripped.boundary == BOUNDARY_NONE

    def test_requires_marker_table(self):
        with pytest.raises(ValueError):
            strip_markers(count_ngrams([["a"]], 2, BOUNDARY_NONE))


class TestToDistribution:
    def test_order1(self):
        table = count_ngrams([["a", "a", "b", "c"]], 1, BOUNDARY_NONE)
        dist = to_distribution(table, 1)
        assert dist.probs == {"a": 0.5, "b": 0.25, "c": 0.25}

    def test_pooled_unigram_only(self):
        table = count_ngrams([["a"]], 1, BOUNDARY_NONE)
        dist = to_distribution(table, POOLED)
        assert dist.probs == {"a": 1.0}

    def test_pooled_mixed_orders(self):
        table = count_ngrams([["a", "b"]], 2, BOUNDARY_NONE)
        dist = to_distribution(table, POOLED)
        assert dist.probs == pytest.approx({"a": 1 / 3, "b": 1 / 3, "a b": 1 / 3})

    def test_sums_to_one_every_pooling(self):
        rng = np.random.default_rng(12)
        docs = make_corpus(rng, make_vocab(25), 800, mean_len=7)
        table = count_ngrams(docs, 3, BOUNDARY_NONE)
        for pooling in (1, 2, 3, POOLED):
            dist = to_distribution(table, pooling)
            assert math.fsum(dist.probs.values()) == pytest.approx(1.0, abs=1e-9)
            assert all(0.0 < p <= 1.0 for p in dist.probs.values())

    def test_empty_selection_raises(self):
        table = count_ngrams([], 2, BOUNDARY_NONE)
        with pytest.raises(EmptyCorpusError):
            to_distribution(table, 1)
        single = count_ngrams([["a"]], 2, BOUNDARY_NONE)
        with pytest.raises(EmptyCorpusError):
            to_distribution(single, 2)  # no bigrams in a one-token corpus

    def test_bad_order(self):
        table = count_ngrams([["a", "b"]], 2, BOUNDARY_NONE)
        with pytest.raises(ValueError):
            to_distribution(table, 3)


class TestCountArtifact:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(13)
        docs = make_corpus(rng, make_vocab(30), 500, mean_len=6)
        table = count_ngrams(docs, 3, BOUNDARY_MARKERS)
        p1 = tmp_path / "counts.tsv"
        p2 = tmp_path / "again.tsv"
        write_counts(table, p1)
        loaded = read_counts(p1)
        assert loaded.counts == table.counts
        assert loaded.totals == table.totals
        write_counts(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_format(self, tmp_path):
        table = count_ngrams([["a", "b"]], 2, BOUNDARY_NONE)
        path = tmp_path / "c.tsv"
        write_counts(table, path)
        head = path.read_text(encoding="utf-8").splitlines()[0]
        assert head == "corpus-affinity-counts v1 max_order=2 boundary=none"

    def test_lines_sorted(self, tmp_path):
        table = count_ngrams([["b", "a", "b"]], 2, BOUNDARY_NONE)
        path = tmp_path / "c.tsv"
        write_counts(table, path)
        lines = path.read_text(encoding="utf-8").splitlines()[1:]
        keys = [(int(line.split("\t")[0]), line.split("\t")[2]) for line in lines]
        assert keys == sorted(keys)

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("something else entirely\n", encoding="utf-8")
        with pytest.raises(DataError):
            read_counts(path)

    def test_rejects_malformed_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text(
            "corpus-affinity-counts v1 max_order=2 boundary=none\n1\tnotanumber\ta\n",
            encoding="utf-8",
        )
        with pytest.raises(DataError, match="line 1"):
            read_counts(path)


def test_table_validates_configuration():
    with pytest.raises(ValueError):
        NgramTable(5)
    with pytest.raises(ValueError):
        NgramTable(2, "paragraphs")
