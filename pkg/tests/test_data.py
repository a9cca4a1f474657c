from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from priming_bench.data import (
    BOS, EOS, PAD, UNK, CorpusFormatError, ParallelPair, StructureLabel, Vocabulary, build_vocabulary,
    load_corpus, make_batch, save_corpus, tokenize,
)
from priming_bench.priming import generate_parallel_corpus


class TestTokenize:
    def test_source_characters(self):
        assert tokenize("他们种树", "source") == ["他", "们", "种", "树"]

    def test_target_lowercase_strip_punct(self):
        assert tokenize("They planted many trees.", "target") == ["they", "planted", "many", "trees"]

    def test_whitespace_collapse(self):
        assert tokenize(" a  b ", "target") == ["a", "b"]

    @pytest.mark.parametrize("text", ["", "   "])
    def test_empty(self, text):
        with pytest.raises(ValueError):
            tokenize(text, "target")


class TestVocabulary:
    def test_single_pair(self):
        v = build_vocabulary([ParallelPair("x", "a b")], "target")
        assert v.token_to_id == {"<pad>": 0, "<bos>": 1, "<eos>": 2, "<unk>": 3, "a": 4, "b": 5}

    def test_min_count_drops_singletons(self):
        v = build_vocabulary([ParallelPair("x", "a b c")], "target", min_count=2)
        assert len(v) == 4
        assert v.encode(["a"]) == [UNK]

    def test_frequency_then_lexicographic_order(self):
        corpus = [ParallelPair("x", "b c a"), ParallelPair("x", "c b"), ParallelPair("x", "c d")]
        counts = Counter(t for p in corpus for t in p.target.split())
        oracle = sorted(counts, key=lambda t: (-counts[t], t))
        v = build_vocabulary(corpus, "target")
        assert v.regular_tokens == oracle == ["c", "b", "a", "d"]

    def test_bijection_and_specials(self):
        v = build_vocabulary(generate_parallel_corpus(0, 20), "source")
        assert v.id_to_token[:4] == ["<pad>", "<bos>", "<eos>", "<unk>"]
        assert all(v.token_to_id[t] == i for i, t in enumerate(v.id_to_token))
        assert sorted(v.token_to_id.values()) == list(range(len(v)))

    def test_file_round_trip(self, tmp_path):
        v = build_vocabulary(generate_parallel_corpus(0, 5), "target")
        v.save(tmp_path / "v.txt")
        lines = (tmp_path / "v.txt").read_text(encoding="utf-8").splitlines()
        assert lines[0] == v.id_to_token[4]
        assert Vocabulary.load(tmp_path / "v.txt") == v

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            build_vocabulary([], "source")

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.sampled_from(list("abcdefgh")), min_size=1, max_size=12))
    def test_encode_decode_identity(self, toks):
        v = Vocabulary(sorted(set("abcdefgh")))
        assert v.decode(v.encode(toks)) == toks


class TestBatch:
    def setup_method(self):
        self.pairs = [ParallelPair("甲乙", "a b"), ParallelPair("丙", "c d e f")]
        self.sv = build_vocabulary(self.pairs, "source")
        self.tv = build_vocabulary(self.pairs, "target")

    def test_padding_rule(self):
        b = make_batch(self.pairs, self.sv, self.tv)
        t1, t2 = self.tv.encode(["a", "b"])
        assert b.labels[0].tolist() == [t1, t2, EOS, -100, -100]
        assert b.tgt_in_ids[0].tolist() == [BOS, t1, t2, PAD, PAD]
        assert b.src_ids[1].tolist() == [self.sv.token_to_id["丙"], PAD]

    def test_single_pair_no_padding(self):
        b = make_batch(self.pairs[:1], self.sv, self.tv)
        assert not np.any(b.labels == -100)

    def test_round_trip_and_mask_invariant(self):
        pairs = generate_parallel_corpus(3, 13)[:50]
        sv, tv = build_vocabulary(pairs, "source"), build_vocabulary(pairs, "target")
        b = make_batch(pairs, sv, tv)
        assert np.array_equal(b.labels == -100, b.tgt_in_ids == PAD)
        # teacher forcing: input at j+1 is the label at j, for every real token
        real = (b.labels[:, :-1] != -100) & (b.labels[:, :-1] != EOS)
        np.testing.assert_array_equal(b.tgt_in_ids[:, 1:][real], b.labels[:, :-1][real])
        for i, p in enumerate(pairs):
            assert sv.decode(b.src_ids[i]) == tokenize(p.source, "source")
            assert tv.decode(b.tgt_in_ids[i]) == tokenize(p.target, "target")
            assert tv.decode(b.labels[i][b.labels[i] != -100]) == tokenize(p.target, "target")
        assert b.src_ids.max() < len(sv) and b.tgt_in_ids.max() < len(tv)


class TestCorpusFile:
    def test_labelled_line(self, tmp_path):
        f = tmp_path / "c.tsv"
        f.write_text("他们种树\tthey planted many trees\tActive\n", encoding="utf-8")
        assert load_corpus(f) == [ParallelPair("他们种树", "they planted many trees", StructureLabel.ACTIVE)]

    def test_empty_file(self, tmp_path):
        f = tmp_path / "c.tsv"
        f.write_text("", encoding="utf-8")
        assert load_corpus(f) == []

    def test_round_trip_byte_identical(self, tmp_path):
        pairs = generate_parallel_corpus(11, 250)
        assert len(pairs) == 1000
        a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
        save_corpus(pairs, a)
        loaded = load_corpus(a)
        assert loaded == pairs
        save_corpus(loaded, b)
        assert a.read_bytes() == b.read_bytes()

    def test_malformed_line_reports_number(self, tmp_path):
        f = tmp_path / "c.tsv"
        f.write_text("甲\ta\tActive\nno tabs here\n", encoding="utf-8")
        with pytest.raises(CorpusFormatError, match="line 2"):
            load_corpus(f)

    def test_bad_label(self, tmp_path):
        f = tmp_path / "c.tsv"
        f.write_text("甲\ta\tMiddle\n", encoding="utf-8")
        with pytest.raises(CorpusFormatError, match="line 1"):
            load_corpus(f)
