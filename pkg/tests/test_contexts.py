"""Window extraction, cosine, the CEV1 format, and the fallback embedder."""

import numpy as np
import pytest

from pipeline_fixtures import toy_corpus
from spurmatch.contexts import (
    ContextWindow,
    EmbeddingError,
    EmbeddingStore,
    cosine,
    extract_contexts,
    fallback_embed,
    load_context_manifest,
    load_embeddings,
    save_context_manifest,
    save_embeddings,
    verify_manifest_agreement,
)
from spurmatch.corpus import Corpus, LabeledSentence


class TestExtract:
    def test_middle_window(self):
        corp = toy_corpus([(1, ["a", "b", "w", "c", "d"])])
        (win,) = extract_contexts(corp, ["w"])
        assert (win.left, win.right) == (["a", "b"], ["c", "d"])
        assert (win.sentence_id, win.position) == (0, 2)

    def test_word_at_start(self):
        corp = toy_corpus([(1, ["w", "x", "y", "z", "p", "q", "r"])])
        (win,) = extract_contexts(corp, ["w"])
        assert win.left == []
        assert win.right == ["x", "y", "z", "p", "q"]  # capped at 5

    def test_repeated_occurrences_get_own_windows(self):
        corp = toy_corpus([(1, ["w", "x", "w"])])
        wins = extract_contexts(corp, ["w"])
        assert len(wins) == 2
        assert [w.position for w in wins] == [0, 2]

    def test_exhaustive_over_occurrences(self):
        rng = np.random.default_rng(0)
        vocab = [f"t{i}" for i in range(10)]
        items = [
            (1, [vocab[int(i)] for i in rng.integers(0, 10, size=12)])
            for _ in range(30)
        ]
        corp = toy_corpus(items)
        tracked = {"t1", "t4", "t7"}
        wins = extract_contexts(corp, tracked)
        expected = sum(s.tokens.count(w) for s in corp.sentences for w in tracked)
        assert len(wins) == expected

    def test_all_positions_when_words_none(self):
        corp = toy_corpus([(1, ["a", "b"]), (-1, ["c"])])
        wins = extract_contexts(corp, None)
        assert [w.word for w in wins] == ["a", "b", "c"]

    def test_split_filter(self):
        corp = Corpus(
            "s",
            [
                LabeledSentence(0, ["w", "a"], 1, "train"),
                LabeledSentence(1, ["w", "b"], -1, "test"),
            ],
        )
        assert len(extract_contexts(corp, ["w"], split="train")) == 1
        assert len(extract_contexts(corp, ["w"], split=None)) == 2

    def test_ids_sequential_in_sentence_position_order(self):
        corp = toy_corpus([(1, ["w", "v"]), (1, ["v", "w"])])
        wins = extract_contexts(corp, ["w", "v"])
        assert [w.context_id for w in wins] == [0, 1, 2, 3]
        assert [(w.sentence_id, w.position) for w in wins] == [
            (0, 0), (0, 1), (1, 0), (1, 1),
        ]


class TestCosine:
    def test_self_similarity(self):
        v = np.array([1.0, 2.0, -3.0])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_opposite(self):
        v = np.array([0.3, -0.7])
        assert cosine(v, -v) == pytest.approx(-1.0, abs=1e-12)

    def test_zero_vector_defined_as_zero(self):
        assert cosine(np.zeros(3), np.array([1.0, 2.0, 3.0])) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(EmbeddingError, match="mismatch"):
            cosine(np.ones(3), np.ones(4))

    def test_symmetric_and_scale_invariant(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            u, v = rng.standard_normal(8), rng.standard_normal(8)
            a, b = rng.uniform(0.1, 10.0, size=2)
            assert cosine(u, v) == pytest.approx(cosine(v, u), abs=1e-12)
            assert cosine(a * u, b * v) == pytest.approx(cosine(u, v), abs=1e-9)


class TestCev1:
    def test_empty_store_round_trip(self, tmp_path):
        path = tmp_path / "e.cev"
        save_embeddings(EmbeddingStore(3072, {}, "fallback"), path)
        store = load_embeddings(path)
        assert store.dim == 3072 and len(store) == 0

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        vectors = {i * 7: rng.standard_normal(16).astype(np.float32) for i in range(9)}
        path = tmp_path / "v.cev"
        save_embeddings(EmbeddingStore(16, vectors, "fallback"), path)
        loaded = load_embeddings(path)
        assert set(loaded.vectors) == set(vectors)
        for cid, vec in vectors.items():
            assert loaded.vectors[cid].tobytes() == vec.tobytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.cev"
        path.write_bytes(b"NOPE" + b"\x00" * 12)
        with pytest.raises(EmbeddingError, match="magic"):
            load_embeddings(path)

    def test_truncated_record(self, tmp_path):
        path = tmp_path / "t.cev"
        save_embeddings(
            EmbeddingStore(4, {0: np.ones(4, dtype=np.float32)}, "fallback"), path
        )
        data = path.read_bytes()
        path.write_bytes(data[:-3])
        with pytest.raises(EmbeddingError, match="truncated"):
            load_embeddings(path)

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "d.cev"
        save_embeddings(
            EmbeddingStore(2, {5: np.ones(2, dtype=np.float32)}, "fallback"), path
        )
        data = bytearray(path.read_bytes())
        record = bytes(data[16:])
        data[8:16] = (2).to_bytes(8, "little")  # claim two records
        path.write_bytes(bytes(data) + record)  # same id twice
        with pytest.raises(EmbeddingError, match="duplicate"):
            load_embeddings(path)


class TestManifest:
    def _windows(self):
        corp = toy_corpus([(1, ["a", "w", "b"]), (-1, ["w", "c"])])
        return extract_contexts(corp, ["w"])

    def test_round_trip(self, tmp_path):
        wins = self._windows()
        path = tmp_path / "ctx.jsonl"
        save_context_manifest(wins, path, {"config_hash": "h"})
        loaded, header = load_context_manifest(path)
        assert header["config_hash"] == "h"
        assert loaded == wins

    def test_agreement_mismatch_is_hard_error(self, tmp_path):
        wins = self._windows()
        altered = [ContextWindow(w.context_id, w.sentence_id, w.word, w.position + 1, w.left, w.right) for w in wins]
        with pytest.raises(EmbeddingError, match="manifest mismatch"):
            verify_manifest_agreement(wins, altered)
        with pytest.raises(EmbeddingError, match="manifest mismatch"):
            verify_manifest_agreement(wins, wins[:-1])
        verify_manifest_agreement(wins, list(wins))  # identical passes


def _topic_corpus():
    """Two disjoint topic vocabularies; sentences stay inside one topic."""
    rng = np.random.default_rng(9)
    topic_a = [f"a{i}" for i in range(12)]
    topic_b = [f"b{i}" for i in range(12)]
    items = []
    for n in range(60):
        vocab = topic_a if n % 2 == 0 else topic_b
        tokens = [vocab[int(i)] for i in rng.integers(0, len(vocab), size=10)]
        tokens[4] = "w"
        items.append((1 if n % 2 == 0 else -1, tokens))
    return toy_corpus(items)


class TestFallbackEmbed:
    def test_identical_token_windows_identical_vectors(self):
        corp = toy_corpus([(1, ["x", "y", "w", "z", "q"]), (-1, ["x", "y", "w", "z", "q"])])
        wins = extract_contexts(corp, ["w"])
        store = fallback_embed(corp, wins, dim=8, seed=3)
        assert np.array_equal(store.vector(0), store.vector(1))

    def test_all_oov_window_is_reproducible_unit_vector(self):
        corp = Corpus(
            "o",
            [
                LabeledSentence(0, ["a", "b", "w", "c"], 1, "train"),
                LabeledSentence(1, ["new", "w", "terms"], -1, "test"),
            ],
        )
        wins = extract_contexts(corp, ["w"])  # test-split window is all OOV
        s1 = fallback_embed(corp, wins, dim=16, seed=5)
        s2 = fallback_embed(corp, wins, dim=16, seed=5)
        oov = [w.context_id for w in wins if w.sentence_id == 1][0]
        assert np.linalg.norm(s1.vector(oov)) == pytest.approx(1.0, abs=1e-5)
        assert np.array_equal(s1.vector(oov), s2.vector(oov))
        s3 = fallback_embed(corp, wins, dim=16, seed=6)
        assert not np.array_equal(s1.vector(oov), s3.vector(oov))

    def test_topic_separation_against_brute_force_means(self):
        corp = _topic_corpus()
        wins = extract_contexts(corp, ["w"])
        store = fallback_embed(corp, wins, dim=12, seed=1)
        topic_of = {w.context_id: corp.by_id()[w.sentence_id].label for w in wins}
        intra, cross = [], []
        ids = [w.context_id for w in wins]
        for i, a in enumerate(ids):
            for b in ids[i + 1 :]:
                sim = cosine(store.vector(a), store.vector(b))
                (intra if topic_of[a] == topic_of[b] else cross).append(sim)
        assert np.mean(intra) > np.mean(cross)

    def test_deterministic_bit_identical(self, tmp_path):
        corp = _topic_corpus()
        wins = extract_contexts(corp, ["w"])
        p1, p2 = tmp_path / "1.cev", tmp_path / "2.cev"
        save_embeddings(fallback_embed(corp, wins, dim=10, seed=2), p1)
        save_embeddings(fallback_embed(corp, wins, dim=10, seed=2), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_dim_validation(self):
        corp = _topic_corpus()
        with pytest.raises(EmbeddingError, match="dim"):
            fallback_embed(corp, [], dim=0, seed=0)

    def test_no_vector_is_all_zero(self, bench):
        for cid, vec in bench.store.vectors.items():
            assert np.any(vec != 0.0), cid
