"""Best-match search, exclusion constraints, and effect estimates."""

import numpy as np
import pytest

from pipeline_fixtures import random_records, toy_corpus
from reference import brute_force_best_match, reference_ate
from spurmatch.contexts import EmbeddingStore, extract_contexts, fallback_embed
from spurmatch.matcher import (
    MatchError,
    ate,
    best_match,
    group_by_word,
    load_matches,
    match_all,
    save_matches,
)
from spurmatch.simsearch import backend, masked_argmax_rows


def _store_for(windows, dim, seed):
    rng = np.random.default_rng(seed)
    return EmbeddingStore(
        dim,
        {w.context_id: rng.standard_normal(dim).astype(np.float32) for w in windows},
        "fallback",
    )


class TestBestMatch:
    def test_single_eligible_candidate_wins(self):
        corp = toy_corpus([(1, ["a", "w", "b"]), (-1, ["c", "v", "d"])])
        wins = extract_contexts(corp, ["w", "v"])
        store = _store_for(wins, 6, 0)
        treated = wins[0]
        record = best_match(treated, wins, store, "w", corp)
        assert record.matched_sentence_id == 1
        assert record.matched_word == "v"

    def test_identical_context_scores_one(self):
        corp = toy_corpus([(1, ["x", "y", "w", "z"]), (-1, ["x", "y", "v", "z"])])
        wins = extract_contexts(corp, ["w", "v"])
        store = fallback_embed(corp, wins, dim=12, seed=1)
        record = best_match(wins[0], wins, store, "w", corp)
        assert record.matched_context_id == wins[1].context_id
        assert record.similarity == pytest.approx(1.0, abs=1e-9)

    def test_no_eligible_candidate_returns_none(self):
        corp = toy_corpus([(1, ["a", "w"]), (-1, ["w", "b"])])
        wins = extract_contexts(corp, ["w"])
        store = _store_for(wins, 4, 2)
        assert best_match(wins[0], wins, store, "w", corp) is None

    def test_matches_brute_force_on_random_contexts(self):
        rng = np.random.default_rng(3)
        vocab = [f"t{i}" for i in range(12)]
        items = [
            (int(rng.choice([-1, 1])), [vocab[int(j)] for j in rng.integers(0, 12, size=8)])
            for _ in range(40)
        ]
        corp = toy_corpus(items)
        tracked = ["t0", "t3", "t6", "t9"]
        wins = extract_contexts(corp, tracked)
        store = _store_for(wins, 10, 4)
        records = match_all(tracked, wins, store, corp)
        by_treated = {r.treated_context_id: r for r in records}
        token_sets = corp.token_sets()
        sample = [wins[int(i)] for i in rng.choice(len(wins), size=min(50, len(wins)), replace=False)]
        for t in sample:
            expected = brute_force_best_match(t.context_id, t.word, wins, store, token_sets)
            got = by_treated.get(t.context_id)
            if expected is None:
                assert got is None
            else:
                assert (got.similarity, got.matched_sentence_id, got.matched_context_id) == expected


class TestMatchAll:
    def test_word_in_every_sentence_has_zero_matches(self):
        corp = toy_corpus([(1, ["w", "a"]), (-1, ["b", "w"]), (1, ["w"])])
        wins = extract_contexts(corp, ["w"])
        store = _store_for(wins, 4, 5)
        unmatched = {}
        records = match_all(["w"], wins, store, corp, unmatched=unmatched)
        assert records == []
        assert unmatched == {"w": 3}

    def test_two_words_three_occurrences_each(self):
        corp = toy_corpus(
            [
                (1, ["w", "a"]), (-1, ["w", "b"]), (1, ["w", "c"]),
                (-1, ["v", "d"]), (1, ["v", "e"]), (-1, ["v", "f"]),
            ]
        )
        wins = extract_contexts(corp, ["w", "v"])
        store = _store_for(wins, 4, 6)
        records = match_all(["w", "v"], wins, store, corp)
        assert len(records) == 6

    def test_exclusion_constraint_holds(self, bench):
        token_sets = bench.corp.token_sets()
        for r in bench.records:
            assert r.word not in token_sets[r.matched_sentence_id]
            assert r.treated_sentence_id != r.matched_sentence_id

    def test_candidate_order_invariance(self):
        rng = np.random.default_rng(7)
        corp = toy_corpus(
            [
                (int(rng.choice([-1, 1])), [f"t{int(j)}" for j in rng.integers(0, 6, size=7)])
                for _ in range(25)
            ]
        )
        tracked = ["t0", "t2", "t4"]
        wins = extract_contexts(corp, tracked)
        store = _store_for(wins, 8, 8)
        base = match_all(tracked, wins, store, corp)
        shuffled = [wins[int(i)] for i in rng.permutation(len(wins))]
        assert match_all(tracked, shuffled, store, corp) == base

    def test_backends_agree(self):
        rng = np.random.default_rng(9)
        scores = rng.standard_normal((30, 200))
        scores[4, 10] = scores[4, 50]  # engineered tie
        elig = (rng.random(200) < 0.6).astype(np.uint8)
        fast = masked_argmax_rows(scores, elig, force_python=False)
        slow = masked_argmax_rows(scores, elig, force_python=True)
        assert np.array_equal(fast, slow)
        assert (masked_argmax_rows(scores, np.zeros(200, dtype=np.uint8)) == -1).all()

    def test_dedup_per_sentence(self):
        corp = toy_corpus([(1, ["w", "a", "w"]), (-1, ["b", "v", "c"])])
        wins = extract_contexts(corp, ["w", "v"])
        store = _store_for(wins, 4, 10)
        full = match_all(["w"], wins, store, corp)
        deduped = match_all(["w"], wins, store, corp, dedup_per_sentence=True)
        assert len(full) == 2 and len(deduped) == 1
        assert deduped[0].treated_context_id == wins[0].context_id

    def test_similarity_matches_stored_vectors(self, bench):
        from spurmatch.contexts import cosine

        rng = np.random.default_rng(11)
        sample = [bench.records[int(i)] for i in rng.choice(len(bench.records), 50, replace=False)]
        for r in sample:
            u = bench.store.vector(r.treated_context_id)
            v = bench.store.vector(r.matched_context_id)
            assert r.similarity == cosine(u, v)

    def test_missing_embedding_errors(self):
        corp = toy_corpus([(1, ["w", "a"]), (-1, ["b", "v"])])
        wins = extract_contexts(corp, ["w", "v"])
        store = _store_for(wins[:-1], 4, 12)
        with pytest.raises(MatchError, match="no embedding"):
            match_all(["w"], wins, store, corp)


class TestAte:
    def _records(self, pairs):
        rng = np.random.default_rng(0)
        recs = random_records(rng, "w", len(pairs), list(range(100, 200)), labels=pairs)
        return recs

    def test_maximal_effect(self):
        assert ate(self._records([(1, -1)] * 3)).tau == 2.0

    def test_matched_labels_equal_gives_zero(self):
        assert ate(self._records([(1, 1), (-1, -1)])).tau == 0.0

    def test_mixed(self):
        est = ate(self._records([(1, -1), (1, 1)]))
        assert est.tau == 1.0 and est.n_pairs == 2

    def test_empty_errors(self):
        with pytest.raises(MatchError, match="no matches"):
            ate([])

    def test_mixed_words_error(self):
        rng = np.random.default_rng(1)
        recs = random_records(rng, "w", 2, list(range(100, 120)))
        recs[1].word = "v"
        with pytest.raises(MatchError, match="mix"):
            ate(recs)

    def test_matches_reference_and_antisymmetry(self, bench):
        for word, recs in group_by_word(bench.records).items():
            est = ate(recs)
            pairs = [(r.treated_label, r.matched_label) for r in recs]
            assert est.tau == pytest.approx(reference_ate(pairs), abs=1e-15)
            flipped = [(-a, -b) for a, b in pairs]
            assert reference_ate(flipped) == -est.tau


class TestPersistence:
    def test_round_trip(self, tmp_path, bench):
        path = tmp_path / "m.jsonl"
        save_matches(bench.records, path, {"config_hash": "h", "seed": 1}, bench.unmatched)
        loaded, header = load_matches(path)
        assert loaded == bench.records
        assert header["config_hash"] == "h"
        assert header.get("unmatched", {}) == {
            k: v for k, v in sorted(bench.unmatched.items())
        }
