"""Shared test helpers: toy corpora and the in-memory benchmark pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from spurmatch import contexts, corpus, docmodel, matcher, synth, wordclf, wordfeat
from spurmatch.corpus import Corpus, LabeledSentence

# Benchmark pipeline settings shared by module tests and acceptance.
BENCH = {
    "gen_seed": 7,
    "run_seed": 11,
    "test_fraction": 0.3,
    "threshold": 0.35,
    "l2_doc": 0.01,
    "max_iter": 1000,
    "tol": 1e-8,
    "dim": 100,
    "quota": 15,
    "step": 5,
    "folds": 10,
    "l2_word": 1.0,
}


def toy_corpus(items, name="toy", split="train") -> Corpus:
    """items: list of (label, tokens) pairs."""
    sentences = [
        LabeledSentence(i, list(tokens), label, split)
        for i, (label, tokens) in enumerate(items)
    ]
    return Corpus(name, sentences)


@dataclass
class BenchRun:
    data: synth.SynthData
    corp: Corpus
    model: docmodel.DocModel
    top: list[docmodel.TopWord]
    windows: list[contexts.ContextWindow]
    store: contexts.EmbeddingStore
    records: list[matcher.MatchRecord]
    unmatched: dict[str, int]
    vectors: list[wordfeat.WordFeatureVector]
    labeled_rows: list[wordfeat.WordFeatureVector]
    labels: list[wordclf.WordLabel]


def build_bench(tag: str, gen_seed: int, tmp_dir: Path) -> BenchRun:
    data = synth.generate(synth.SynthConfig(tag=tag, seed=gen_seed))
    tmp_dir.mkdir(parents=True, exist_ok=True)
    tsv = tmp_dir / f"{tag}.tsv"
    synth.write_tsv(data, tsv)
    corp = corpus.ingest(tsv, "generic", BENCH["run_seed"])
    corp = corpus.split(corp, BENCH["test_fraction"], BENCH["run_seed"])
    model = docmodel.train_doc(
        corp, BENCH["l2_doc"], BENCH["max_iter"], BENCH["tol"], BENCH["run_seed"]
    )
    top = docmodel.top_words(model, BENCH["threshold"])
    windows = contexts.extract_contexts(corp, top, window=5, split="train")
    store = contexts.fallback_embed(corp, windows, BENCH["dim"], BENCH["run_seed"])
    unmatched: dict[str, int] = {}
    records = matcher.match_all(top, windows, store, corp, unmatched=unmatched)
    theta_by = {t.word: t.theta for t in top}
    vectors = wordfeat.featurize_all(matcher.group_by_word(records), store, theta_by)
    label_by = {wl.word: wl for wl in data.word_labels}
    labeled_rows = [v for v in vectors if v.word in label_by]
    labels = [label_by[v.word] for v in labeled_rows]
    return BenchRun(
        data, corp, model, top, windows, store, records, unmatched,
        vectors, labeled_rows, labels,
    )


def random_store(rng, n, dim, start_id=0) -> contexts.EmbeddingStore:
    vectors = {
        start_id + i: rng.standard_normal(dim).astype(np.float32) for i in range(n)
    }
    return contexts.EmbeddingStore(dim=dim, vectors=vectors, provenance="fallback")


def random_records(rng, word, n, store_ids, labels=None) -> list[matcher.MatchRecord]:
    """Synthetic MatchRecords over existing store ids (treated != matched)."""
    out = []
    for i in range(n):
        t, m = rng.choice(store_ids, size=2, replace=False)
        out.append(
            matcher.MatchRecord(
                word=word,
                treated_context_id=int(t),
                treated_sentence_id=1000 + i,
                treated_label=int(rng.choice([-1, 1])) if labels is None else labels[i][0],
                matched_context_id=int(m),
                matched_sentence_id=2000 + i,
                matched_label=int(rng.choice([-1, 1])) if labels is None else labels[i][1],
                matched_word=f"cand{i}",
                similarity=float(rng.uniform(-1, 1)),
            )
        )
    return out
