#!/usr/bin/env python3
"""Regenerate the end-to-end golden fixtures under tests/golden/.

The matcher output is cross-checked against the brute-force reference scan
before anything is written, so the committed goldens are anchored to the
slow, obviously-correct path. Run from the repository root:

    python3 scripts/make_goldens.py
"""

import os
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from reference import brute_force_best_match  # noqa: E402

from spurmatch import synth  # noqa: E402
from spurmatch.cli import main  # noqa: E402
from spurmatch.contexts import load_context_manifest, load_embeddings  # noqa: E402
from spurmatch.corpus import load_corpus  # noqa: E402
from spurmatch.matcher import load_matches  # noqa: E402

GOLDEN_ARTIFACTS = [
    "corpus.jsonl",
    "doc_model.txt",
    "top_words.csv",
    "contexts.jsonl",
    "embeddings.cev",
    "matches.jsonl",
    "word_features.csv",
    "scaler.json",
    "word_model.json",
    "predictions.csv",
    "curve_oracle.csv",
    "curve_predicted_same_domain.csv",
    "report.txt",
]

# Flags shared with tests/test_cli.py::test_golden_pipeline; relative paths
# keep the config hash machine-independent.
GOLDEN_FLAGS = [
    "--out", "run",
    "--seed", "11",
    "--input", "mini.tsv",
    "--dataset-kind", "generic",
    "--test-fraction", "0.3",
    "--threshold", "0.3",
    "--l2-doc", "0.01",
    "--max-iter", "1000",
    "--quota", "10",
    "--folds", "5",
    "--step", "2",
    "--metric", "accuracy",
    "--labels", "mini_labels.csv",
]

GOLDEN_STAGES = [
    ["ingest"],
    ["train-doc"],
    ["extract"],
    ["match"],
    ["featurize"],
    ["train-word"],
    ["select", "--strategy", "oracle"],
    ["select", "--strategy", "predicted_same_domain"],
    ["report"],
]


def verify_matches_against_brute_force(run: Path) -> None:
    corp, _ = load_corpus(run / "corpus.jsonl")
    windows, _ = load_context_manifest(run / "contexts.jsonl")
    store = load_embeddings(run / "embeddings.cev")
    records, _ = load_matches(run / "matches.jsonl")
    by_treated = {r.treated_context_id: r for r in records}
    token_sets = corp.token_sets()
    checked = 0
    for w in windows:
        expected = brute_force_best_match(w.context_id, w.word, windows, store, token_sets)
        got = by_treated.get(w.context_id)
        if expected is None:
            assert got is None, f"context {w.context_id}: expected unmatched"
            continue
        sim, sent, cid = expected
        assert got is not None, f"context {w.context_id}: missing record"
        assert (got.similarity, got.matched_sentence_id, got.matched_context_id) == (
            sim, sent, cid,
        ), f"context {w.context_id}: production differs from brute force"
        checked += 1
    print(f"brute-force verification passed on {checked} matched occurrences")


def main_script() -> None:
    fixtures = REPO / "tests" / "fixtures"
    golden = REPO / "tests" / "golden"
    fixtures.mkdir(parents=True, exist_ok=True)
    golden.mkdir(parents=True, exist_ok=True)

    data = synth.generate(synth.mini_config(seed=7, tag="da"))
    synth.write_tsv(data, fixtures / "mini.tsv")
    synth.write_labels(data, fixtures / "mini_labels.csv")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        shutil.copy(fixtures / "mini.tsv", tmp / "mini.tsv")
        shutil.copy(fixtures / "mini_labels.csv", tmp / "mini_labels.csv")
        cwd = os.getcwd()
        os.chdir(tmp)
        try:
            for stage in GOLDEN_STAGES:
                code = main([*stage, *GOLDEN_FLAGS])
                assert code == 0, f"stage {stage} failed"
        finally:
            os.chdir(cwd)
        verify_matches_against_brute_force(tmp / "run")
        for name in GOLDEN_ARTIFACTS:
            shutil.copy(tmp / "run" / name, golden / name)
    print(f"wrote {len(GOLDEN_ARTIFACTS)} goldens to {golden}")


if __name__ == "__main__":
    main_script()
