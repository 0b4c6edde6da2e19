#!/usr/bin/env python3
"""Benchmark the compiled masked-argmax kernel against the numpy fallback.

Two measurements: the raw reduction over random score blocks, and the full
match_all pass on a synthetic corpus. Both backends must produce identical
results; the benchmark asserts that while timing.

    python3 benchmarks/bench_matching.py [--contexts 4000] [--dim 256]
"""

import argparse
import time

import numpy as np

from spurmatch import synth
from spurmatch.contexts import extract_contexts, fallback_embed
from spurmatch.corpus import ingest, split
from spurmatch.docmodel import top_words, train_doc
from spurmatch.matcher import match_all
from spurmatch.simsearch import backend, masked_argmax_rows


def _time(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_reduction(n_rows: int, n_cols: int) -> None:
    rng = np.random.default_rng(0)
    scores = rng.standard_normal((n_rows, n_cols))
    eligible = (rng.random(n_cols) < 0.8).astype(np.uint8)
    t_fast, fast = _time(lambda: masked_argmax_rows(scores, eligible))
    t_slow, slow = _time(lambda: masked_argmax_rows(scores, eligible, force_python=True))
    assert np.array_equal(fast, slow), "backends disagree"
    print(
        f"masked argmax {n_rows}x{n_cols}: compiled {t_fast*1e3:8.2f} ms | "
        f"numpy {t_slow*1e3:8.2f} ms | speedup {t_slow/t_fast:5.2f}x"
    )


def bench_match_all(n_contexts: int, dim: int, tmp="/tmp/bench_corpus.tsv") -> None:
    data = synth.generate(synth.SynthConfig(n_sentences=max(400, n_contexts // 2), seed=3))
    synth.write_tsv(data, tmp)
    corp = split(ingest(tmp, "generic", 5), 0.2, 5)
    model = train_doc(corp, 0.01, 800, 1e-8, 5)
    top = top_words(model, 0.3)
    windows = extract_contexts(corp, top, window=5, split="train")[:n_contexts]
    store = fallback_embed(corp, windows, dim=dim, seed=5)
    t_fast, fast = _time(lambda: match_all(top, windows, store, corp), repeats=2)
    t_slow, slow = _time(
        lambda: match_all(top, windows, store, corp, force_python=True), repeats=2
    )
    assert fast == slow, "backends disagree on match records"
    print(
        f"match_all {len(windows)} contexts dim {dim}: compiled {t_fast:6.3f} s | "
        f"numpy {t_slow:6.3f} s | speedup {t_slow/t_fast:5.2f}x | "
        f"{len(fast)} records"
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--contexts", type=int, default=4000)
    parser.add_argument("--dim", type=int, default=256)
    args = parser.parse_args()
    print(f"active backend: {backend()}")
    for shape in ((256, 2000), (256, 20000), (1024, 20000)):
        bench_reduction(*shape)
    bench_match_all(args.contexts, args.dim)


if __name__ == "__main__":
    main()
