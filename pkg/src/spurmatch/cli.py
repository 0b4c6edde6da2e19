"""Stage-per-subcommand pipeline driver.

Each stage reads the previous stages' on-disk artifacts from the output
directory and writes its own, tagged with the config hash and seed so the
report can refuse to mix incompatible runs. Re-running a stage with the same
config, inputs, and seed reproduces its artifacts byte for byte.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import contexts, corpus, docmodel, matcher, robustness, synth, wordclf, wordfeat
from .config import ConfigError, RunConfig, build_config, config_hash, load_config_file

STAGES = (
    "ingest",
    "train-doc",
    "extract",
    "match",
    "featurize",
    "annotate",
    "train-word",
    "select",
    "report",
)

ARTIFACTS = {
    "corpus": "corpus.jsonl",
    "doc_model": "doc_model.txt",
    "top_words": "top_words.csv",
    "contexts": "contexts.jsonl",
    "embeddings": "embeddings.cev",
    "matches": "matches.jsonl",
    "features": "word_features.csv",
    "scaler": "scaler.json",
    "labels": "labels.csv",
    "word_model": "word_model.json",
    "predictions": "predictions.csv",
    "report": "report.txt",
}

_STAGE_OF = {
    "corpus": "ingest",
    "doc_model": "train-doc",
    "top_words": "train-doc",
    "contexts": "extract",
    "embeddings": "extract",
    "matches": "match",
    "features": "featurize",
    "scaler": "featurize",
    "word_model": "train-word",
    "predictions": "train-word",
}

DATA_ERRORS = (
    ConfigError,
    corpus.CorpusError,
    docmodel.ModelError,
    contexts.EmbeddingError,
    matcher.MatchError,
    wordfeat.FeatureError,
    wordclf.WordClfError,
    robustness.RobustnessError,
)


class StageError(ValueError):
    """Missing prerequisite artifact or stage-level misuse."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _art(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.out) / ARTIFACTS[name]


def _require(cfg: RunConfig, name: str) -> Path:
    path = _art(cfg, name)
    if not path.exists():
        raise StageError(
            f"missing {path.name}; run the `{_STAGE_OF[name]}` stage first"
        )
    return path


def _meta(cfg: RunConfig) -> dict:
    return {"config_hash": config_hash(cfg), "seed": cfg.seed}


@contextmanager
def _stage_lock(cfg: RunConfig):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    lock = out / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise StageError(f"output directory is busy (remove stale {lock} if no run is active)")
    try:
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


# ---------------------------------------------------------------------------
# Stage implementations
# ---------------------------------------------------------------------------

def _stage_ingest(cfg: RunConfig, args) -> None:
    if not cfg.input:
        raise StageError("ingest needs an input file (--input or config `input`)")
    corp = corpus.ingest(cfg.input, cfg.dataset_kind, cfg.seed)
    corp = corpus.split(corp, cfg.test_fraction, cfg.seed)
    corpus.save_corpus(corp, _art(cfg, "corpus"), _meta(cfg))
    counts = corp.class_counts()
    print(
        f"ingested {len(corp.sentences)} sentences "
        f"(+1: {counts[1]}, -1: {counts[-1]}; {len(corp.train())} train / {len(corp.test())} test)"
    )


def _stage_train_doc(cfg: RunConfig, args) -> None:
    corp, _ = corpus.load_corpus(_require(cfg, "corpus"))
    model = docmodel.train_doc(corp, cfg.l2_doc, cfg.max_iter, cfg.tol, cfg.seed)
    docmodel.save_doc_model(model, _art(cfg, "doc_model"), _meta(cfg))
    entries = docmodel.top_words(model, cfg.threshold)
    if cfg.class_filter != "both":
        want = 1 if cfg.class_filter == "pos" else -1
        entries = [e for e in entries if e.correlated_class == want]
    docmodel.save_top_words(entries, _art(cfg, "top_words"), _meta(cfg))
    print(f"trained on {len(model.vocab)} words; {len(entries)} top words at |theta| >= {cfg.threshold}")


def _stage_extract(cfg: RunConfig, args) -> None:
    corp, _ = corpus.load_corpus(_require(cfg, "corpus"))
    entries, _ = docmodel.load_top_words(_require(cfg, "top_words"))
    split = None if cfg.match_split == "all" else cfg.match_split
    words = None if cfg.candidate_pool == "all" else entries
    windows = contexts.extract_contexts(corp, words, cfg.window, split=split)
    contexts.save_context_manifest(windows, _art(cfg, "contexts"), _meta(cfg))
    if cfg.embedding_kind == "fallback":
        store = contexts.fallback_embed(corp, windows, int(cfg.embedding_arg), cfg.seed)
        contexts.save_embeddings(store, _art(cfg, "embeddings"))
        print(f"extracted {len(windows)} windows; fallback-embedded at dim {store.dim}")
    else:
        print(
            f"extracted {len(windows)} windows; expecting external embeddings at "
            f"{cfg.embedding_arg}"
        )


def _load_store(cfg: RunConfig, windows) -> contexts.EmbeddingStore:
    if cfg.embedding_kind == "fallback":
        store = contexts.load_embeddings(_require(cfg, "embeddings"))
        store.provenance = "fallback"
    else:
        path = Path(cfg.embedding_arg)
        if not path.exists():
            raise StageError(f"external embedding file not found: {path}")
        store = contexts.load_embeddings(path)
    missing = [w.context_id for w in windows if w.context_id not in store.vectors]
    if missing:
        raise StageError(
            f"embedding store lacks {len(missing)} context ids (first: {missing[:5]})"
        )
    return store


def _stage_match(cfg: RunConfig, args) -> None:
    corp, _ = corpus.load_corpus(_require(cfg, "corpus"))
    entries, _ = docmodel.load_top_words(_require(cfg, "top_words"))
    windows, _ = contexts.load_context_manifest(_require(cfg, "contexts"))
    store = _load_store(cfg, windows)
    unmatched: dict[str, int] = {}
    records = matcher.match_all(
        entries,
        windows,
        store,
        corp,
        dedup_per_sentence=cfg.dedup_per_sentence,
        unmatched=unmatched,
    )
    matcher.save_matches(records, _art(cfg, "matches"), _meta(cfg), unmatched)
    print(
        f"matched {len(records)} occurrences across {len({r.word for r in records})} words; "
        f"{sum(unmatched.values())} unmatched"
    )
    if getattr(args, "dump_pairs", 0):
        windows_by_id = {w.context_id: w for w in windows}
        shown = sorted(records, key=lambda r: -r.similarity)[: args.dump_pairs]
        for r in shown:
            print(matcher.format_pair(r, windows_by_id))
            print()


def _stage_featurize(cfg: RunConfig, args) -> None:
    records, _ = matcher.load_matches(_require(cfg, "matches"))
    entries, _ = docmodel.load_top_words(_require(cfg, "top_words"))
    windows, _ = contexts.load_context_manifest(_require(cfg, "contexts"))
    store = _load_store(cfg, windows)
    theta_by = {e.word: e.theta for e in entries}
    vectors = wordfeat.featurize_all(matcher.group_by_word(records), store, theta_by)
    wordfeat.save_feature_table(vectors, _art(cfg, "features"), _meta(cfg))
    _, scaler = wordfeat.standardize(vectors)
    wordfeat.save_scaler(scaler, _art(cfg, "scaler"), _meta(cfg))
    n_missing = sum((not v.has_pos_match) + (not v.has_neg_match) for v in vectors)
    print(
        f"featurized {len(vectors)} words"
        + (f"; {n_missing} missing closest-pos/neg similarities set to 0" if n_missing else "")
    )


def _labels_path(cfg: RunConfig) -> Path:
    return Path(cfg.labels) if cfg.labels else _art(cfg, "labels")


def _stage_annotate(cfg: RunConfig, args) -> None:
    entries, _ = docmodel.load_top_words(_require(cfg, "top_words"))
    corp, _ = corpus.load_corpus(_require(cfg, "corpus"))
    labels_path = _labels_path(cfg)
    labeled = (
        {wl.word for wl in wordclf.load_word_labels(labels_path)}
        if labels_path.exists()
        else set()
    )
    pairs_by_word: dict[str, list] = {}
    windows_by_id: dict[int, contexts.ContextWindow] = {}
    if _art(cfg, "matches").exists() and _art(cfg, "contexts").exists():
        records, _ = matcher.load_matches(_art(cfg, "matches"))
        windows, _ = contexts.load_context_manifest(_art(cfg, "contexts"))
        windows_by_id = {w.context_id: w for w in windows}
        for word, recs in matcher.group_by_word(records).items():
            pairs_by_word[word] = sorted(recs, key=lambda r: -r.similarity)[:3]

    pending = [e for e in entries if e.word not in labeled]
    if not pending:
        print("no unlabeled top words; nothing to annotate")
        return
    print(f"{len(pending)} unlabeled top words; keys: s=spurious g=genuine k=skip q=quit")
    for e in pending:
        print(f"\n=== {e.word}  theta={e.theta:+.3f}  class={e.correlated_class:+d}")
        examples = [s for s in corp.sentences if e.word in s.tokens][:3]
        for s in examples:
            print(f"  [{s.label:+d}] {' '.join(s.tokens)}")
        for r in pairs_by_word.get(e.word, []):
            print(matcher.format_pair(r, windows_by_id))
        while True:
            try:
                key = input(f"{e.word} [s/g/k/q]> ").strip().lower()
            except EOFError:
                print("\nend of input; stopping annotation")
                return
            if key in ("s", "spurious"):
                wordclf.append_word_label(wordclf.WordLabel(e.word, wordclf.SPURIOUS), labels_path)
                break
            if key in ("g", "genuine"):
                wordclf.append_word_label(wordclf.WordLabel(e.word, wordclf.GENUINE), labels_path)
                break
            if key in ("k", "skip"):
                break
            if key in ("q", "quit"):
                print("stopping annotation")
                return
            print("unrecognized key; use s, g, k, or q")


def _load_labeled_rows(cfg: RunConfig):
    vectors, _ = wordfeat.load_feature_table(_require(cfg, "features"))
    labels_path = _labels_path(cfg)
    if not labels_path.exists():
        raise StageError(f"missing {labels_path.name}; run the `annotate` stage first")
    label_by = {wl.word: wl for wl in wordclf.load_word_labels(labels_path)}
    rows = [v for v in vectors if v.word in label_by]
    if not rows:
        raise StageError("no labeled word has features; annotate top words first")
    return vectors, rows, [label_by[v.word] for v in rows]


def _stage_train_word(cfg: RunConfig, args) -> None:
    vectors, rows, labels = _load_labeled_rows(cfg)
    X = wordfeat.feature_matrix(rows)
    auc = wordclf.cross_validate(X, labels, cfg.folds, cfg.seed, cfg.l2_word)
    print(f"{cfg.folds}-fold CV AUC = {auc:.4f} over {len(rows)} labeled words")
    if getattr(args, "per_class", False):
        entries, _ = docmodel.load_top_words(_require(cfg, "top_words"))
        cls_by = {e.word: e.correlated_class for e in entries}
        probs = wordclf.cv_heldout_probs(X, labels, cfg.folds, cfg.seed, cfg.l2_word)
        for cls in (1, -1):
            idx = [i for i, v in enumerate(rows) if cls_by.get(v.word) == cls]
            y = np.array([labels[i].y for i in idx])
            if len(set(y.tolist())) == 2:
                sub_auc = docmodel.roc_auc(y, probs[idx])
                print(f"  class {cls:+d} words: AUC = {sub_auc:.4f} (n={len(idx)})")
            else:
                print(f"  class {cls:+d} words: AUC undefined (single label class, n={len(idx)})")

    std, scaler = wordfeat.standardize(rows)
    model = wordclf.train_word_clf(std, labels, cfg.l2_word, cfg.seed, scaler)
    meta = {**_meta(cfg), "cv_auc": auc, "n_labeled": len(rows)}
    wordclf.save_word_model(model, _art(cfg, "word_model"), meta)

    # Labeled words carry their held-out CV probabilities; the rest are
    # scored by the final model.
    cv_probs = wordclf.cv_heldout_probs(X, labels, cfg.folds, cfg.seed, cfg.l2_word)
    prob_by = {v.word: float(p) for v, p in zip(rows, cv_probs)}
    rest = [v for v in vectors if v.word not in prob_by]
    if rest:
        rest_probs = wordclf.transfer(model, wordfeat.feature_matrix(rest))
        prob_by.update({v.word: float(p) for v, p in zip(rest, rest_probs)})
    pairs = sorted(prob_by.items(), key=lambda wp: (-wp[1], wp[0]))
    wordclf.save_predictions(pairs, _art(cfg, "predictions"), _meta(cfg))


def _build_groups(cfg: RunConfig, corp, entries) -> robustness.Groups:
    mode = cfg.group_words
    labels_path = _labels_path(cfg)
    if mode == "auto":
        mode = "spurious" if labels_path.exists() else "top"
    if mode == "spurious":
        if not labels_path.exists():
            raise StageError("group_words=spurious needs a labels file")
        spurious = {
            wl.word for wl in wordclf.load_word_labels(labels_path) if wl.label == wordclf.SPURIOUS
        }
        tracked = [e for e in entries if e.word in spurious]
        if not tracked:
            raise StageError("no labeled spurious word is a top word")
    else:
        tracked = entries
    return robustness.build_groups(corp.test(), tracked, cfg.quota, cfg.seed)


def _stage_select(cfg: RunConfig, args) -> None:
    strategy = args.strategy
    corp, _ = corpus.load_corpus(_require(cfg, "corpus"))
    entries, _ = docmodel.load_top_words(_require(cfg, "top_words"))
    settings = robustness.TrainSettings(cfg.l2_doc, cfg.max_iter, cfg.tol, cfg.seed)
    groups = _build_groups(cfg, corp, entries)
    out = Path(cfg.out)

    if strategy == "downsample":
        point = robustness.downsample_baseline(
            corp, entries, cfg.seed, settings, groups, cfg.metric
        )
        robustness.save_reference("downsample", point, out / "reference_downsample.csv", _meta(cfg))
        print(f"downsample reference: all={point.score_all:.4f} minority={point.score_minority:.4f}")
        return
    if strategy == "lexicon":
        paths = [p for p in (cfg.lexicon_pos, cfg.lexicon_neg) if p]
        if not paths:
            raise StageError("lexicon strategy needs lexicon_pos/lexicon_neg files")
        lexicon = robustness.load_lexicon(*paths)
        point = robustness.lexicon_baseline(corp, lexicon, settings, groups, cfg.metric)
        robustness.save_reference("lexicon", point, out / "reference_lexicon.csv", _meta(cfg))
        print(f"lexicon reference: all={point.score_all:.4f}")
        return

    if strategy == "oracle":
        labels_path = _labels_path(cfg)
        if not labels_path.exists():
            raise StageError("oracle strategy needs a labels file")
        spurious = [
            wl.word
            for wl in wordclf.load_word_labels(labels_path)
            if wl.label == wordclf.SPURIOUS and any(e.word == wl.word for e in entries)
        ]
        plan = robustness.make_plan("oracle", cfg.seed, spurious_words=spurious)
    elif strategy == "random":
        plan = robustness.make_plan("random", cfg.seed, top_words=entries)
    elif strategy == "predicted_same_domain":
        pairs, _ = wordclf.load_predictions(_require(cfg, "predictions"))
        plan = robustness.make_plan(strategy, cfg.seed, probabilities=dict(pairs))
    elif strategy == "predicted_transfer":
        if not getattr(args, "word_model", None):
            raise StageError("predicted_transfer needs --word-model <other-domain model>")
        model, _ = wordclf.load_word_model(args.word_model)
        vectors, _ = wordfeat.load_feature_table(_require(cfg, "features"))
        pairs = wordclf.rank_spurious(model, vectors)
        plan = robustness.make_plan(strategy, cfg.seed, probabilities=dict(pairs))
    else:
        raise StageError(f"unknown strategy {strategy!r}")

    points = robustness.run_curve(corp, plan, groups, settings, cfg.step, cfg.metric)
    robustness.save_curve(points, strategy, out / f"curve_{strategy}.csv", _meta(cfg))
    first, last = points[0], points[-1]
    print(
        f"{strategy}: {len(points)} points; minority {first.score_minority:.4f}"
        f" -> {last.score_minority:.4f}, majority {first.score_majority:.4f}"
        f" -> {last.score_majority:.4f}"
    )


def _check_hash(expected: str, header: dict, name: str) -> None:
    got = str(header.get("config_hash"))
    if got != expected:
        raise StageError(
            f"artifact {name} was produced under config {got}, current config is {expected}; "
            "refusing to mix runs"
        )


def _stage_report(cfg: RunConfig, args) -> None:
    out = Path(cfg.out)
    expected = config_hash(cfg)
    lines = ["spurmatch report", f"config {expected} seed {cfg.seed}", ""]

    corp, header = corpus.load_corpus(_require(cfg, "corpus"))
    _check_hash(expected, header, "corpus")
    counts = corp.class_counts()
    lines.append(
        f"dataset {corp.name}: {len(corp.sentences)} sentences "
        f"(+1: {counts[1]}, -1: {counts[-1]}; train {len(corp.train())}, test {len(corp.test())})"
    )

    if _art(cfg, "top_words").exists():
        entries, meta = docmodel.load_top_words(_art(cfg, "top_words"))
        _check_hash(expected, meta, "top_words")
        lines.append(f"top words: {len(entries)} at |theta| >= {cfg.threshold:g}")

    if _art(cfg, "matches").exists():
        records, header = matcher.load_matches(_art(cfg, "matches"))
        _check_hash(expected, header, "matches")
        n_unmatched = sum(header.get("unmatched", {}).values())
        lines.append(
            f"matches: {len(records)} over {len({r.word for r in records})} words"
            f" ({n_unmatched} unmatched occurrences)"
        )
        taus = sorted(
            matcher.ate(recs).tau for recs in matcher.group_by_word(records).values()
        )
        if taus:
            mid = taus[len(taus) // 2]
            lines.append(
                f"effect estimates: min {taus[0]:+.4f}, median {mid:+.4f}, max {taus[-1]:+.4f}"
            )

    if _art(cfg, "word_model").exists():
        doc_meta = wordclf.load_word_model(_art(cfg, "word_model"))[1]
        _check_hash(expected, doc_meta, "word_model")

    if _art(cfg, "predictions").exists():
        pairs, meta = wordclf.load_predictions(_art(cfg, "predictions"))
        _check_hash(expected, meta, "predictions")
        top = ", ".join(w for w, _ in pairs[:5])
        lines.append(f"word classifier: {len(pairs)} scored; most spurious: {top}")

    for curve_file in sorted(out.glob("curve_*.csv")):
        strategy, points, meta = robustness.load_curve(curve_file)
        _check_hash(expected, meta, curve_file.name)
        first, best = points[0], max(points, key=lambda p: p.score_minority)
        last = points[-1]
        lines.append(
            f"curve {strategy} ({points[0].metric}): minority {first.score_minority:.4f}"
            f" -> peak {best.score_minority:.4f} at k={best.k_removed}"
            f" (end {last.score_minority:.4f}); majority {first.score_majority:.4f}"
            f" -> {last.score_majority:.4f}; all {first.score_all:.4f} -> {last.score_all:.4f}"
        )
    for ref_file in sorted(out.glob("reference_*.csv")):
        text = ref_file.read_text(encoding="utf-8").splitlines()
        meta = dict(kv.split("=", 1) for kv in text[0][2:].split())
        _check_hash(expected, meta, ref_file.name)
        name, metric, all_score = text[2].split(",")
        lines.append(f"reference {name} ({metric}): all {float(all_score):.4f}")

    report = "\n".join(lines) + "\n"
    _art(cfg, "report").write_text(report, encoding="utf-8")
    print(report, end="")


_STAGE_FN = {
    "ingest": _stage_ingest,
    "train-doc": _stage_train_doc,
    "extract": _stage_extract,
    "match": _stage_match,
    "featurize": _stage_featurize,
    "annotate": _stage_annotate,
    "train-word": _stage_train_word,
    "select": _stage_select,
    "report": _stage_report,
}


def run_stage(stage: str, cfg: RunConfig, args=None) -> None:
    """Programmatic entry point mirroring the CLI subcommands."""
    if stage not in _STAGE_FN:
        raise StageError(f"unknown stage {stage!r}")
    cfg.validate()
    ns = args if args is not None else argparse.Namespace()
    with _stage_lock(cfg):
        _STAGE_FN[stage](cfg, ns)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=int, dest="seed")
    p.add_argument("--out", dest="out")
    p.add_argument("--input", dest="input")
    p.add_argument("--dataset-kind", dest="dataset_kind", choices=corpus.DATASET_KINDS)
    p.add_argument("--test-fraction", type=float, dest="test_fraction")
    p.add_argument("--threshold", type=float, dest="threshold")
    p.add_argument("--window", type=int, dest="window")
    p.add_argument("--embedding", dest="embedding")
    p.add_argument("--match-split", dest="match_split", choices=("train", "all"))
    p.add_argument("--candidate-pool", dest="candidate_pool", choices=("top", "all"))
    p.add_argument("--dedup-per-sentence", action="store_const", const=True, dest="dedup_per_sentence")
    p.add_argument("--quota", type=int, dest="quota")
    p.add_argument("--l2-doc", type=float, dest="l2_doc")
    p.add_argument("--l2-word", type=float, dest="l2_word")
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--tol", type=float, dest="tol")
    p.add_argument("--folds", type=int, dest="folds")
    p.add_argument("--step", type=int, dest="step")
    p.add_argument("--metric", dest="metric", choices=("auc", "accuracy"))
    p.add_argument("--class-filter", dest="class_filter", choices=("both", "pos", "neg"))
    p.add_argument("--group-words", dest="group_words", choices=("auto", "spurious", "top"))
    p.add_argument("--labels", dest="labels")
    p.add_argument("--lexicon-pos", dest="lexicon_pos")
    p.add_argument("--lexicon-neg", dest="lexicon_neg")


_CONFIG_KEYS = [
    "seed", "out", "input", "dataset_kind", "test_fraction", "threshold",
    "window", "embedding", "match_split", "candidate_pool", "dedup_per_sentence",
    "quota", "l2_doc", "l2_word", "max_iter", "tol", "folds", "step", "metric",
    "class_filter", "group_words", "labels", "lexicon_pos", "lexicon_neg",
]


def _build_parser() -> _Parser:
    parser = _Parser(prog="spurmatch", description=__doc__)
    sub = parser.add_subparsers(dest="stage", required=True)
    for stage in STAGES:
        p = sub.add_parser(stage, help=f"run the {stage} stage")
        _add_config_flags(p)
        if stage == "match":
            p.add_argument("--dump-pairs", type=int, default=0,
                           help="print the N most similar matched pairs")
        if stage == "train-word":
            p.add_argument("--per-class", action="store_true",
                           help="also report AUC per correlated class")
        if stage == "select":
            p.add_argument("--strategy", required=True,
                           choices=(*robustness.STRATEGIES, "downsample"))
            p.add_argument("--word-model", help="other-domain word model for predicted_transfer")
    synth_p = sub.add_parser("synth", help="generate the synthetic benchmark corpus")
    synth_p.add_argument("--n", type=int, default=2000)
    synth_p.add_argument("--seed", type=int, default=7)
    synth_p.add_argument("--tag", default="da")
    synth_p.add_argument("--mini", action="store_true", help="200-sentence fixture configuration")
    synth_p.add_argument("--out-tsv", required=True)
    synth_p.add_argument("--out-labels", required=True)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.stage == "synth":
            cfg = synth.mini_config(args.seed, args.tag) if args.mini else synth.SynthConfig(
                n_sentences=args.n, seed=args.seed, tag=args.tag
            )
            data = synth.generate(cfg)
            synth.write_tsv(data, args.out_tsv)
            synth.write_labels(data, args.out_labels)
            print(
                f"wrote {len(data.lines)} sentences to {args.out_tsv} and "
                f"{len(data.word_labels)} word labels to {args.out_labels}"
            )
            return 0
        file_values = load_config_file(args.config) if args.config else {}
        overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
        cfg = build_config(file_values, overrides)
        run_stage(args.stage, cfg, args)
        return 0
    except (StageError, *DATA_ERRORS) as exc:
        print(f"spurmatch: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
