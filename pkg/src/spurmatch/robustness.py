"""Majority/minority evaluation groups and feature-selection curves.

A word's majority group holds test sentences whose label agrees with the
word's correlated class; the minority group holds the disagreeing ones,
where a learned shortcut misleads the classifier. Curves retrain the
document model with growing removal prefixes and score each group.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, LabeledSentence
from .docmodel import DocModel, ModelError, TopWord, Vocabulary, evaluate, train_doc

STRATEGIES = (
    "oracle",
    "lexicon",
    "random",
    "predicted_same_domain",
    "predicted_transfer",
)


class RobustnessError(ValueError):
    """Empty groups, missing plan inputs, or metric misuse."""


@dataclass
class GroupSpec:
    word: str
    correlated_class: int
    majority_ids: list[int]
    minority_ids: list[int]


@dataclass
class Groups:
    per_word: dict[str, GroupSpec]
    majority_ids: list[int] = field(default_factory=list)
    minority_ids: list[int] = field(default_factory=list)

    @property
    def all_ids(self) -> list[int]:
        return sorted({*self.majority_ids, *self.minority_ids})


@dataclass
class RemovalPlan:
    strategy: str
    words: list[str]
    seed: int


@dataclass
class CurvePoint:
    k_removed: int
    metric: str
    score_majority: float
    score_minority: float
    score_all: float


@dataclass
class TrainSettings:
    l2_strength: float = 1.0
    max_iter: int = 500
    tol: float = 1e-8
    seed: int = 0


def _word_digest(word: str) -> int:
    return int.from_bytes(hashlib.sha256(word.encode("utf-8")).digest()[:8], "little")


def _sample_ids(ids: list[int], quota: int | None, seed: int, word: str) -> list[int]:
    # Seeded per word only, so flipping every label swaps the two pools'
    # samples exactly (each pool is drawn by an independent identical rng).
    ids = sorted(ids)
    if quota is None or len(ids) <= quota:
        return ids
    rng = np.random.default_rng([seed, _word_digest(word)])
    order = rng.permutation(len(ids))
    return sorted(ids[int(i)] for i in order[:quota])


def build_groups(
    sentences: list[LabeledSentence],
    tracked: list[TopWord],
    quota: int | None = 10,
    seed: int = 0,
) -> Groups:
    """Per-word majority/minority samples over the given sentences.

    A sentence containing several tracked words counts once, for the word
    ranked first by |theta| (ties alphabetical). Up to `quota` sentences per
    word and group; None keeps everything.
    """
    if quota is not None and quota < 1:
        raise RobustnessError(f"quota must be >= 1, got {quota}")
    ranked = sorted(tracked, key=lambda t: (-abs(t.theta), t.word))
    claimed: set[int] = set()
    assigned: dict[str, list[LabeledSentence]] = {t.word: [] for t in ranked}
    for t in ranked:
        for s in sentences:
            if s.id not in claimed and t.word in s.tokens:
                claimed.add(s.id)
                assigned[t.word].append(s)

    per_word: dict[str, GroupSpec] = {}
    majority: list[int] = []
    minority: list[int] = []
    for t in ranked:
        own = assigned[t.word]
        if not own:
            continue  # word absent from these sentences; skipped
        maj_pool = [s.id for s in own if s.label == t.correlated_class]
        min_pool = [s.id for s in own if s.label == -t.correlated_class]
        maj = _sample_ids(maj_pool, quota, seed, t.word)
        mnr = _sample_ids(min_pool, quota, seed, t.word)
        per_word[t.word] = GroupSpec(t.word, t.correlated_class, maj, mnr)
        majority.extend(maj)
        minority.extend(mnr)
    return Groups(per_word=per_word, majority_ids=sorted(majority), minority_ids=sorted(minority))


def shuffled(words: list[str], seed: int) -> list[str]:
    """Seeded uniform permutation; shared by the oracle and random plans."""
    words = sorted(words)
    rng = np.random.default_rng(seed)
    return [words[int(i)] for i in rng.permutation(len(words))]


def make_plan(
    strategy: str,
    seed: int = 0,
    spurious_words: list[str] | None = None,
    top_words: list[TopWord] | None = None,
    probabilities: dict[str, float] | None = None,
) -> RemovalPlan:
    """Removal order for one strategy.

    oracle: seeded permutation of the human-labeled spurious words.
    random: seeded permutation of all top words.
    predicted_*: probability-of-spurious descending, ties alphabetical.
    """
    if strategy == "oracle":
        if not spurious_words:
            raise RobustnessError("oracle strategy needs labeled spurious words")
        words = shuffled(spurious_words, seed)
    elif strategy == "random":
        if not top_words:
            raise RobustnessError("random strategy needs the top word list")
        words = shuffled([t.word for t in top_words], seed)
    elif strategy in ("predicted_same_domain", "predicted_transfer"):
        if not probabilities:
            raise RobustnessError(f"{strategy} strategy needs word probabilities")
        words = sorted(probabilities, key=lambda w: (-probabilities[w], w))
    else:
        raise RobustnessError(f"unknown removal strategy {strategy!r}")
    return RemovalPlan(strategy=strategy, words=words, seed=seed)


def _group_sentences(corpus: Corpus, ids: list[int]) -> list[LabeledSentence]:
    by_id = corpus.by_id()
    return [by_id[i] for i in ids]


def evaluate_group(model: DocModel, corpus: Corpus, ids: list[int], metric: str) -> float:
    sentences = _group_sentences(corpus, ids)
    try:
        return evaluate(model, sentences, metric)
    except ModelError as exc:
        if "AUC undefined" in str(exc):
            raise RobustnessError(
                "AUC undefined on a single-class group; use metric=accuracy"
            ) from exc
        raise


def _evaluate_point(
    model: DocModel, corpus: Corpus, groups: Groups, metric: str, k: int
) -> CurvePoint:
    return CurvePoint(
        k_removed=k,
        metric=metric,
        score_majority=evaluate_group(model, corpus, groups.majority_ids, metric),
        score_minority=evaluate_group(model, corpus, groups.minority_ids, metric),
        score_all=evaluate_group(model, corpus, groups.all_ids, metric),
    )


def run_curve(
    corpus: Corpus,
    plan: RemovalPlan,
    groups: Groups,
    settings: TrainSettings | None = None,
    step: int = 1,
    metric: str = "auc",
) -> list[CurvePoint]:
    """Retrain with the first k plan words removed for k = 0, step, 2*step...
    (the full removal is always included) and score every group.
    """
    if step < 1:
        raise RobustnessError(f"step must be >= 1, got {step}")
    settings = settings or TrainSettings()
    base_vocab = Vocabulary.from_sentences(corpus.train())
    ks = list(range(0, len(plan.words) + 1, step))
    if ks[-1] != len(plan.words):
        ks.append(len(plan.words))
    points = []
    for k in ks:
        vocab = base_vocab.restricted(set(plan.words[:k]))
        model = train_doc(
            corpus,
            l2_strength=settings.l2_strength,
            max_iter=settings.max_iter,
            tol=settings.tol,
            seed=settings.seed,
            vocab=vocab,
        )
        points.append(_evaluate_point(model, corpus, groups, metric, k))
    return points


def lexicon_baseline(
    corpus: Corpus,
    lexicon_words: set[str],
    settings: TrainSettings | None = None,
    groups: Groups | None = None,
    metric: str = "auc",
) -> CurvePoint:
    """Refit using only vocabulary items found in the lexicon."""
    settings = settings or TrainSettings()
    base_vocab = Vocabulary.from_sentences(corpus.train())
    keep = [w for w in base_vocab.words if w in lexicon_words]
    if not keep:
        raise RobustnessError("lexicon has empty intersection with the vocabulary")
    model = train_doc(
        corpus,
        l2_strength=settings.l2_strength,
        max_iter=settings.max_iter,
        tol=settings.tol,
        seed=settings.seed,
        vocab=Vocabulary(keep),
    )
    if groups is None:
        raise RobustnessError("lexicon baseline needs evaluation groups")
    return _evaluate_point(model, corpus, groups, metric, k=0)


def downsample_baseline(
    corpus: Corpus,
    tracked: list[TopWord],
    seed: int = 0,
    settings: TrainSettings | None = None,
    test_groups: Groups | None = None,
    metric: str = "auc",
) -> CurvePoint:
    """Group-balancing reference: build majority/minority over the train
    split, downsample the majority to the minority's size, refit on that
    subset, and score the test groups.
    """
    settings = settings or TrainSettings()
    if test_groups is None:
        raise RobustnessError("downsample baseline needs test groups")
    train_groups = build_groups(corpus.train(), tracked, quota=None, seed=seed)
    maj, mnr = train_groups.majority_ids, train_groups.minority_ids
    if not mnr:
        raise RobustnessError("train split has an empty minority group")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(maj))
    kept = sorted(maj[int(i)] for i in order[: len(mnr)])
    subset_ids = set(kept) | set(mnr)
    sub_train = [s for s in corpus.train() if s.id in subset_ids]
    sub_corpus = Corpus(corpus.name, sub_train + corpus.test())
    model = train_doc(
        sub_corpus,
        l2_strength=settings.l2_strength,
        max_iter=settings.max_iter,
        tol=settings.tol,
        seed=settings.seed,
    )
    return _evaluate_point(model, corpus, test_groups, metric, k=0)


def load_lexicon(*paths: str | Path) -> set[str]:
    """Union of plain word lists, one word per line, blank lines ignored."""
    words: set[str] = set()
    for p in paths:
        for line in Path(p).read_text(encoding="utf-8").splitlines():
            w = line.strip().lower()
            if w:
                words.add(w)
    return words


def save_curve(
    points: list[CurvePoint], strategy: str, path: str | Path, meta: dict | None = None
) -> None:
    meta = meta or {}
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(
            f"# config_hash={meta.get('config_hash', '-')} seed={meta.get('seed', 0)}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(["strategy", "k_removed", "metric", "majority", "minority", "all"])
        for p in points:
            writer.writerow(
                [
                    strategy,
                    p.k_removed,
                    p.metric,
                    f"{p.score_majority:.17g}",
                    f"{p.score_minority:.17g}",
                    f"{p.score_all:.17g}",
                ]
            )


def load_curve(path: str | Path) -> tuple[str, list[CurvePoint], dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# "):
        raise RobustnessError(f"{path}: not a curve file")
    meta = dict(kv.split("=", 1) for kv in lines[0][2:].split())
    reader = csv.reader(lines[1:])
    header = next(reader)
    if header != ["strategy", "k_removed", "metric", "majority", "minority", "all"]:
        raise RobustnessError(f"{path}: unexpected curve columns")
    strategy = ""
    points = []
    for row in reader:
        strategy = row[0]
        points.append(
            CurvePoint(int(row[1]), row[2], float(row[3]), float(row[4]), float(row[5]))
        )
    return strategy, points, meta


def save_reference(
    name: str, point: CurvePoint, path: str | Path, meta: dict | None = None
) -> None:
    """Single horizontal reference line: name,metric,all."""
    meta = meta or {}
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(
            f"# config_hash={meta.get('config_hash', '-')} seed={meta.get('seed', 0)}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(["name", "metric", "all"])
        writer.writerow([name, point.metric, f"{point.score_all:.17g}"])
