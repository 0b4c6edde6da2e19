"""Bag-of-words logistic regression for the document task, coefficient
extraction, and ranking metrics (ROC AUC with half-credit ties, accuracy).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.stats import rankdata

from .corpus import Corpus, LabeledSentence
from .optim import FitError, fit_logistic


class ModelError(ValueError):
    """Invalid model input or undefined metric."""


@dataclass
class Vocabulary:
    words: list[str]  # index -> word; sorted, dense indices

    def __post_init__(self):
        self.index: dict[str, int] = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ModelError("vocabulary words must be distinct")

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    @classmethod
    def from_sentences(cls, sentences: list[LabeledSentence]) -> "Vocabulary":
        seen: set[str] = set()
        for s in sentences:
            seen.update(s.tokens)
        return cls(sorted(seen))

    def restricted(self, drop: set[str]) -> "Vocabulary":
        return Vocabulary([w for w in self.words if w not in drop])


@dataclass
class DocModel:
    vocab: Vocabulary
    theta: np.ndarray
    bias: float
    l2_strength: float
    max_iter: int = 500
    tol: float = 1e-8

    def theta_of(self, word: str) -> float:
        return float(self.theta[self.vocab.index[word]])


@dataclass
class TopWord:
    word: str
    theta: float
    correlated_class: int  # sign of theta


def featurize_doc(sentence: LabeledSentence, vocab: Vocabulary) -> dict[int, int]:
    """Sparse count vector {index: count}; out-of-vocabulary tokens ignored."""
    counts: dict[int, int] = {}
    for tok in sentence.tokens:
        idx = vocab.index.get(tok)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    return counts


def featurize_matrix(sentences: list[LabeledSentence], vocab: Vocabulary) -> sparse.csr_matrix:
    data, indices, indptr = [], [], [0]
    for s in sentences:
        counts = featurize_doc(s, vocab)
        for idx in sorted(counts):
            indices.append(idx)
            data.append(counts[idx])
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.array(data, dtype=np.float64), indices, indptr),
        shape=(len(sentences), len(vocab)),
    )


def train_doc(
    corpus: Corpus,
    l2_strength: float = 1.0,
    max_iter: int = 500,
    tol: float = 1e-8,
    seed: int = 0,
    vocab: Vocabulary | None = None,
) -> DocModel:
    """Fit the bag-of-words logistic model on the train split.

    Passing an explicit vocabulary trains a restricted model (feature
    selection); by default the vocabulary is built from the train split.
    """
    train = corpus.train()
    if not train:
        raise ModelError("corpus has no train split")
    if vocab is None:
        vocab = Vocabulary.from_sentences(train)
    X = featurize_matrix(train, vocab)
    y = np.array([s.label for s in train], dtype=np.float64)
    try:
        theta, bias, _ = fit_logistic(X, y, l2_strength, max_iter, tol, seed)
    except FitError as exc:
        raise ModelError(str(exc)) from exc
    return DocModel(vocab, theta, bias, l2_strength, max_iter, tol)


def _scores(model: DocModel, sentences: list[LabeledSentence]) -> np.ndarray:
    X = featurize_matrix(sentences, model.vocab)
    z = X @ model.theta + model.bias
    return 1.0 / (1.0 + np.exp(-z))


def predict_proba(model: DocModel, x) -> float:
    """P(label=+1) for a count vector given as {index: count} or an array."""
    if isinstance(x, dict):
        z = sum(model.theta[i] * c for i, c in sorted(x.items())) + model.bias
    else:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != model.theta.shape[0]:
            raise ModelError(
                f"dimension mismatch: model has {model.theta.shape[0]} features, "
                f"input has {x.shape[0]}"
            )
        z = float(x @ model.theta) + model.bias
    return float(1.0 / (1.0 + np.exp(-z)))


def predict_proba_sentences(model: DocModel, sentences: list[LabeledSentence]) -> np.ndarray:
    return _scores(model, sentences)


def top_words(model: DocModel, threshold: float) -> list[TopWord]:
    """Words with |theta| >= threshold, by |theta| descending, ties alphabetical."""
    entries = [
        TopWord(w, float(t), 1 if t > 0 else -1)
        for w, t in zip(model.vocab.words, model.theta)
        if abs(t) >= threshold
    ]
    entries.sort(key=lambda e: (-abs(e.theta), e.word))
    return entries


def save_top_words(entries: list[TopWord], path: str | Path, meta: dict | None = None) -> None:
    meta = meta or {}
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(
            f"# config_hash={meta.get('config_hash', '-')} seed={meta.get('seed', 0)}\n"
        )
        fh.write("word,theta,correlated_class\n")
        for e in entries:
            fh.write(f"{e.word},{e.theta:.17g},{e.correlated_class}\n")


def load_top_words(path: str | Path) -> tuple[list[TopWord], dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ModelError(f"{path}: not a top-words file")
    meta = dict(kv.split("=", 1) for kv in lines[0][2:].split())
    if lines[1] != "word,theta,correlated_class":
        raise ModelError(f"{path}: unexpected top-words columns")
    entries = []
    for line in lines[2:]:
        word, theta, cls = line.split(",")
        entries.append(TopWord(word, float(theta), int(cls)))
    return entries, meta


def roc_auc(labels: np.ndarray, scores: np.ndarray) -> float:
    """P(random positive scores above a random negative); ties count 1/2."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == -1).sum())
    if n_pos == 0 or n_neg == 0:
        raise ModelError("AUC undefined: need both classes")
    ranks = rankdata(scores)
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def accuracy(labels: np.ndarray, scores: np.ndarray) -> float:
    labels = np.asarray(labels)
    preds = np.where(np.asarray(scores) >= 0.5, 1, -1)
    return float((preds == labels).mean())


def evaluate(model: DocModel, sentences: list[LabeledSentence], metric: str) -> float:
    if not sentences:
        raise ModelError("cannot evaluate on an empty sentence list")
    scores = _scores(model, sentences)
    labels = np.array([s.label for s in sentences])
    if metric == "auc":
        return roc_auc(labels, scores)
    if metric == "accuracy":
        return accuracy(labels, scores)
    raise ModelError(f"unknown metric {metric!r}")


def save_doc_model(model: DocModel, path: str | Path, meta: dict | None = None) -> None:
    """Plain-text model file: header fields, then one `word theta` line per
    vocabulary entry, coefficients at 17 significant digits.
    """
    meta = meta or {}
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("# spurmatch doc model v1\n")
        fh.write(f"config_hash {meta.get('config_hash', '-')}\n")
        fh.write(f"seed {meta.get('seed', 0)}\n")
        fh.write(f"l2_strength {model.l2_strength:.17g}\n")
        fh.write(f"max_iter {model.max_iter}\n")
        fh.write(f"tol {model.tol:.17g}\n")
        fh.write(f"bias {model.bias:.17g}\n")
        fh.write(f"vocab {len(model.vocab)}\n")
        for w, t in zip(model.vocab.words, model.theta):
            fh.write(f"{w} {t:.17g}\n")


def load_doc_model(path: str | Path) -> tuple[DocModel, dict]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "# spurmatch doc model v1":
        raise ModelError(f"{path}: not a doc model file")
    fields: dict[str, str] = {}
    for i, line in enumerate(lines[1:8], start=1):
        key, _, value = line.partition(" ")
        fields[key] = value
    n = int(fields["vocab"])
    words, theta = [], []
    for line in lines[8 : 8 + n]:
        w, _, t = line.rpartition(" ")
        words.append(w)
        theta.append(float(t))
    if len(words) != n:
        raise ModelError(f"{path}: truncated model file")
    model = DocModel(
        Vocabulary(words),
        np.array(theta, dtype=np.float64),
        float(fields["bias"]),
        float(fields["l2_strength"]),
        int(fields["max_iter"]),
        float(fields["tol"]),
    )
    meta = {"config_hash": fields["config_hash"], "seed": int(fields["seed"])}
    return model, meta
