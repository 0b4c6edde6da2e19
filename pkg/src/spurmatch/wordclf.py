"""Word classifier: logistic regression over standardized match features
with human labels {spurious, genuine}; stratified k-fold evaluation and
cross-domain transfer (source-domain scaler travels with the model).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .docmodel import roc_auc
from .optim import FitError, fit_logistic
from .wordfeat import N_FEATURES, Scaler, WordFeatureVector, feature_matrix


class WordClfError(ValueError):
    """Label problems, fold degeneracy, or schema mismatches."""


SPURIOUS, GENUINE = "spurious", "genuine"


@dataclass
class WordLabel:
    word: str
    label: str  # "spurious" | "genuine"
    annotator_note: str | None = None

    def __post_init__(self):
        if self.label not in (SPURIOUS, GENUINE):
            raise WordClfError(f"label must be spurious or genuine, got {self.label!r}")

    @property
    def y(self) -> int:
        return 1 if self.label == SPURIOUS else -1  # spurious is the positive class


@dataclass
class WordClassifierModel:
    lam: np.ndarray  # coefficients over the 15 features
    bias: float
    scaler: Scaler
    l2_strength: float


def _label_vector(labels: list[WordLabel]) -> np.ndarray:
    return np.array([lab.y for lab in labels], dtype=np.float64)


def train_word_clf(
    features_std: np.ndarray,
    labels: list[WordLabel],
    l2_strength: float = 1.0,
    seed: int = 0,
    scaler: Scaler | None = None,
) -> WordClassifierModel:
    """Fit on an already-standardized matrix; rows align with labels."""
    X = np.asarray(features_std, dtype=np.float64)
    if X.shape[0] != len(labels):
        raise WordClfError("feature rows and labels are misaligned")
    y = _label_vector(labels)
    try:
        lam, bias, _ = fit_logistic(X, y, l2_strength, seed=seed)
    except FitError as exc:
        raise WordClfError(str(exc)) from exc
    if scaler is None:
        scaler = Scaler(mean=np.zeros(X.shape[1]), std=np.ones(X.shape[1]))
    return WordClassifierModel(lam=lam, bias=bias, scaler=scaler, l2_strength=l2_strength)


def predict_proba_std(model: WordClassifierModel, features_std: np.ndarray) -> np.ndarray:
    z = np.asarray(features_std, dtype=np.float64) @ model.lam + model.bias
    return 1.0 / (1.0 + np.exp(-z))


def _stratified_folds(labels: list[WordLabel], k: int, seed: int) -> np.ndarray:
    """Fold id per row; each class dealt round-robin after a seeded shuffle."""
    rng = np.random.default_rng(seed)
    fold = np.empty(len(labels), dtype=np.int64)
    for cls in (1, -1):
        idx = np.array([i for i, lab in enumerate(labels) if lab.y == cls])
        idx = idx[rng.permutation(len(idx))]
        for pos, row in enumerate(idx):
            fold[row] = pos % k
    return fold


def cv_heldout_probs(
    features_raw: np.ndarray,
    labels: list[WordLabel],
    k: int = 10,
    seed: int = 0,
    l2_strength: float = 1.0,
) -> np.ndarray:
    """Held-out P(spurious) per row from stratified k-fold CV.

    The scaler is refit inside each fold on its training rows only, so no
    held-out row influences the transform applied to another fold.
    """
    X = np.asarray(features_raw, dtype=np.float64)
    if k < 2:
        raise WordClfError(f"k must be >= 2, got {k}")
    if X.shape[0] != len(labels):
        raise WordClfError("feature rows and labels are misaligned")
    fold = _stratified_folds(labels, k, seed)
    probs = np.empty(len(labels), dtype=np.float64)
    for f in range(k):
        train_rows = np.where(fold != f)[0]
        test_rows = np.where(fold == f)[0]
        if test_rows.size == 0:
            continue
        y_train = {labels[i].y for i in train_rows}
        if y_train != {1, -1}:
            raise WordClfError(
                f"fold {f} training data lost a class; use a smaller k"
            )
        mean = X[train_rows].mean(axis=0)
        std = X[train_rows].std(axis=0)
        scaler = Scaler(mean=mean, std=std)
        model = train_word_clf(
            scaler.transform(X[train_rows]),
            [labels[i] for i in train_rows],
            l2_strength=l2_strength,
            seed=seed,
            scaler=scaler,
        )
        probs[test_rows] = predict_proba_std(model, scaler.transform(X[test_rows]))
    return probs


def cross_validate(
    features_raw: np.ndarray,
    labels: list[WordLabel],
    k: int = 10,
    seed: int = 0,
    l2_strength: float = 1.0,
) -> float:
    """AUC pooled over all held-out predictions."""
    probs = cv_heldout_probs(features_raw, labels, k, seed, l2_strength)
    return roc_auc(_label_vector(labels), probs)


def transfer(model: WordClassifierModel, features_raw: np.ndarray) -> np.ndarray:
    """Score another domain's raw features with this model's own scaler."""
    X = np.asarray(features_raw, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.lam.shape[0]:
        raise WordClfError(
            f"feature schema mismatch: model expects {model.lam.shape[0]} features, "
            f"got {X.shape[1] if X.ndim == 2 else 'non-matrix input'}"
        )
    return predict_proba_std(model, model.scaler.transform(X))


def rank_spurious(
    model: WordClassifierModel, vectors: list[WordFeatureVector]
) -> list[tuple[str, float]]:
    """(word, P(spurious)) pairs, probability descending, ties alphabetical."""
    probs = transfer(model, feature_matrix(vectors))
    pairs = [(v.word, float(p)) for v, p in zip(vectors, probs)]
    pairs.sort(key=lambda wp: (-wp[1], wp[0]))
    return pairs


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def save_word_labels(labels: list[WordLabel], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["word", "label"])
        for lab in labels:
            writer.writerow([lab.word, lab.label])


def append_word_label(label: WordLabel, path: str | Path) -> None:
    path = Path(path)
    new = not path.exists()
    with path.open("a", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(["word", "label"])
        writer.writerow([label.word, label.label])


def load_word_labels(path: str | Path) -> list[WordLabel]:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["word", "label"]:
            raise WordClfError(f"{path}: expected header word,label")
        out = []
        seen = set()
        for row in reader:
            if not row:
                continue
            if row[0] in seen:
                raise WordClfError(f"{path}: duplicate label for word {row[0]!r}")
            seen.add(row[0])
            out.append(WordLabel(word=row[0], label=row[1]))
    return out


def save_word_model(
    model: WordClassifierModel, path: str | Path, meta: dict | None = None
) -> None:
    doc = {
        "artifact": "word_model",
        "lambda": model.lam.tolist(),
        "bias": model.bias,
        "l2_strength": model.l2_strength,
        "scaler": model.scaler.to_dict(),
        **(meta or {}),
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")


def load_word_model(path: str | Path) -> tuple[WordClassifierModel, dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("artifact") != "word_model":
        raise WordClfError(f"{path}: not a word model file")
    lam = np.asarray(doc["lambda"], dtype=np.float64)
    if lam.shape[0] != N_FEATURES:
        raise WordClfError(f"{path}: expected {N_FEATURES} coefficients")
    model = WordClassifierModel(
        lam=lam,
        bias=float(doc["bias"]),
        scaler=Scaler.from_dict(doc["scaler"]),
        l2_strength=float(doc["l2_strength"]),
    )
    meta = {k: doc[k] for k in ("config_hash", "seed") if k in doc}
    return model, meta


def save_predictions(
    pairs: list[tuple[str, float]], path: str | Path, meta: dict | None = None
) -> None:
    """CSV word,p_spurious,rank in descending-probability order."""
    meta = meta or {}
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(
            f"# config_hash={meta.get('config_hash', '-')} seed={meta.get('seed', 0)}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(["word", "p_spurious", "rank"])
        for rank, (word, p) in enumerate(pairs, start=1):
            writer.writerow([word, f"{p:.17g}", rank])


def load_predictions(path: str | Path) -> tuple[list[tuple[str, float]], dict]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# "):
        raise WordClfError(f"{path}: not a predictions file")
    meta = dict(kv.split("=", 1) for kv in lines[0][2:].split())
    reader = csv.reader(lines[1:])
    header = next(reader)
    if header != ["word", "p_spurious", "rank"]:
        raise WordClfError(f"{path}: unexpected predictions columns")
    pairs = [(row[0], float(row[1])) for row in reader if row]
    return pairs, meta
