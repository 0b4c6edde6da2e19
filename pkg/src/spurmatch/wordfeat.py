"""Per-word feature vectors summarizing the matching process.

Fifteen scalars per word: effect estimates (plain, similarity-weighted, and
top-5 restricted), similarity statistics of the matches, the word's document
coefficient, and summaries of the treated-minus-matched embedding
differences.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .contexts import EmbeddingStore
from .matcher import MatchRecord

FEATURE_NAMES = (
    "ate",
    "weighted_ate",
    "top5_ate",
    "mean_sim",
    "top5_mean_sim",
    "max_sim",
    "std_sim",
    "sim_closest_pos",
    "sim_closest_neg",
    "doc_coef",
    "diff_norm",
    "top_diff_1",
    "top_diff_2",
    "top_diff_3",
    "max_abs_diff",
)

N_FEATURES = len(FEATURE_NAMES)


class FeatureError(ValueError):
    """Empty record set or degenerate feature table."""


@dataclass
class WordFeatureVector:
    word: str
    values: np.ndarray  # length 15, FEATURE_NAMES order
    n_matches: int
    has_pos_match: bool = True
    has_neg_match: bool = True

    def __getitem__(self, name: str) -> float:
        return float(self.values[FEATURE_NAMES.index(name)])

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(FEATURE_NAMES, self.values)}


def _canonical_order(records: list[MatchRecord]) -> list[MatchRecord]:
    # Similarity descending; deterministic regardless of input order.
    return sorted(
        records,
        key=lambda r: (
            -r.similarity,
            r.matched_sentence_id,
            r.matched_context_id,
            r.treated_context_id,
        ),
    )


def featurize_word(
    word: str,
    records: list[MatchRecord],
    store: EmbeddingStore,
    theta_w: float,
) -> WordFeatureVector:
    if not records:
        raise FeatureError(f"word {word!r} has no match records")
    if any(r.word != word for r in records):
        raise FeatureError("records mix words; pass one word's records")
    recs = _canonical_order(records)
    n = len(recs)
    sims = np.array([r.similarity for r in recs], dtype=np.float64)
    diffs_y = np.array(
        [r.treated_label - r.matched_label for r in recs], dtype=np.float64
    )
    top = min(5, n)

    ate = float(diffs_y.mean())
    weights = np.maximum(sims, 0.0)
    wsum = float(weights.sum())
    weighted_ate = float((weights * diffs_y).sum() / wsum) if wsum > 0 else 0.0
    top5_ate = float(diffs_y[:top].mean())

    mean_sim = float(sims.mean())
    top5_mean_sim = float(sims[:top].mean())
    max_sim = float(sims.max())
    std_sim = float(sims.std())  # population std

    pos_sims = sims[[r.matched_label == 1 for r in recs]]
    neg_sims = sims[[r.matched_label == -1 for r in recs]]
    has_pos = pos_sims.size > 0
    has_neg = neg_sims.size > 0
    sim_closest_pos = float(pos_sims.max()) if has_pos else 0.0
    sim_closest_neg = float(neg_sims.max()) if has_neg else 0.0

    dim = store.dim
    delta_sum = np.zeros(dim, dtype=np.float64)
    max_abs_diff = 0.0
    for r in recs:
        d = store.vector(r.treated_context_id).astype(np.float64) - store.vector(
            r.matched_context_id
        ).astype(np.float64)
        delta_sum += d
        max_abs_diff = max(max_abs_diff, float(np.abs(d).max()))
    delta = delta_sum / n
    diff_norm = float(np.linalg.norm(delta))
    top_diffs = np.sort(np.abs(delta))[::-1][:3]
    top3 = np.zeros(3)
    top3[: top_diffs.shape[0]] = top_diffs

    values = np.array(
        [
            ate,
            weighted_ate,
            top5_ate,
            mean_sim,
            top5_mean_sim,
            max_sim,
            std_sim,
            sim_closest_pos,
            sim_closest_neg,
            theta_w,
            diff_norm,
            top3[0],
            top3[1],
            top3[2],
            max_abs_diff,
        ],
        dtype=np.float64,
    )
    return WordFeatureVector(
        word=word,
        values=values,
        n_matches=n,
        has_pos_match=has_pos,
        has_neg_match=has_neg,
    )


def featurize_all(
    records_by_word: dict[str, list[MatchRecord]],
    store: EmbeddingStore,
    theta_by_word: dict[str, float],
) -> list[WordFeatureVector]:
    """Feature vectors for every word with at least one match, word-sorted."""
    out = []
    for word in sorted(records_by_word):
        out.append(
            featurize_word(word, records_by_word[word], store, theta_by_word[word])
        )
    return out


@dataclass
class Scaler:
    mean: np.ndarray
    std: np.ndarray  # zeroed columns carry std 0; transform maps them to 0

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        safe = np.where(self.std < 1e-12, 1.0, self.std)
        out = (X - self.mean) / safe
        out[:, self.std < 1e-12] = 0.0
        return out

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Scaler":
        return cls(np.asarray(d["mean"], dtype=np.float64), np.asarray(d["std"], dtype=np.float64))


def feature_matrix(vectors: list[WordFeatureVector]) -> np.ndarray:
    return np.vstack([v.values for v in vectors])


def standardize(vectors: list[WordFeatureVector]) -> tuple[np.ndarray, Scaler]:
    """Per-feature zero-mean unit-variance transform (population variance)."""
    if len(vectors) < 2:
        raise FeatureError("standardize needs at least 2 feature vectors")
    X = feature_matrix(vectors)
    scaler = Scaler(mean=X.mean(axis=0), std=X.std(axis=0))
    return scaler.transform(X), scaler


def save_feature_table(
    vectors: list[WordFeatureVector], path: str | Path, meta: dict | None = None
) -> None:
    """CSV with fixed columns: word, the 15 features, n_matches."""
    meta = meta or {}
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(
            f"# config_hash={meta.get('config_hash', '-')} seed={meta.get('seed', 0)}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(["word", *FEATURE_NAMES, "n_matches"])
        for v in vectors:
            writer.writerow(
                [v.word, *[f"{x:.17g}" for x in v.values], v.n_matches]
            )


def load_feature_table(path: str | Path) -> tuple[list[WordFeatureVector], dict]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# "):
        raise FeatureError(f"{path}: not a feature table")
    meta = dict(kv.split("=", 1) for kv in lines[0][2:].split())
    reader = csv.reader(lines[1:])
    header = next(reader)
    if header != ["word", *FEATURE_NAMES, "n_matches"]:
        raise FeatureError(f"{path}: unexpected feature columns")
    vectors = []
    for row in reader:
        values = np.array([float(x) for x in row[1:-1]], dtype=np.float64)
        vectors.append(
            WordFeatureVector(word=row[0], values=values, n_matches=int(row[-1]))
        )
    return vectors, meta


def save_scaler(scaler: Scaler, path: str | Path, meta: dict | None = None) -> None:
    doc = {"artifact": "scaler", **(meta or {}), **scaler.to_dict()}
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")


def load_scaler(path: str | Path) -> Scaler:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("artifact") != "scaler":
        raise FeatureError(f"{path}: not a scaler file")
    return Scaler.from_dict(doc)
