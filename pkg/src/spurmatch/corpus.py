"""Corpus ingestion: per-dataset labeling rules, tokenization, class balancing,
stratified splits, and the canonical line-delimited corpus format.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DATASET_KINDS = ("imdb", "kindle", "toxic_comment", "toxic_tweet", "generic")

# Datasets assembled from document-level ratings get a sentence-length filter.
LENGTH_FILTERED_KINDS = ("kindle", "toxic_comment")
MIN_TOKENS = 5
MAX_TOKENS = 40

# Maximal runs of alphanumeric characters; underscore counts as a separator.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class CorpusError(ValueError):
    """Malformed input record or degenerate corpus."""


@dataclass
class LabeledSentence:
    id: int
    tokens: list[str]
    label: int  # -1 or +1
    split: str = "train"

    def contains(self, word: str) -> bool:
        return word in self.tokens


@dataclass
class Corpus:
    name: str
    sentences: list[LabeledSentence] = field(default_factory=list)

    def class_counts(self) -> dict[int, int]:
        counts = {-1: 0, 1: 0}
        for s in self.sentences:
            counts[s.label] += 1
        return counts

    def split_sentences(self, split: str) -> list[LabeledSentence]:
        return [s for s in self.sentences if s.split == split]

    def train(self) -> list[LabeledSentence]:
        return self.split_sentences("train")

    def test(self) -> list[LabeledSentence]:
        return self.split_sentences("test")

    def by_id(self) -> dict[int, LabeledSentence]:
        return {s.id: s for s in self.sentences}

    def token_sets(self) -> dict[int, frozenset[str]]:
        return {s.id: frozenset(s.tokens) for s in self.sentences}

    def vocabulary_words(self, split: str | None = None) -> list[str]:
        """Distinct surface forms, sorted; one entry per form."""
        seen: set[str] = set()
        for s in self.sentences:
            if split is None or s.split == split:
                seen.update(s.tokens)
        return sorted(seen)

    def relabeled(self) -> "Corpus":
        """Copy with every label negated (used by symmetry checks)."""
        flipped = [
            LabeledSentence(s.id, list(s.tokens), -s.label, s.split)
            for s in self.sentences
        ]
        return Corpus(self.name, flipped)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on maximal runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def _parse_label(raw: str, lineno: int) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise CorpusError(f"line {lineno}: label {raw!r} is not an integer")
    if value not in (-1, 1):
        raise CorpusError(f"line {lineno}: label must be -1 or 1, got {value}")
    return value


def _parse_kindle(raw: str, lineno: int) -> int | None:
    try:
        rating = int(raw)
    except ValueError:
        raise CorpusError(f"line {lineno}: rating {raw!r} is not an integer")
    if rating not in (1, 2, 3, 4, 5):
        raise CorpusError(f"line {lineno}: rating must be in 1..5, got {rating}")
    if rating >= 4:
        return 1
    if rating <= 2:
        return -1
    return None  # rating 3 carries no polarity


def _parse_toxic_score(raw: str, lineno: int) -> int | None:
    try:
        score = float(raw)
    except ValueError:
        raise CorpusError(f"line {lineno}: score {raw!r} is not a number")
    if not 0.0 <= score <= 1.0:
        raise CorpusError(f"line {lineno}: score must be in [0, 1], got {score}")
    if score >= 0.7:
        return 1
    if score <= 0.5:
        return -1
    return None  # ambiguous band (0.5, 0.7) is dropped


def ingest(path: str | Path, dataset_kind: str, seed: int) -> Corpus:
    """Read a TSV file, apply the dataset's labeling and filtering rules,
    tokenize, and balance classes by deterministic downsampling.
    """
    if dataset_kind not in DATASET_KINDS:
        raise CorpusError(f"unknown dataset kind {dataset_kind!r}")
    path = Path(path)
    length_filtered = dataset_kind in LENGTH_FILTERED_KINDS

    kept: list[tuple[int, list[str]]] = []  # (label, tokens) in input order
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            head, sep, text = line.partition("\t")
            if not sep:
                raise CorpusError(f"line {lineno}: expected <field>\\t<text>")
            if dataset_kind == "kindle":
                label = _parse_kindle(head, lineno)
            elif dataset_kind == "toxic_comment":
                label = _parse_toxic_score(head, lineno)
            else:
                label = _parse_label(head, lineno)
            if label is None:
                continue
            tokens = tokenize(text)
            if length_filtered and not MIN_TOKENS <= len(tokens) <= MAX_TOKENS:
                continue
            kept.append((label, tokens))

    pos = [i for i, (lab, _) in enumerate(kept) if lab == 1]
    neg = [i for i, (lab, _) in enumerate(kept) if lab == -1]
    if not pos or not neg:
        raise CorpusError("degenerate corpus: a class is empty after filtering")

    # Downsample the larger class only; selection is a seeded permutation.
    n_keep = min(len(pos), len(neg))
    rng = np.random.default_rng(seed)
    keep = set(pos if len(pos) <= len(neg) else neg)
    larger = neg if len(pos) <= len(neg) else pos
    keep.update(int(i) for i in rng.permutation(larger)[:n_keep])

    sentences = [
        LabeledSentence(id=new_id, tokens=kept[i][1], label=kept[i][0])
        for new_id, i in enumerate(sorted(keep))
    ]
    return Corpus(name=dataset_kind, sentences=sentences)


def split(corpus: Corpus, test_fraction: float, seed: int) -> Corpus:
    """Assign train/test splits, stratified by label.

    Per class, floor(n * test_fraction) sentences go to test, with at least
    one test sentence whenever the class has two or more members.
    """
    if not 0.0 < test_fraction < 1.0:
        raise CorpusError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_ids: set[int] = set()
    for label in (-1, 1):
        ids = sorted(s.id for s in corpus.sentences if s.label == label)
        if not ids:
            continue
        n_test = int(len(ids) * test_fraction)
        if n_test == 0 and len(ids) >= 2:
            n_test = 1
        order = rng.permutation(len(ids))
        test_ids.update(ids[int(i)] for i in order[:n_test])
    assigned = [
        LabeledSentence(s.id, list(s.tokens), s.label,
                        "test" if s.id in test_ids else "train")
        for s in corpus.sentences
    ]
    return Corpus(corpus.name, assigned)


def save_corpus(corpus: Corpus, path: str | Path, meta: dict | None = None) -> None:
    """Write the canonical corpus file: one JSON header line, then one JSON
    record per sentence: {id, label, split, tokens}.
    """
    header = {"artifact": "corpus", "name": corpus.name}
    if meta:
        header.update(meta)
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for s in sorted(corpus.sentences, key=lambda s: s.id):
            rec = {"id": s.id, "label": s.label, "split": s.split, "tokens": s.tokens}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_corpus(path: str | Path) -> tuple[Corpus, dict]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CorpusError(f"{path}: empty corpus file")
    header = json.loads(lines[0])
    if header.get("artifact") != "corpus":
        raise CorpusError(f"{path}: not a corpus file")
    sentences = []
    ids = set()
    for lineno, line in enumerate(lines[1:], start=2):
        rec = json.loads(line)
        if rec["id"] in ids:
            raise CorpusError(f"{path} line {lineno}: duplicate sentence id {rec['id']}")
        ids.add(rec["id"])
        sentences.append(
            LabeledSentence(rec["id"], list(rec["tokens"]), rec["label"], rec["split"])
        )
    return Corpus(header.get("name", "corpus"), sentences), header
