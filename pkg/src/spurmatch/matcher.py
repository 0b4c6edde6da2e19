"""Best-match counterfactual search and per-word treatment effects.

For every occurrence of a tracked word, the matcher finds the most
cosine-similar context among windows from sentences that do not contain the
word, then averages the treated-minus-matched label differences into the
word's effect estimate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .contexts import ContextWindow, EmbeddingStore, cosine
from .corpus import Corpus
from .simsearch import masked_argmax_rows


class MatchError(ValueError):
    """Missing embeddings or an empty record set."""


@dataclass
class MatchRecord:
    word: str
    treated_context_id: int
    treated_sentence_id: int
    treated_label: int
    matched_context_id: int
    matched_sentence_id: int
    matched_label: int
    matched_word: str
    similarity: float


@dataclass
class AteEstimate:
    word: str
    tau: float
    n_pairs: int


_SCORE_BLOCK_ROWS = 256


def _normalized_matrix(store: EmbeddingStore, context_ids: list[int]) -> np.ndarray:
    mat = store.matrix(context_ids)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0  # all-zero vectors keep cosine 0 against everything
    return mat / norms


def _sentence_words(corpus: Corpus | None, windows: list[ContextWindow]) -> dict[int, frozenset[str]]:
    if corpus is not None:
        return corpus.token_sets()
    # Without the corpus, containment is derived from the windows themselves;
    # valid whenever windows cover every occurrence of every tracked word.
    acc: dict[int, set[str]] = {}
    for w in windows:
        acc.setdefault(w.sentence_id, set()).add(w.word)
    return {sid: frozenset(ws) for sid, ws in acc.items()}


def _labels(corpus: Corpus) -> dict[int, int]:
    return {s.id: s.label for s in corpus.sentences}


def match_all(
    top_words,
    windows: list[ContextWindow],
    store: EmbeddingStore,
    corpus: Corpus,
    dedup_per_sentence: bool = False,
    force_python: bool = False,
    unmatched: dict[str, int] | None = None,
) -> list[MatchRecord]:
    """One MatchRecord per matchable treated occurrence of each tracked word.

    Candidates are all windows whose sentence lacks the treated word; ties on
    similarity go to the smallest (sentence_id, context_id). Records come
    back sorted by (word, treated_context_id). With dedup_per_sentence only
    the first occurrence of a word in a sentence is treated.
    """
    for w in windows:
        if w.context_id not in store.vectors:
            raise MatchError(f"no embedding for context_id {w.context_id}")
    order = sorted(range(len(windows)), key=lambda i: (windows[i].sentence_id, windows[i].context_id))
    cand = [windows[i] for i in order]
    cand_ids = [w.context_id for w in cand]
    cand_sent = np.array([w.sentence_id for w in cand], dtype=np.int64)
    raw = store.matrix(cand_ids)
    matrix = _normalized_matrix(store, cand_ids)
    sent_words = _sentence_words(corpus, windows)
    labels = _labels(corpus)

    by_word: dict[str, list[int]] = {}
    for i, w in enumerate(cand):
        by_word.setdefault(w.word, []).append(i)

    words = sorted({tw.word if hasattr(tw, "word") else tw for tw in top_words})
    records: list[MatchRecord] = []
    for word in words:
        treated_rows = by_word.get(word, [])
        if dedup_per_sentence:
            seen: set[int] = set()
            kept = []
            for i in treated_rows:
                if cand[i].sentence_id not in seen:
                    seen.add(cand[i].sentence_id)
                    kept.append(i)
            treated_rows = kept
        if not treated_rows:
            continue
        eligible = np.array(
            [word not in sent_words.get(int(sid), frozenset()) for sid in cand_sent],
            dtype=np.uint8,
        )
        n_skipped = 0
        if not eligible.any():
            n_skipped = len(treated_rows)
        else:
            for start in range(0, len(treated_rows), _SCORE_BLOCK_ROWS):
                chunk = treated_rows[start : start + _SCORE_BLOCK_ROWS]
                scores = matrix[chunk] @ matrix.T
                winners = masked_argmax_rows(scores, eligible, force_python=force_python)
                for row, win in zip(chunk, winners):
                    if win < 0:
                        n_skipped += 1
                        continue
                    t, m = cand[row], cand[int(win)]
                    # Selection uses the blocked matmul scores; the recorded
                    # value is recomputed as the canonical pairwise cosine so
                    # it matches cosine() of the stored vectors bit-for-bit.
                    sim = cosine(raw[row], raw[int(win)])
                    records.append(
                        MatchRecord(
                            word=word,
                            treated_context_id=t.context_id,
                            treated_sentence_id=t.sentence_id,
                            treated_label=labels[t.sentence_id],
                            matched_context_id=m.context_id,
                            matched_sentence_id=m.sentence_id,
                            matched_label=labels[m.sentence_id],
                            matched_word=m.word,
                            similarity=sim,
                        )
                    )
        if n_skipped and unmatched is not None:
            unmatched[word] = unmatched.get(word, 0) + n_skipped
    records.sort(key=lambda r: (r.word, r.treated_context_id))
    return records


def best_match(
    treated: ContextWindow,
    candidates: list[ContextWindow],
    store: EmbeddingStore,
    word: str,
    corpus: Corpus,
) -> MatchRecord | None:
    """Best counterfactual for one occurrence; None when nothing is eligible."""
    pool = [c for c in candidates if c.context_id != treated.context_id]
    records = match_all([word], [treated, *pool], store, corpus)
    for r in records:
        if r.treated_context_id == treated.context_id:
            return r
    return None


def ate(records: list[MatchRecord]) -> AteEstimate:
    """Mean treated-minus-matched label difference for one word's records."""
    if not records:
        raise MatchError("no matches: cannot estimate a treatment effect")
    word = records[0].word
    if any(r.word != word for r in records):
        raise MatchError("records mix words; pass one word's records")
    diffs = [r.treated_label - r.matched_label for r in records]
    return AteEstimate(word=word, tau=sum(diffs) / len(diffs), n_pairs=len(diffs))


def group_by_word(records: list[MatchRecord]) -> dict[str, list[MatchRecord]]:
    out: dict[str, list[MatchRecord]] = {}
    for r in records:
        out.setdefault(r.word, []).append(r)
    return out


def save_matches(
    records: list[MatchRecord],
    path: str | Path,
    meta: dict | None = None,
    unmatched: dict[str, int] | None = None,
) -> None:
    header = {"artifact": "matches", "count": len(records)}
    if meta:
        header.update(meta)
    if unmatched:
        header["unmatched"] = {k: unmatched[k] for k in sorted(unmatched)}
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for r in records:
            fh.write(json.dumps(r.__dict__, sort_keys=True) + "\n")


def load_matches(path: str | Path) -> tuple[list[MatchRecord], dict]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise MatchError(f"{path}: empty matches file")
    header = json.loads(lines[0])
    if header.get("artifact") != "matches":
        raise MatchError(f"{path}: not a matches file")
    records = [MatchRecord(**json.loads(line)) for line in lines[1:]]
    return records, header


def format_pair(
    record: MatchRecord, windows_by_id: dict[int, ContextWindow]
) -> str:
    """Human-readable treated/matched pair, one per line each."""
    t = windows_by_id[record.treated_context_id]
    m = windows_by_id[record.matched_context_id]

    def line(w: ContextWindow, label: int) -> str:
        return f"{' '.join(w.left)} **{w.word}** {' '.join(w.right)} ({label:+d})"

    return (
        line(t, record.treated_label)
        + "\n"
        + line(m, record.matched_label)
        + f"\n  similarity {record.similarity:.4f}"
    )
