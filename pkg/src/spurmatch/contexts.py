"""Context windows around tracked-word occurrences, context embeddings, and
the `CEV1` embedding file format.

Embeddings come either from an external file (e.g. produced by a neural
exporter) or from the built-in fallback embedder, which factorizes the
positive-PMI co-occurrence matrix of the train split and averages token
vectors over the window.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import svds

from .corpus import Corpus

MAGIC = b"CEV1"


class EmbeddingError(ValueError):
    """Malformed embedding file or degenerate embedding request."""


@dataclass
class ContextWindow:
    context_id: int
    sentence_id: int
    word: str
    position: int
    left: list[str]   # up to `window` tokens before the occurrence
    right: list[str]  # up to `window` tokens after it


@dataclass
class EmbeddingStore:
    dim: int
    vectors: dict[int, np.ndarray]  # context_id -> float32 vector
    provenance: str  # "external_file" | "fallback"

    def __len__(self) -> int:
        return len(self.vectors)

    def vector(self, context_id: int) -> np.ndarray:
        return self.vectors[context_id]

    def matrix(self, context_ids: list[int]) -> np.ndarray:
        """Float64 matrix with one row per requested context id."""
        out = np.empty((len(context_ids), self.dim), dtype=np.float64)
        for i, cid in enumerate(context_ids):
            out[i] = self.vectors[cid]
        return out


def _word_set(words) -> set[str] | None:
    if words is None:
        return None
    out = set()
    for w in words:
        out.add(w.word if hasattr(w, "word") else w)
    return out


def extract_contexts(
    corpus: Corpus,
    words=None,
    window: int = 5,
    split: str | None = None,
) -> list[ContextWindow]:
    """One window per occurrence of each tracked word, the occurrence itself
    excluded from the window. `words` may be TopWord entries or strings; None
    extracts a window at every token position (the widest candidate pool).
    `split` restricts extraction to one corpus split.
    """
    tracked = _word_set(words)
    windows: list[ContextWindow] = []
    cid = 0
    for s in sorted(corpus.sentences, key=lambda s: s.id):
        if split is not None and s.split != split:
            continue
        for pos, tok in enumerate(s.tokens):
            if tracked is not None and tok not in tracked:
                continue
            windows.append(
                ContextWindow(
                    context_id=cid,
                    sentence_id=s.id,
                    word=tok,
                    position=pos,
                    left=s.tokens[max(0, pos - window) : pos],
                    right=s.tokens[pos + 1 : pos + 1 + window],
                )
            )
            cid += 1
    return windows


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; defined as 0 when either vector is all-zero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise EmbeddingError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v) / (nu * nv)


# ---------------------------------------------------------------------------
# CEV1 binary format: magic, u32 dim, u64 count, then (u64 id, dim x f32)
# records, all little-endian.
# ---------------------------------------------------------------------------

def save_embeddings(store: EmbeddingStore, path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    ids = sorted(store.vectors)
    with tmp.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQ", store.dim, len(ids)))
        for cid in ids:
            fh.write(struct.pack("<Q", cid))
            fh.write(np.ascontiguousarray(store.vectors[cid], dtype="<f4").tobytes())
    os.replace(tmp, path)


def load_embeddings(path: str | Path) -> EmbeddingStore:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 16 or data[:4] != MAGIC:
        raise EmbeddingError(f"{path}: bad magic, not a CEV1 file")
    dim, count = struct.unpack_from("<IQ", data, 4)
    record = 8 + 4 * dim
    expected = 16 + count * record
    if len(data) != expected:
        raise EmbeddingError(
            f"{path}: truncated or oversized file (expected {expected} bytes, got {len(data)})"
        )
    vectors: dict[int, np.ndarray] = {}
    off = 16
    for _ in range(count):
        (cid,) = struct.unpack_from("<Q", data, off)
        if cid in vectors:
            raise EmbeddingError(f"{path}: duplicate context_id {cid}")
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=off + 8).copy()
        vectors[cid] = vec
        off += record
    return EmbeddingStore(dim=int(dim), vectors=vectors, provenance="external_file")


# ---------------------------------------------------------------------------
# Sidecar manifest: JSON lines mirroring extract_contexts output. Window
# tokens are included so an external exporter can encode the window text
# without re-reading the corpus.
# ---------------------------------------------------------------------------

def save_context_manifest(
    windows: list[ContextWindow], path: str | Path, meta: dict | None = None
) -> None:
    header = {"artifact": "contexts", "count": len(windows)}
    if meta:
        header.update(meta)
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for w in windows:
            rec = {
                "context_id": w.context_id,
                "sentence_id": w.sentence_id,
                "word": w.word,
                "position": w.position,
                "left": w.left,
                "right": w.right,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_context_manifest(path: str | Path) -> tuple[list[ContextWindow], dict]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise EmbeddingError(f"{path}: empty manifest")
    header = json.loads(lines[0])
    if header.get("artifact") != "contexts":
        raise EmbeddingError(f"{path}: not a context manifest")
    windows = []
    for line in lines[1:]:
        rec = json.loads(line)
        windows.append(
            ContextWindow(
                context_id=rec["context_id"],
                sentence_id=rec["sentence_id"],
                word=rec["word"],
                position=rec["position"],
                left=list(rec["left"]),
                right=list(rec["right"]),
            )
        )
    return windows, header


def verify_manifest_agreement(
    windows: list[ContextWindow], manifest_windows: list[ContextWindow]
) -> None:
    """Hard error when a manifest and freshly extracted windows disagree."""
    if len(windows) != len(manifest_windows):
        raise EmbeddingError(
            f"manifest mismatch: {len(manifest_windows)} manifest records, "
            f"{len(windows)} extracted windows"
        )
    for a, b in zip(windows, manifest_windows):
        if (a.context_id, a.sentence_id, a.word, a.position) != (
            b.context_id,
            b.sentence_id,
            b.word,
            b.position,
        ):
            raise EmbeddingError(
                f"manifest mismatch at context_id {a.context_id}: "
                f"({a.sentence_id}, {a.word!r}, {a.position}) vs "
                f"({b.sentence_id}, {b.word!r}, {b.position})"
            )


# ---------------------------------------------------------------------------
# Fallback embedder: PPMI co-occurrence factorization + mean token vectors.
# ---------------------------------------------------------------------------

def _cooccurrence(sentences, vocab_index: dict[str, int], window: int = 5) -> sparse.csr_matrix:
    rows, cols = [], []
    for s in sentences:
        idxs = [vocab_index[t] for t in s.tokens]
        for i, a in enumerate(idxs):
            for j in range(i + 1, min(i + 1 + window, len(idxs))):
                b = idxs[j]
                rows.append(a)
                cols.append(b)
                rows.append(b)
                cols.append(a)
    n = len(vocab_index)
    data = np.ones(len(rows), dtype=np.float64)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))


def _ppmi(counts: sparse.csr_matrix) -> sparse.csr_matrix:
    total = counts.sum()
    if total == 0:
        raise EmbeddingError("empty co-occurrence matrix")
    row = np.asarray(counts.sum(axis=1)).ravel()
    col = np.asarray(counts.sum(axis=0)).ravel()
    coo = counts.tocoo()
    with np.errstate(divide="ignore"):
        pmi = np.log(coo.data * total / (row[coo.row] * col[coo.col]))
    pmi[~np.isfinite(pmi)] = 0.0
    pmi[pmi < 0] = 0.0
    out = sparse.csr_matrix((pmi, (coo.row, coo.col)), shape=counts.shape)
    out.eliminate_zeros()
    return out


def _sign_normalize(u: np.ndarray) -> np.ndarray:
    # SVD columns are sign-ambiguous; pin each so its largest-|.| entry is positive.
    for k in range(u.shape[1]):
        col = u[:, k]
        pivot = int(np.argmax(np.abs(col)))
        if col[pivot] < 0:
            u[:, k] = -col
    return u

_DENSE_SVD_LIMIT = 2000


def _word_vectors(ppmi: sparse.csr_matrix, dim: int, seed: int) -> np.ndarray:
    n = ppmi.shape[0]
    k = min(dim, n - 1 if n > 1 else 1)
    if n <= _DENSE_SVD_LIMIT:
        u, s, _ = np.linalg.svd(ppmi.toarray(), full_matrices=False)
        u, s = u[:, :k], s[:k]
    else:
        # Fixed start vector keeps ARPACK runs reproducible.
        v0 = np.random.default_rng(seed).standard_normal(n)
        u, s, _ = svds(ppmi, k=k, v0=v0)
        order = np.argsort(-s)
        u, s = u[:, order], s[order]
    u = _sign_normalize(u)
    vecs = u * np.sqrt(s)
    if vecs.shape[1] < dim:
        vecs = np.hstack([vecs, np.zeros((n, dim - vecs.shape[1]))])
    return vecs


def _seeded_unit_vector(seed: int, context_id: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng([seed, context_id])
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def fallback_embed(
    corpus: Corpus,
    windows: list[ContextWindow],
    dim: int = 100,
    seed: int = 0,
) -> EmbeddingStore:
    """Embed each window as the mean of its token vectors.

    Word vectors come from a truncated SVD of the train split's positive-PMI
    co-occurrence matrix (symmetric window 5). Token vectors are summed in
    sorted token order, so windows with equal token multisets get bit-equal
    vectors. Windows with no in-vocabulary token (or an exactly zero mean)
    get a unit vector derived deterministically from (seed, context_id).
    """
    if dim < 1:
        raise EmbeddingError(f"dim must be >= 1, got {dim}")
    if not corpus.sentences:
        raise EmbeddingError("cannot embed with an empty corpus")
    train = corpus.train()
    if not train:
        raise EmbeddingError("fallback embedder needs a nonempty train split")
    vocab = {w: i for i, w in enumerate(sorted({t for s in train for t in s.tokens}))}
    counts = _cooccurrence(train, vocab, window=5)
    vecs = _word_vectors(_ppmi(counts), dim, seed)

    vectors: dict[int, np.ndarray] = {}
    for w in windows:
        idxs = sorted(vocab[t] for t in (*w.left, *w.right) if t in vocab)
        if idxs:
            mean = np.zeros(dim, dtype=np.float64)
            for i in idxs:
                mean += vecs[i]
            mean /= len(idxs)
            if float(np.linalg.norm(mean)) > 0.0:
                vectors[w.context_id] = mean.astype(np.float32)
                continue
        vectors[w.context_id] = _seeded_unit_vector(seed, w.context_id, dim).astype(
            np.float32
        )
    return EmbeddingStore(dim=dim, vectors=vectors, provenance="fallback")


def manifest_checksum(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
