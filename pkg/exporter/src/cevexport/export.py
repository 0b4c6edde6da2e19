"""Encode context windows with a pre-trained BERT encoder into a CEV1 file.

The input is the line-delimited contexts manifest produced by the matching
pipeline's extract stage; each record's window text (the tracked word
already removed) is encoded, the last four hidden layers are mean-pooled
over the window's words (subwords first, then words), and the four pooled
vectors are concatenated, deepest layer last. Records are written in
manifest order as float32.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"CEV1"
LAST_LAYERS = 4


class ExportError(ValueError):
    """Bad manifest, unusable encoder, or a manifest/binary mismatch."""


@dataclass
class ContextRecord:
    context_id: int
    sentence_id: int
    word: str
    position: int
    tokens: list[str]  # left + right, the treated word removed

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass
class ExportManifest:
    model: str
    hidden_size: int
    dim: int
    count: int
    sidecar_sha256: str
    pooling: str = "mean over subwords per word, mean over words, per layer"

    def to_dict(self) -> dict:
        return {
            "artifact": "export_manifest",
            "model": self.model,
            "hidden_size": self.hidden_size,
            "dim": self.dim,
            "count": self.count,
            "sidecar_sha256": self.sidecar_sha256,
            "pooling": self.pooling,
        }


def read_sidecar(path: str | Path) -> list[ContextRecord]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ExportError(f"{path}: empty contexts manifest")
    header = json.loads(lines[0])
    if header.get("artifact") != "contexts":
        raise ExportError(f"{path}: not a contexts manifest")
    records = []
    seen = set()
    for lineno, line in enumerate(lines[1:], start=2):
        rec = json.loads(line)
        cid = rec["context_id"]
        if cid in seen:
            raise ExportError(f"{path} line {lineno}: duplicate context_id {cid}")
        seen.add(cid)
        records.append(
            ContextRecord(
                context_id=cid,
                sentence_id=rec["sentence_id"],
                word=rec["word"],
                position=rec["position"],
                tokens=[*rec["left"], *rec["right"]],
            )
        )
    return records


def _load_encoder(model_id: str):
    import torch
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise ExportError(f"cannot load encoder {model_id!r}: {exc}") from exc
    if not getattr(tokenizer, "is_fast", False):
        raise ExportError("encoder tokenizer must expose word alignment (fast tokenizer)")
    layers = getattr(model.config, "num_hidden_layers", 0)
    if layers < LAST_LAYERS:
        raise ExportError(
            f"encoder has {layers} hidden layers; concatenating the last "
            f"{LAST_LAYERS} needs at least {LAST_LAYERS}"
        )
    model.eval()
    torch.set_grad_enabled(False)
    return tokenizer, model


def _pool_batch(tokenizer, model, texts: list[str]) -> np.ndarray:
    """Encode a batch of window texts; one concatenated vector per text."""
    import torch

    enc = tokenizer(
        texts, return_tensors="pt", padding=True, truncation=True,
        max_length=getattr(model.config, "max_position_embeddings", 512),
    )
    with torch.no_grad():
        out = model(**enc, output_hidden_states=True)
    layers = out.hidden_states[-LAST_LAYERS:]  # deepest is layers[-1]
    hidden = model.config.hidden_size
    vectors = np.empty((len(texts), LAST_LAYERS * hidden), dtype=np.float64)
    for row in range(len(texts)):
        word_ids = enc.word_ids(row)
        mask = enc["attention_mask"][row].bool()
        by_word: dict[int, list[int]] = {}
        for pos, wid in enumerate(word_ids):
            if wid is not None and bool(mask[pos]):
                by_word.setdefault(wid, []).append(pos)
        for li, layer in enumerate(layers):
            states = layer[row].numpy().astype(np.float64)
            if by_word:
                word_vecs = [states[poss].mean(axis=0) for _, poss in sorted(by_word.items())]
                pooled = np.mean(word_vecs, axis=0)
            else:
                # Empty window: fall back to all attended positions, which
                # always include the special tokens.
                pooled = states[mask.numpy()].mean(axis=0)
            vectors[row, li * hidden : (li + 1) * hidden] = pooled
    return vectors


def _write_cev(path: Path, dim: int, items: list[tuple[int, np.ndarray]]) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQ", dim, len(items)))
        for cid, vec in items:
            fh.write(struct.pack("<Q", cid))
            fh.write(np.ascontiguousarray(vec, dtype="<f4").tobytes())
    os.replace(tmp, path)


def export(
    contexts_path: str | Path,
    model_id: str,
    out_path: str | Path,
    batch_size: int = 32,
) -> ExportManifest:
    """Write `<out_path>` (CEV1) plus `<out_path>.manifest.json`.

    Identical window texts are encoded once and share one vector, so equal
    windows are bit-equal in the output regardless of batch boundaries.
    """
    if batch_size < 1:
        raise ExportError(f"batch_size must be >= 1, got {batch_size}")
    contexts_path = Path(contexts_path)
    out_path = Path(out_path)
    records = read_sidecar(contexts_path)
    tokenizer, model = _load_encoder(model_id)
    hidden = model.config.hidden_size
    dim = LAST_LAYERS * hidden

    distinct = sorted({r.text for r in records})
    by_text: dict[str, np.ndarray] = {}
    for start in range(0, len(distinct), batch_size):
        batch = distinct[start : start + batch_size]
        vecs = _pool_batch(tokenizer, model, batch)
        for text, vec in zip(batch, vecs):
            by_text[text] = vec.astype(np.float32)

    items = [(r.context_id, by_text[r.text]) for r in records]
    _write_cev(out_path, dim, items)
    manifest = ExportManifest(
        model=str(model_id),
        hidden_size=hidden,
        dim=dim,
        count=len(items),
        sidecar_sha256=hashlib.sha256(contexts_path.read_bytes()).hexdigest(),
    )
    manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    manifest_path.write_text(
        json.dumps(manifest.to_dict(), sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest


def verify_export(contexts_path: str | Path, cev_path: str | Path) -> int:
    """Check the binary holds exactly one record per manifest context id."""
    records = read_sidecar(contexts_path)
    data = Path(cev_path).read_bytes()
    if len(data) < 16 or data[:4] != MAGIC:
        raise ExportError(f"{cev_path}: not a CEV1 file")
    dim, count = struct.unpack_from("<IQ", data, 4)
    if count != len(records):
        raise ExportError(
            f"manifest/binary count mismatch: {len(records)} manifest records, "
            f"{count} binary records"
        )
    stride = 8 + 4 * dim
    if len(data) != 16 + count * stride:
        raise ExportError(f"{cev_path}: truncated or oversized file")
    ids = set()
    off = 16
    for _ in range(count):
        (cid,) = struct.unpack_from("<Q", data, off)
        if cid in ids:
            raise ExportError(f"{cev_path}: duplicate context_id {cid}")
        ids.add(cid)
        off += stride
    expected = {r.context_id for r in records}
    if ids != expected:
        raise ExportError("manifest/binary context ids disagree")
    return int(count)
