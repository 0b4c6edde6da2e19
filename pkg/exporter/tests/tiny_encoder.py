"""Tiny deterministic encoder and manifest used by the exporter tests."""

import json
import os
from pathlib import Path

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

HIDDEN = 32
SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]

# Window records: (context_id, sentence_id, word, position, left, right).
# Records 0 and 1 share one window text after word removal (two different
# evaluative words in the same frame); record 10 is an empty window.
WINDOWS = [
    (0, 0, "refreshing", 2, ["it", "s"], ["to", "see", "a", "movie", "that"]),
    (1, 1, "rare", 2, ["it", "s"], ["to", "see", "a", "movie", "that"]),
    (2, 2, "gripping", 5, ["the", "cast", "makes", "the", "most"], ["of", "the", "script"]),
    (3, 3, "dull", 4, ["a", "thriller", "with", "plenty"], ["of", "padding"]),
    (4, 4, "director", 4, ["the", "second", "act", "by"], ["goes", "smoothly"]),
    (5, 5, "editor", 4, ["it", "works", "because", "the"], ["kept", "it", "short"]),
    (6, 6, "ending", 3, ["a", "satisfying", "final"], ["for", "everyone"]),
    (7, 7, "premise", 2, ["an", "interesting"], ["with", "no", "payoff"]),
    (8, 8, "soundtrack", 3, ["driven", "by", "a"], ["that", "never", "stops"]),
    (9, 9, "plot", 1, ["the"], ["was", "a", "mess"]),
    (10, 10, "solo", 0, [], []),
]


def write_manifest(path: Path) -> None:
    lines = [json.dumps({"artifact": "contexts", "count": len(WINDOWS)})]
    for cid, sid, word, pos, left, right in WINDOWS:
        lines.append(
            json.dumps(
                {
                    "context_id": cid,
                    "sentence_id": sid,
                    "word": word,
                    "position": pos,
                    "left": left,
                    "right": right,
                },
                sort_keys=True,
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _vocab() -> list[str]:
    words = sorted({tok for w in WINDOWS for tok in (*w[4], *w[5])})
    return SPECIALS + words


def build_tiny_encoder(target: Path, layers: int = 4) -> Path:
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    target.mkdir(parents=True, exist_ok=True)
    (target / "vocab.txt").write_text("\n".join(_vocab()), encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(target / "vocab.txt"), do_lower_case=True)
    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=len(_vocab()),
        hidden_size=HIDDEN,
        num_hidden_layers=layers,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    model = BertModel(config)
    model.eval()
    tokenizer.save_pretrained(str(target))
    model.save_pretrained(str(target))
    return target


