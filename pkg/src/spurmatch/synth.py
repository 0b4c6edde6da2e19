"""Synthetic short-text benchmark with known spurious and genuine tokens.

Labels are caused by genuine tokens: a strong token fixes the label outright,
or three weak tokens vote. Spurious tokens are then injected with a tunable
label correlation, but always inside scene-filler contexts that are shared
across labels, so counterfactual matching can expose them: their matches are
noisier than the tight evaluative frames hosting genuine tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .wordclf import SPURIOUS, GENUINE, WordLabel


@dataclass
class SynthConfig:
    n_sentences: int = 2000
    seed: int = 7
    tag: str = "da"  # vocabulary namespace; two tags give disjoint domains
    n_spurious: int = 20
    n_strong: int = 40
    n_weak: int = 16
    n_scenes: int = 8
    scene_size: int = 25
    n_frames: int = 6
    n_weak_frames: int = 2
    p_strong: float = 0.75
    p_spurious: float = 0.9
    rho: float = 0.9  # P(label == affinity | spurious token) = (1 + rho) / 2


def mini_config(seed: int = 7, tag: str = "da") -> SynthConfig:
    """Small fixture used by the end-to-end golden test."""
    return SynthConfig(
        n_sentences=200,
        seed=seed,
        tag=tag,
        n_spurious=6,
        n_strong=12,
        n_weak=6,
        n_scenes=4,
        scene_size=15,
        n_frames=4,
        n_weak_frames=2,
    )


@dataclass
class SynthData:
    config: SynthConfig
    lines: list[str]  # "label<TAB>text" records
    word_labels: list[WordLabel]
    spurious_words: list[str]
    strong_words: list[str]
    weak_words: list[str]

    @property
    def genuine_words(self) -> list[str]:
        return self.strong_words + self.weak_words


def _scene_vocab(cfg: SynthConfig) -> list[list[str]]:
    return [
        [f"{cfg.tag}f{s}x{i:02d}" for i in range(cfg.scene_size)]
        for s in range(cfg.n_scenes)
    ]


def _frames(cfg: SynthConfig, kind: str, count: int) -> list[tuple[list[str], list[str]]]:
    out = []
    for f in range(count):
        left = [f"{cfg.tag}{kind}{f}a{j}" for j in range(4)]
        right = [f"{cfg.tag}{kind}{f}b{j}" for j in range(4)]
        out.append((left, right))
    return out


def generate(cfg: SynthConfig) -> SynthData:
    if cfg.n_spurious % 2 or cfg.n_strong % 2 or cfg.n_weak % 2:
        raise ValueError("token counts must split evenly between classes")
    rng = np.random.default_rng(cfg.seed)
    scenes = _scene_vocab(cfg)
    frames = _frames(cfg, "r", cfg.n_frames)
    weak_frames = _frames(cfg, "w", cfg.n_weak_frames)
    half_sp = cfg.n_spurious // 2
    spurious = {
        1: [f"{cfg.tag}sp{i:02d}" for i in range(half_sp)],
        -1: [f"{cfg.tag}sn{i:02d}" for i in range(half_sp)],
    }
    strong = {
        1: [f"{cfg.tag}gp{i:02d}" for i in range(cfg.n_strong // 2)],
        -1: [f"{cfg.tag}gn{i:02d}" for i in range(cfg.n_strong // 2)],
    }
    weak = {
        1: [f"{cfg.tag}wp{i:02d}" for i in range(cfg.n_weak // 2)],
        -1: [f"{cfg.tag}wn{i:02d}" for i in range(cfg.n_weak // 2)],
    }
    # Skewed usage so weak coefficients spread out and three-way votes are
    # occasionally misread by the linear model.
    weak_weights = np.array([1.0 / (i + 1) ** 2 for i in range(cfg.n_weak // 2)])
    weak_weights /= weak_weights.sum()
    p_affinity = (1.0 + cfg.rho) / 2.0

    lines = []
    for _ in range(cfg.n_sentences):
        scene = scenes[rng.integers(cfg.n_scenes)]

        def fill(k: int) -> list[str]:
            return [scene[int(i)] for i in rng.integers(0, len(scene), size=k)]

        tokens = fill(int(rng.integers(2, 5)))
        if rng.random() < cfg.p_strong:
            cls = 1 if rng.random() < 0.5 else -1
            tok = strong[cls][int(rng.integers(len(strong[cls])))]
            left, right = frames[int(rng.integers(cfg.n_frames))]
            tokens += [*left, tok, *right]
            label = cls
        else:
            votes = [1 if rng.random() < 0.5 else -1 for _ in range(3)]
            picks = [
                weak[v][int(rng.choice(len(weak[v]), p=weak_weights))] for v in votes
            ]
            left, right = weak_frames[int(rng.integers(cfg.n_weak_frames))]
            tokens += [*left, *picks, *right]
            label = 1 if sum(votes) > 0 else -1
        if rng.random() < cfg.p_spurious:
            affinity = label if rng.random() < p_affinity else -label
            sp = spurious[affinity][int(rng.integers(half_sp))]
            tokens += [*fill(3), sp, *fill(3)]
        tokens += fill(int(rng.integers(2, 4)))
        lines.append(f"{label}\t{' '.join(tokens)}")

    spurious_words = sorted(spurious[1] + spurious[-1])
    strong_words = sorted(strong[1] + strong[-1])
    weak_words = sorted(weak[1] + weak[-1])
    word_labels = [WordLabel(w, SPURIOUS) for w in spurious_words]
    word_labels += [WordLabel(w, GENUINE) for w in strong_words + weak_words]
    word_labels.sort(key=lambda wl: wl.word)
    return SynthData(
        config=cfg,
        lines=lines,
        word_labels=word_labels,
        spurious_words=spurious_words,
        strong_words=strong_words,
        weak_words=weak_words,
    )


def write_tsv(data: SynthData, path: str | Path) -> None:
    Path(path).write_text("\n".join(data.lines) + "\n", encoding="utf-8")


def write_labels(data: SynthData, path: str | Path) -> None:
    from .wordclf import save_word_labels

    save_word_labels(data.word_labels, path)
