"""Backend selection for the similarity-search inner loop.

The compiled extension fuses the masked argmax over a score block into one
sweep; the numpy fallback computes the same result with vectorized passes.
Both must agree bit-for-bit: ties on equal scores resolve to the lowest
candidate index in either path.
"""

from __future__ import annotations

import numpy as np

try:
    from . import _matchkernel

    _HAVE_KERNEL = True
except ImportError:  # extension not built; pure-python install
    _matchkernel = None
    _HAVE_KERNEL = False


def backend() -> str:
    return "compiled" if _HAVE_KERNEL else "numpy"


def _masked_argmax_numpy(scores: np.ndarray, eligible: np.ndarray) -> np.ndarray:
    masked = np.where(eligible.astype(bool), scores, -np.inf)
    out = masked.argmax(axis=1).astype(np.int64)
    out[masked.max(axis=1) == -np.inf] = -1
    return out


def masked_argmax_rows(
    scores: np.ndarray, eligible: np.ndarray, force_python: bool = False
) -> np.ndarray:
    """Per row of `scores`, the index of the highest eligible column (-1 if
    no column is eligible); ties go to the lowest index.
    """
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    eligible = np.ascontiguousarray(eligible, dtype=np.uint8)
    if scores.ndim != 2 or eligible.shape[0] != scores.shape[1]:
        raise ValueError("scores must be 2-d with one mask entry per column")
    if _HAVE_KERNEL and not force_python:
        return _matchkernel.masked_argmax_rows(scores, eligible)
    return _masked_argmax_numpy(scores, eligible)
