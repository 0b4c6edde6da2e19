# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused masked-argmax scan over similarity score blocks.

The BLAS matmul that produces the score block is shared with the pure-numpy
backend; this kernel replaces the numpy mask/argmax passes with a single
cache-friendly sweep per row. Ties on the score resolve to the lowest
candidate index, which callers arrange to mean the smallest
(sentence_id, context_id) pair.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def masked_argmax_rows(
    cnp.float64_t[:, ::1] scores,
    cnp.uint8_t[::1] eligible,
):
    """Per row, index of the highest eligible score; -1 when none eligible."""
    cdef Py_ssize_t n_rows = scores.shape[0]
    cdef Py_ssize_t n_cols = scores.shape[1]
    if eligible.shape[0] != n_cols:
        raise ValueError("eligibility mask length must match score columns")
    out_arr = np.empty(n_rows, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef Py_ssize_t best
    cdef double best_score, s
    for i in range(n_rows):
        best = -1
        best_score = 0.0
        for j in range(n_cols):
            if eligible[j] == 0:
                continue
            s = scores[i, j]
            if best < 0 or s > best_score:
                best = j
                best_score = s
        out[i] = best
    return out_arr
