"""Independent brute-force oracles used to verify the production DPs.

These deliberately avoid the recurrences under test: the alignment oracle
enumerates monotone chains outright, and the DTW oracle enumerates every
warping path.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def brute_force_chain_score(entries: Sequence[Sequence[int]]) -> int:
    """Max 1-cells selectable with strictly increasing rows and columns,
    found by enumerating every chain extension."""
    rows, cols = len(entries), len(entries[0])

    def extend(last_r: int, last_c: int) -> int:
        best = 0
        for r in range(last_r + 1, rows):
            for c in range(last_c + 1, cols):
                if entries[r][c] == 1:
                    best = max(best, 1 + extend(r, c))
        return best

    return extend(-1, -1)


def all_chains(rows: int, cols: int) -> list[list[tuple[int, int]]]:
    """Every non-empty monotone cell chain of the given shape."""
    chains: list[list[tuple[int, int]]] = []

    def extend(prefix: list[tuple[int, int]], last_r: int, last_c: int) -> None:
        for r in range(last_r + 1, rows):
            for c in range(last_c + 1, cols):
                chain = prefix + [(r, c)]
                chains.append(chain)
                extend(chain, r, c)

    extend([], -1, -1)
    return chains


def chain_scores_for_all_matrices(rows: int, cols: int) -> np.ndarray:
    """Brute-force scores for every binary matrix of one shape.

    Matrix m is encoded as an integer whose bit r*cols+c is entry (r, c);
    a chain matches m when its cell mask is a subset of m's bits.
    """
    masks = []
    lengths = []
    for chain in all_chains(rows, cols):
        masks.append(sum(1 << (r * cols + c) for r, c in chain))
        lengths.append(len(chain))
    count = 1 << (rows * cols)
    matrices = np.arange(count, dtype=np.int64)
    best = np.zeros(count, dtype=np.int64)
    for mask, length in zip(masks, lengths):
        np.maximum(best, np.where((matrices & mask) == mask, length, 0), out=best)
    return best


def matrix_from_int(value: int, rows: int, cols: int) -> tuple[tuple[int, ...], ...]:
    return tuple(
        tuple((value >> (r * cols + c)) & 1 for c in range(cols))
        for r in range(rows)
    )


def brute_force_dtw(pred: Sequence[Sequence[float]], ref: Sequence[Sequence[float]]) -> float:
    """Minimum warping cost over all monotone alignments, enumerated fully."""
    n, m = len(pred), len(ref)
    best = math.inf

    def recurse(i: int, j: int, acc: float) -> None:
        nonlocal best
        acc += math.dist(pred[i], ref[j])
        if i == n - 1 and j == m - 1:
            best = min(best, acc)
            return
        if i + 1 < n:
            recurse(i + 1, j, acc)
        if j + 1 < m:
            recurse(i, j + 1, acc)
        if i + 1 < n and j + 1 < m:
            recurse(i + 1, j + 1, acc)

    recurse(0, 0, 0.0)
    return best
