"""Vocabulary-aware vector containers.

An Embedding pairs an ordered list of unique tokens with an (n, d) float64
matrix, one row per token. Instances own a read-only copy of their matrix,
so they are safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class Embedding:
    """Ordered vocabulary plus an (n, d) matrix of word vectors.

    Invariants enforced at construction: tokens are unique, non-empty
    strings; the matrix is finite with one row per token; n >= 1, d >= 1.
    """

    __slots__ = ("words", "vectors", "_index")

    def __init__(self, words: Sequence[str], vectors):
        words = tuple(words)
        matrix = np.array(vectors, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError(f"vectors must be 2-D, got ndim={matrix.ndim}")
        n, d = matrix.shape
        if n < 1 or d < 1:
            raise ValueError(f"embedding must be non-empty, got shape {matrix.shape}")
        if len(words) != n:
            raise ValueError(f"{len(words)} words but {n} vector rows")
        index = {}
        for i, w in enumerate(words):
            if not isinstance(w, str) or not w:
                raise ValueError(f"token at position {i} is not a non-empty string")
            if w in index:
                raise ValueError(f"duplicate token {w!r}")
            index[w] = i
        if not np.isfinite(matrix).all():
            bad = np.flatnonzero(~np.isfinite(matrix).all(axis=1))
            raise ValueError(
                f"non-finite vector entries for words: {[words[i] for i in bad[:5]]}"
            )
        matrix.setflags(write=False)
        self.words = words
        self.vectors = matrix
        self._index = index

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.n

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def row(self, word: str) -> int:
        """Row index of a word; KeyError if absent."""
        return self._index[word]

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self._index[word]]

    def with_vectors(self, vectors) -> "Embedding":
        """New embedding with the same vocabulary and different vectors."""
        return Embedding(self.words, vectors)

    def subset(self, words: Iterable[str]) -> "Embedding":
        """Restriction to the given words, in the given order."""
        words = list(words)
        rows = [self._index[w] for w in words]
        return Embedding(words, self.vectors[rows])

    def __repr__(self) -> str:
        return f"Embedding(n={self.n}, d={self.d})"


@dataclass(frozen=True)
class AlignedPair:
    """Two embeddings restricted to a shared vocabulary, rows corresponding.

    Row i of `a` and row i of `b` refer to the same word. `dropped_a` and
    `dropped_b` count words discarded from each side by the intersection.
    """

    a: Embedding
    b: Embedding
    dropped_a: int = 0
    dropped_b: int = 0

    def __post_init__(self):
        if self.a.words != self.b.words:
            raise ValueError("aligned pair must share an identical word list")


def intersect_vocab(a: Embedding, b: Embedding) -> AlignedPair:
    """Restrict both embeddings to their shared vocabulary, rows corresponding.

    Output rows follow a's vocabulary order. Raises on an empty intersection.
    """
    shared = [w for w in a.words if w in b]
    if not shared:
        raise ValueError("embeddings have no words in common")
    return AlignedPair(
        a=a.subset(shared),
        b=b.subset(shared),
        dropped_a=a.n - len(shared),
        dropped_b=b.n - len(shared),
    )
