"""Parsing and serialization of embeddings, test sets, lexicons, and reports.

Embedding files are plain UTF-8 text, one word per line: the token, then d
decimal floats, all space-separated. An optional first line "n d" (two bare
integers) is detected and skipped. Serialization uses 17 significant digits
so every 64-bit float round-trips exactly.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._version import __version__
from .embedding import AlignedPair, Embedding, intersect_vocab
from .errors import ParseError
from .evaluation import AnalogyTestSet, EvalReport, Lexicon, SimilarityTestSet

__all__ = [
    "EmbeddingFileSpec", "load_embedding", "save_embedding", "intersect_vocab",
    "load_similarity_testset", "load_analogy_testset", "load_lexicon", "write_report",
]


@dataclass(frozen=True)
class EmbeddingFileSpec:
    """How to read an embedding file.

    expected_d validates the dimension, max_words keeps only the first m
    word lines, lowercase folds tokens (later duplicates are then skipped).
    """

    path: str | Path
    expected_d: int | None = None
    max_words: int | None = None
    lowercase: bool = False

    def __post_init__(self):
        if self.expected_d is not None and self.expected_d < 1:
            raise ValueError("expected_d must be positive")
        if self.max_words is not None and self.max_words < 1:
            raise ValueError("max_words must be positive")


def _is_header(fields: list[str]) -> bool:
    if len(fields) != 2:
        return False
    try:
        int(fields[0]), int(fields[1])
    except ValueError:
        return False
    return True


def load_embedding(spec: EmbeddingFileSpec | str | Path) -> Embedding:
    """Read a text embedding file.

    The first whitespace-delimited field of each line is the token (tokens
    may contain any non-whitespace bytes); the rest are its vector. Later
    occurrences of a duplicate token are skipped with a warning. Raises
    ParseError for inconsistent dimensions or unparsable floats (with line
    numbers) and for empty files.
    """
    if not isinstance(spec, EmbeddingFileSpec):
        spec = EmbeddingFileSpec(path=spec)
    path = Path(spec.path)
    words: list[str] = []
    seen: set[str] = set()
    rows: list[list[float]] = []
    d = None
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if lineno == 1 and _is_header(fields):
                continue
            if spec.max_words is not None and len(rows) >= spec.max_words:
                break
            token = fields[0]
            if spec.lowercase:
                token = token.lower()
            try:
                vec = [float(f) for f in fields[1:]]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: unparsable float ({exc})") from None
            if not vec:
                raise ParseError(f"{path}:{lineno}: no vector values after token")
            if not all(np.isfinite(vec)):
                raise ParseError(f"{path}:{lineno}: non-finite vector value")
            if d is None:
                d = len(vec)
                if spec.expected_d is not None and d != spec.expected_d:
                    raise ParseError(
                        f"{path}:{lineno}: dimension {d} does not match "
                        f"expected_d={spec.expected_d}"
                    )
            elif len(vec) != d:
                raise ParseError(
                    f"{path}:{lineno}: inconsistent dimension {len(vec)}, expected {d}"
                )
            if token in seen:
                duplicates += 1
                continue
            seen.add(token)
            words.append(token)
            rows.append(vec)
    if not rows:
        raise ParseError(f"{path}: empty embedding file")
    if duplicates:
        warnings.warn(f"{path}: skipped {duplicates} duplicate token(s)", stacklevel=2)
    return Embedding(words, np.array(rows, dtype=np.float64))


def save_embedding(e: Embedding, path: str | Path) -> None:
    """Write the text format, no header, 17 significant digits per value."""
    for w in e.words:
        if any(ch.isspace() for ch in w):
            raise ValueError(f"token {w!r} contains whitespace and cannot be serialized")
    with open(path, "w", encoding="utf-8") as fh:
        for word, row in zip(e.words, e.vectors):
            fh.write(word)
            for v in row:
                fh.write(f" {v:.17g}")
            fh.write("\n")


def load_similarity_testset(path: str | Path) -> SimilarityTestSet:
    """Lines of "word1 word2 score" (tabs or spaces); '#' comment lines skipped."""
    path = Path(path)
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.startswith("#"):
                continue
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 3:
                raise ParseError(
                    f"{path}:{lineno}: expected 'word1 word2 score', got {len(fields)} fields"
                )
            try:
                score = float(fields[2])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad score {fields[2]!r}") from None
            if not np.isfinite(score):
                raise ParseError(f"{path}:{lineno}: non-finite score")
            pairs.append((fields[0], fields[1], score))
    if not pairs:
        raise ParseError(f"{path}: no word pairs found")
    return SimilarityTestSet(pairs=tuple(pairs))


def load_analogy_testset(path: str | Path) -> AnalogyTestSet:
    """Google analogy format: ': section' headers skipped, else 4 tokens per line."""
    path = Path(path)
    quads = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.startswith(": "):
                continue
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 4:
                raise ParseError(
                    f"{path}:{lineno}: expected 4 tokens, got {len(fields)}"
                )
            quads.append(tuple(fields))
    if not quads:
        raise ParseError(f"{path}: no analogies found")
    return AnalogyTestSet(quads=tuple(quads))


def load_lexicon(path: str | Path) -> Lexicon:
    """Lines of "source<TAB>target"; duplicate sources keep the first entry."""
    path = Path(path)
    entries = []
    seen: set[str] = set()
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.startswith("#"):
                continue
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 2:
                raise ParseError(
                    f"{path}:{lineno}: expected 'source<TAB>target', got {len(fields)} fields"
                )
            src, tgt = fields
            if src in seen:
                duplicates += 1
                continue
            seen.add(src)
            entries.append((src, tgt))
    if not entries:
        raise ParseError(f"{path}: no lexicon entries found")
    if duplicates:
        warnings.warn(f"{path}: skipped {duplicates} duplicate source word(s)", stacklevel=2)
    return Lexicon(entries=tuple(entries))


def write_report(report: EvalReport, path: str | Path) -> None:
    """Serialize an evaluation report as JSON (sorted keys, so byte-stable)."""
    if not report.values:
        raise ValueError("refusing to write an empty report")
    payload = report.to_dict()
    payload["version"] = __version__
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
