"""Evaluation harness: noise calibration, similarity and analogy transfer,
translation precision, and ensemble averaging over aligned embeddings.

Test-set tokens are lowercased by default before vocabulary lookup; items
with any out-of-vocabulary token are skipped and counted, never guessed.
All procedures are deterministic given their seed.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .embedding import Embedding, intersect_vocab
from .geometry import align_rotation, apply_transform, normalize_rows
from .metrics import knn, rmse, spearman


@dataclass(frozen=True)
class SimilarityTestSet:
    """Scored word pairs: (word1, word2, human_score)."""

    pairs: tuple[tuple[str, str, float], ...]

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("similarity test set is empty")
        for w1, w2, score in self.pairs:
            if not np.isfinite(score):
                raise ValueError(f"non-finite score for pair ({w1!r}, {w2!r})")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class AnalogyTestSet:
    """Word quadruples (a, b, c, d) read as "a is to b as c is to d"."""

    quads: tuple[tuple[str, str, str, str], ...]

    def __post_init__(self):
        if not self.quads:
            raise ValueError("analogy test set is empty")
        for quad in self.quads:
            if len(set(quad)) == 1:
                raise ValueError(f"degenerate analogy {quad!r}: all tokens identical")

    def __len__(self) -> int:
        return len(self.quads)


@dataclass(frozen=True)
class Lexicon:
    """Bilingual entries (source_word, target_word), unique source words."""

    entries: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("lexicon is empty")
        sources = [s for s, _ in self.entries]
        if len(set(sources)) != len(sources):
            raise ValueError("lexicon has duplicate source words")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class EvalReport:
    """Structured metric results plus evaluated/skipped counts and the
    configuration that produced them."""

    metric: str
    values: dict
    evaluated: int
    skipped: int
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.evaluated < 0 or self.skipped < 0:
            raise ValueError("counts must be non-negative")

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "values": dict(self.values),
            "evaluated": self.evaluated,
            "skipped": self.skipped,
            "config": dict(self.config),
        }


def _fold(token: str, lowercase: bool) -> str:
    return token.lower() if lowercase else token


def _ks_list(k) -> list[int]:
    ks = [int(k)] if np.isscalar(k) else [int(x) for x in k]
    if not ks or any(x < 1 for x in ks):
        raise ValueError(f"k values must be positive integers, got {ks}")
    return sorted(set(ks))


def eval_similarity(test: SimilarityTestSet, a: Embedding, b: Embedding,
                    normalized: bool = False, lowercase: bool = True) -> EvalReport:
    """Spearman correlation of cross-embedding cosines against human scores.

    For each pair (w1, w2) with w1 in a's vocabulary and w2 in b's, the
    model similarity is cos(a[w1], b[w2]); pairs with an OOV word are
    skipped and counted. Pass b = a for within-embedding evaluation.
    """
    if normalized:
        a = normalize_rows(a)
        b = normalize_rows(b)
    human, model = [], []
    skipped = 0
    for w1, w2, score in test.pairs:
        w1, w2 = _fold(w1, lowercase), _fold(w2, lowercase)
        if w1 not in a or w2 not in b:
            skipped += 1
            continue
        va = a.vector(w1)
        vb = b.vector(w2)
        denom = np.linalg.norm(va) * np.linalg.norm(vb)
        if denom == 0:
            skipped += 1
            continue
        human.append(score)
        model.append(float(va @ vb / denom))
    if len(human) < 2:
        raise ValueError(f"only {len(human)} evaluable pairs, need at least 2")
    rho = spearman(human, model)
    return EvalReport(
        metric="similarity_spearman",
        values={"spearman": rho},
        evaluated=len(human),
        skipped=skipped,
        config={"normalized": normalized, "lowercase": lowercase},
    )


def eval_analogy(test: AnalogyTestSet, a: Embedding, b: Embedding, k=1,
                 normalized: bool = False, lowercase: bool = True) -> EvalReport:
    """Accuracy of analogy transfer from embedding b into embedding a.

    For a quad (wa, wb, wc, wd) the query is b[wc] + (b[wb] - b[wa]); the
    quad is a hit at k if wd is among the k nearest words of the query in
    a (cosine metric, wa/wb/wc excluded from the candidates). Quads with
    any OOV token are skipped.
    """
    ks = _ks_list(k)
    kmax = ks[-1]
    if normalized:
        a = normalize_rows(a)
        b = normalize_rows(b)
    hits = {kk: 0 for kk in ks}
    evaluated = 0
    skipped = 0
    for quad in test.quads:
        wa, wb, wc, wd = (_fold(w, lowercase) for w in quad)
        if wa not in b or wb not in b or wc not in b or wd not in a:
            skipped += 1
            continue
        query = b.vector(wc) + (b.vector(wb) - b.vector(wa))
        if not np.any(query):
            skipped += 1
            continue
        found = knn(a, query, kmax, metric="cosine",
                    exclude={wa, wb, wc}, query_word=wc).tokens()
        evaluated += 1
        for kk in ks:
            if wd in found[:kk]:
                hits[kk] += 1
    if evaluated == 0:
        raise ValueError("no evaluable analogy quads")
    return EvalReport(
        metric="analogy_accuracy",
        values={f"acc@{kk}": hits[kk] / evaluated for kk in ks},
        evaluated=evaluated,
        skipped=skipped,
        config={"k": ks, "normalized": normalized, "lowercase": lowercase},
    )


def eval_translation(lex: Lexicon, source: Embedding, target: Embedding,
                     ks: Sequence[int] = (1, 5, 10),
                     lowercase: bool = True) -> EvalReport:
    """Precision at k of translation retrieval after alignment.

    The source embedding must already live in the target's coordinate
    space. An entry (s, t) is a hit at k when t is among the k nearest
    target words of source[s] under cosine similarity.
    """
    ks = _ks_list(ks)
    hits, evaluated, skipped = _translation_hits(
        lex.entries, source, target, ks, lowercase)
    if evaluated == 0:
        raise ValueError("no evaluable lexicon entries")
    return EvalReport(
        metric="translation_precision",
        values={f"p@{kk}": hits[kk] / evaluated for kk in ks},
        evaluated=evaluated,
        skipped=skipped,
        config={"k": ks, "lowercase": lowercase},
    )


def _translation_hits(entries, source: Embedding, search: Embedding,
                      ks: list[int], lowercase: bool, exclude_self: bool = False):
    kmax = ks[-1]
    hits = {kk: 0 for kk in ks}
    evaluated = 0
    skipped = 0
    for s, t in entries:
        s, t = _fold(s, lowercase), _fold(t, lowercase)
        if s not in source or t not in search:
            skipped += 1
            continue
        query = source.vector(s)
        if not np.any(query):
            skipped += 1
            continue
        # a word should not retrieve itself, unless it is its own translation
        exclude = {s} - {t} if exclude_self else set()
        found = knn(search, query, kmax, metric="cosine",
                    exclude=exclude, query_word=s).tokens()
        evaluated += 1
        for kk in ks:
            if t in found[:kk]:
                hits[kk] += 1
    return hits, evaluated, skipped


def gaussian_noise_calibration(e: Embedding, sigmas: Sequence[float],
                               fraction: float = 1.0,
                               seed: int = 0) -> list[tuple[float, float, float]]:
    """RMSE after perturbing rows with Gaussian noise and refitting a rotation.

    For each sigma, a fixed random subset of floor(fraction * n) rows gets
    i.i.d. N(0, sigma^2) noise per coordinate; a rotation is refitted onto
    the clean embedding and the residual RMSE recorded. The perturbed rows
    and the unit noise direction are drawn once from the seed, so the curve
    over sigmas is smooth and the whole procedure is deterministic.

    Returns a list of (sigma, fraction, rmse) in the order given.
    """
    sigmas = [float(s) for s in sigmas]
    if any(s < 0 for s in sigmas):
        raise ValueError("sigma must be non-negative")
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    m = int(fraction * e.n)
    if m < 1:
        raise ValueError(f"fraction {fraction} selects no rows out of {e.n}")
    rng = np.random.default_rng(seed)
    rows = rng.choice(e.n, size=m, replace=False)
    unit_noise = rng.standard_normal((m, e.d))
    results = []
    for sigma in sigmas:
        noisy = np.array(e.vectors)
        noisy[rows] += sigma * unit_noise
        _, aligned = align_rotation(e.vectors, noisy)
        results.append((sigma, fraction, rmse(e.vectors, aligned)))
    return results


def ensemble_average(a: Embedding, b: Embedding) -> Embedding:
    """Element-wise mean of corresponding word vectors from two aligned embeddings.

    The output vocabulary is the intersection, ordered by a. The inputs
    must already share a coordinate space; no renormalization is applied.
    """
    pair = intersect_vocab(a, b)
    mean = (pair.a.vectors + pair.b.vectors) / 2.0
    if np.any(~mean.any(axis=1)):
        warnings.warn("ensemble average produced all-zero rows", stacklevel=2)
    return Embedding(pair.a.words, mean)


def crossval_translation(lex: Lexicon, source: Embedding, target: Embedding,
                         holdout_fraction: float = 0.2,
                         ks: Sequence[int] = (1, 5, 10), seed: int = 0,
                         lowercase: bool = True) -> EvalReport:
    """Translation precision on held-out lexicon entries.

    Splits the lexicon by seed, fits a rotation on the training pairs'
    vectors, maps the whole source embedding through it, and searches the
    combined vocabulary (target words plus mapped source words; a query
    never retrieves itself unless it is its own translation). Reports
    held-out precision as "p@k" and training precision as "train_p@k".
    """
    ks = _ks_list(ks)
    if not 0 < holdout_fraction < 1:
        raise ValueError(f"holdout_fraction must be in (0, 1), got {holdout_fraction}")
    entries = list(lex.entries)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(entries))
    n_test = int(round(holdout_fraction * len(entries)))
    if n_test < 1 or n_test >= len(entries):
        raise ValueError(
            f"holdout_fraction {holdout_fraction} leaves an empty split "
            f"for {len(entries)} entries"
        )
    test_entries = [entries[i] for i in order[:n_test]]
    train_entries = [entries[i] for i in order[n_test:]]

    train_src, train_tgt = [], []
    for s, t in train_entries:
        s, t = _fold(s, lowercase), _fold(t, lowercase)
        if s in source and t in target:
            train_src.append(source.vector(s))
            train_tgt.append(target.vector(t))
    if not train_src:
        raise ValueError("no training pairs found in both vocabularies")
    if len(train_src) < source.d:
        warnings.warn(
            f"only {len(train_src)} training pairs for d={source.d}; "
            "the fitted rotation may be underdetermined", stacklevel=2)
    transform, _ = align_rotation(np.array(train_tgt), np.array(train_src))
    mapped = apply_transform(source, transform)

    # combined search space: all target words plus mapped source words;
    # on a token collision the target row wins
    extra = [w for w in mapped.words if w not in target]
    if len(extra) < mapped.n:
        warnings.warn(
            f"{mapped.n - len(extra)} source token(s) collide with target "
            "vocabulary; target rows kept", stacklevel=2)
    if extra:
        combined = Embedding(
            target.words + tuple(extra),
            np.concatenate([target.vectors, mapped.subset(extra).vectors]),
        )
    else:
        combined = target

    test_hits, test_eval, test_skip = _translation_hits(
        test_entries, mapped, combined, ks, lowercase, exclude_self=True)
    train_hits, train_eval, train_skip = _translation_hits(
        train_entries, mapped, combined, ks, lowercase, exclude_self=True)
    if test_eval == 0 or train_eval == 0:
        raise ValueError("empty evaluable train or test split")
    values = {f"p@{kk}": test_hits[kk] / test_eval for kk in ks}
    values.update({f"train_p@{kk}": train_hits[kk] / train_eval for kk in ks})
    return EvalReport(
        metric="translation_precision_crossval",
        values=values,
        evaluated=test_eval + train_eval,
        skipped=test_skip + train_skip,
        config={
            "k": ks, "holdout_fraction": holdout_fraction, "seed": seed,
            "lowercase": lowercase, "train_size": train_eval, "test_size": test_eval,
        },
    )
