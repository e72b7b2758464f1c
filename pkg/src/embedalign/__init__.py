"""embedalign: closed-form alignment and evaluation of vector embeddings.

Aligns two d-dimensional embeddings over a shared vocabulary with the
optimal rotation, and optionally centering and uniform scaling, all in
closed form via the SVD of the cross-covariance matrix. Ships metrics,
an evaluation harness (noise calibration, similarity/analogy transfer,
translation, ensembles), a gradient-descent affine baseline, text I/O,
scikit-learn style estimators, and a CLI.

Submodules are imported lazily so the CLI can configure threading before
numpy loads.
"""
from ._version import __version__

_EXPORTS = {
    # embedding
    "Embedding": "embedding",
    "AlignedPair": "embedding",
    "intersect_vocab": "embedding",
    # geometry
    "Transform": "geometry",
    "SvdResult": "geometry",
    "cross_covariance": "geometry",
    "jacobi_svd": "geometry",
    "rotation_from_svd": "geometry",
    "optimal_scale": "geometry",
    "align_rotation": "geometry",
    "align_centered": "geometry",
    "align_scaling": "geometry",
    "align_centered_scaling": "geometry",
    "absolute_orientation": "geometry",
    "normalize_rows": "geometry",
    "apply_transform": "geometry",
    # metrics
    "NeighborList": "metrics",
    "rmse": "metrics",
    "avg_cosine": "metrics",
    "spearman": "metrics",
    "knn": "metrics",
    # evaluation
    "SimilarityTestSet": "evaluation",
    "AnalogyTestSet": "evaluation",
    "Lexicon": "evaluation",
    "EvalReport": "evaluation",
    "eval_similarity": "evaluation",
    "eval_analogy": "evaluation",
    "eval_translation": "evaluation",
    "gaussian_noise_calibration": "evaluation",
    "ensemble_average": "evaluation",
    "crossval_translation": "evaluation",
    # baselines
    "AffineTransform": "baselines",
    "fit_affine": "baselines",
    "ridge_solution": "baselines",
    "apply_affine": "baselines",
    # estimators
    "ProcrustesAligner": "aligner",
    "AffineAligner": "aligner",
    # io
    "EmbeddingFileSpec": "io",
    "load_embedding": "io",
    "save_embedding": "io",
    "load_similarity_testset": "io",
    "load_analogy_testset": "io",
    "load_lexicon": "io",
    "write_report": "io",
    # errors
    "ParseError": "errors",
    "NumericError": "errors",
}

__all__ = ["__version__", *sorted(_EXPORTS)]


def __getattr__(name):
    module = _EXPORTS.get(name)
    if module is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    import importlib

    value = getattr(importlib.import_module(f".{module}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return __all__
