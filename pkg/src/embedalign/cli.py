"""Command-line interface.

Subcommands: align, calibrate, eval, translate, ensemble, info. All
randomness flows from --seed (default 0), and --threads=1 pins the linear
algebra backend to one thread so repeated runs are byte-identical.

Exit codes: 0 success, 1 usage error, 2 I/O or parse error, 3 numeric or
data error.

Heavy imports happen inside the command functions so --threads can cap the
BLAS thread pools before numpy is loaded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

DEFAULT_SEED = 0
VARIANTS = ("rotation", "centered", "scaling", "centered+scaling", "affine")

_THREAD_ENV_VARS = (
    "OPENBLAS_NUM_THREADS",
    "OMP_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _apply_thread_cap(argv: list[str]) -> None:
    """Honor --threads before numpy is imported; one thread means reproducible."""
    threads = None
    for i, arg in enumerate(argv):
        if arg == "--threads" and i + 1 < len(argv):
            threads = argv[i + 1]
        elif arg.startswith("--threads="):
            threads = arg.split("=", 1)[1]
    if threads is None:
        return
    try:
        n = int(threads)
    except ValueError:
        return  # argparse reports this later
    if n < 1:
        return
    if "numpy" in sys.modules:
        return  # too late to cap the pools for this process
    for var in _THREAD_ENV_VARS:
        os.environ[var] = str(n)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="embedalign",
        description="Closed-form alignment and evaluation of word embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--threads", type=int, default=None, metavar="N",
                       help="cap worker threads; 1 guarantees bit-reproducible output")
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                           help=f"random seed (default {DEFAULT_SEED})")

    p = sub.add_parser("align", help="align a source embedding onto a target embedding")
    p.add_argument("source", help="embedding to transform")
    p.add_argument("target", help="embedding defining the output space")
    p.add_argument("--variant", choices=VARIANTS, default="rotation",
                   help="alignment family (default: rotation)")
    p.add_argument("--proper", action="store_true",
                   help="force det(R) = +1 (no reflections)")
    p.add_argument("--normalized", action="store_true",
                   help="fit on row-normalized copies of the shared vocabulary")
    p.add_argument("--gamma", type=float, default=1.0,
                   help="regularization weight for --variant affine (default 1.0)")
    p.add_argument("--out", required=True, help="path for the transformed source embedding")
    p.add_argument("--report", default=None,
                   help="path for the JSON summary (default: <out>.report.json)")
    common(p, seed=False)

    p = sub.add_parser("calibrate", help="RMSE after Gaussian noise and realignment")
    p.add_argument("embedding")
    p.add_argument("--sigma", type=float, action="append", default=None,
                   help="noise standard deviation, repeatable (default 0 0.1 0.2 0.3)")
    p.add_argument("--fraction", type=float, action="append", default=None,
                   help="fraction of rows perturbed, repeatable (default 1.0)")
    p.add_argument("--out", required=True, help="CSV output path")
    common(p)

    p = sub.add_parser("eval", help="similarity or analogy transfer across aligned embeddings")
    p.add_argument("search", help="embedding searched for answers (target space)")
    p.add_argument("aligned", help="embedding already aligned into the search space")
    p.add_argument("--testset", required=True)
    p.add_argument("--kind", choices=("sim", "analogy"), required=True)
    p.add_argument("--k", type=int, action="append", default=None,
                   help="analogy cutoff, repeatable (default 1)")
    p.add_argument("--normalized", action="store_true",
                   help="evaluate on row-normalized vectors")
    p.add_argument("--no-lowercase", dest="lowercase", action="store_false",
                   help="do not lowercase test-set tokens")
    p.add_argument("--out", required=True, help="JSON report path")
    common(p, seed=False)

    p = sub.add_parser("translate", help="cross-validated translation precision")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--holdout", type=float, default=0.2,
                   help="held-out fraction of the lexicon (default 0.2)")
    p.add_argument("--k", type=int, action="append", default=None,
                   help="precision cutoff, repeatable (default 1 5 10)")
    p.add_argument("--no-lowercase", dest="lowercase", action="store_false")
    p.add_argument("--out", required=True, help="JSON report path")
    common(p)

    p = sub.add_parser("ensemble", help="align two embeddings and average them")
    p.add_argument("a", help="embedding kept as the coordinate frame")
    p.add_argument("b", help="embedding aligned onto a before averaging")
    p.add_argument("--variant", choices=VARIANTS[:-1], default="scaling",
                   help="alignment used before averaging (default: scaling)")
    p.add_argument("--proper", action="store_true")
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--out", required=True, help="path for the ensemble embedding")
    common(p, seed=False)

    p = sub.add_parser("info", help="print embedding statistics as JSON")
    p.add_argument("embedding")
    common(p, seed=False)

    return parser


def _variant_flags(variant: str) -> tuple[bool, bool]:
    return ("centered" in variant, "scaling" in variant)


def _dump_json(payload: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_align(args) -> int:
    import numpy as np

    from ._version import __version__
    from .aligner import AffineAligner, ProcrustesAligner
    from .io import intersect_vocab, load_embedding, save_embedding
    from .metrics import avg_cosine, rmse

    source = load_embedding(args.source)
    target = load_embedding(args.target)
    pair = intersect_vocab(source, target)
    x, y = pair.a.vectors, pair.b.vectors

    summary = {
        "source": args.source,
        "target": args.target,
        "variant": args.variant,
        "proper": args.proper,
        "normalized": args.normalized,
        "shared_words": pair.a.n,
        "dropped_source": pair.dropped_a,
        "dropped_target": pair.dropped_b,
        "rmse_before": rmse(y, x),
        "avg_cosine_before": avg_cosine(y, x),
        "version": __version__,
    }
    if args.variant == "affine":
        est = AffineAligner(gamma=args.gamma).fit(x, y)
        aligned_all = est.transform(source.vectors)
        summary.update({
            "gamma": args.gamma,
            "iterations_run": est.n_iter_,
            "final_objective": est.objective_,
            "matrix_det": float(np.linalg.det(est.matrix_)),
        })
    else:
        center, scale = _variant_flags(args.variant)
        est = ProcrustesAligner(center=center, scale=scale, proper=args.proper,
                                normalize=args.normalized).fit(x, y)
        aligned_all = est.transform(source.vectors)
        summary.update({
            "scale": est.scale_,
            "rotation_det": float(np.linalg.det(est.rotation_)),
            "warnings": list(est.transform_.warnings),
        })
    summary["rmse_after"] = rmse(y, est.transform(x))
    summary["avg_cosine_after"] = avg_cosine(y, est.transform(x))

    save_embedding(source.with_vectors(aligned_all), args.out)
    report_path = args.report or args.out + ".report.json"
    _dump_json(summary, report_path)
    print(f"aligned {source.n} words (shared {pair.a.n}); "
          f"rmse {summary['rmse_before']:.6g} -> {summary['rmse_after']:.6g}")
    print(f"wrote {args.out} and {report_path}")
    return 0


def _cmd_calibrate(args) -> int:
    from .evaluation import gaussian_noise_calibration
    from .io import load_embedding

    sigmas = args.sigma if args.sigma is not None else [0.0, 0.1, 0.2, 0.3]
    fractions = args.fraction if args.fraction is not None else [1.0]
    e = load_embedding(args.embedding)
    rows = []
    for fraction in fractions:
        rows.extend(gaussian_noise_calibration(e, sigmas, fraction=fraction,
                                               seed=args.seed))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("sigma,fraction,rmse\n")
        for sigma, fraction, value in rows:
            fh.write(f"{sigma:.17g},{fraction:.17g},{value:.17g}\n")
    print(f"wrote {len(rows)} calibration rows to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    from .evaluation import eval_analogy, eval_similarity
    from .io import (load_analogy_testset, load_embedding,
                     load_similarity_testset, write_report)

    search = load_embedding(args.search)
    aligned = load_embedding(args.aligned)
    if args.kind == "sim":
        test = load_similarity_testset(args.testset)
        report = eval_similarity(test, search, aligned,
                                 normalized=args.normalized,
                                 lowercase=args.lowercase)
    else:
        ks = args.k if args.k is not None else [1]
        test = load_analogy_testset(args.testset)
        report = eval_analogy(test, search, aligned, k=ks,
                              normalized=args.normalized,
                              lowercase=args.lowercase)
    report.config.update({"search": args.search, "aligned": args.aligned,
                          "testset": args.testset, "kind": args.kind})
    write_report(report, args.out)
    values = " ".join(f"{k}={v:.4f}" for k, v in sorted(report.values.items()))
    print(f"{report.metric}: {values} (evaluated {report.evaluated}, "
          f"skipped {report.skipped})")
    return 0


def _cmd_translate(args) -> int:
    from .evaluation import crossval_translation
    from .io import load_embedding, load_lexicon, write_report

    source = load_embedding(args.source)
    target = load_embedding(args.target)
    lexicon = load_lexicon(args.lexicon)
    ks = args.k if args.k is not None else [1, 5, 10]
    report = crossval_translation(lexicon, source, target,
                                  holdout_fraction=args.holdout, ks=ks,
                                  seed=args.seed, lowercase=args.lowercase)
    report.config.update({"source": args.source, "target": args.target,
                          "lexicon": args.lexicon})
    write_report(report, args.out)
    values = " ".join(f"{k}={v:.4f}" for k, v in sorted(report.values.items()))
    print(f"{report.metric}: {values} (evaluated {report.evaluated}, "
          f"skipped {report.skipped})")
    return 0


def _cmd_ensemble(args) -> int:
    from .aligner import ProcrustesAligner
    from .evaluation import ensemble_average
    from .io import intersect_vocab, load_embedding, save_embedding

    a = load_embedding(args.a)
    b = load_embedding(args.b)
    pair = intersect_vocab(a, b)
    center, scale = _variant_flags(args.variant)
    est = ProcrustesAligner(center=center, scale=scale, proper=args.proper,
                            normalize=args.normalized)
    est.fit(pair.b.vectors, pair.a.vectors)
    b_aligned = b.with_vectors(est.transform(b.vectors))
    combined = ensemble_average(a, b_aligned)
    save_embedding(combined, args.out)
    print(f"wrote ensemble of {combined.n} shared words to {args.out}")
    return 0


def _cmd_info(args) -> int:
    import numpy as np

    from ._version import __version__
    from .io import load_embedding

    e = load_embedding(args.embedding)
    norms = np.linalg.norm(e.vectors, axis=1)
    payload = {
        "path": args.embedding,
        "words": e.n,
        "dimension": e.d,
        "norm_min": float(norms.min()),
        "norm_mean": float(norms.mean()),
        "norm_max": float(norms.max()),
        "first_words": list(e.words[:5]),
        "version": __version__,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


_COMMANDS = {
    "align": _cmd_align,
    "calibrate": _cmd_calibrate,
    "eval": _cmd_eval,
    "translate": _cmd_translate,
    "ensemble": _cmd_ensemble,
    "info": _cmd_info,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    _apply_thread_cap(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    from .errors import NumericError, ParseError
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
