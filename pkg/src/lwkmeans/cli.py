"""Command-line front end: ``cluster``, ``regpath``, ``gen``, ``eval`` and ``rerun``.

Errors are reported on stderr as one JSON line
``{"error": <code>, "message": <text>, "exit": <status>}``. Exit status is
0 on success, 1 for invalid arguments, 2 for file problems and 3 when the data
(or the fitted weights) are degenerate.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path


from . import __version__
from .baselines import SparseKmConfig, fit_kmeans_multi, fit_sparse_kmeans_multi, fit_wkmeans_multi
from .core import DegenerateDataError, LwkConfig, LwkError, standardize
from .datagen import SCHEMES, gen_example2, gen_mixture, load_genspec
from .io import (DataIOError, load_csv, load_labels, load_relevance, read_json, write_json,
                 write_labels, write_matrix, write_path_csv, write_relevance, write_summary_csv,
                 write_weights)
from .lwk import ALPHA_METHODS, fit_multi
from .metrics import cer, mcc, relevance_from_weights
from .regpath import auto_grid, select_lambda_plateau, sweep

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_DEGENERATE = 0, 1, 2, 3
ALGORITHMS = ("lwk", "kmeans", "wkmeans", "sparse")

# Arguments that only name output locations; everything else goes in the manifest.
# n_jobs is left out too: it only changes speed.
_OUTPUT_ARGS = ("out_dir", "n_jobs")


class UsageError(LwkError, ValueError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _add_data_args(p):
    p.add_argument("input", help="data CSV")
    p.add_argument("--header", choices=("auto", "yes", "no"), default="auto")
    p.add_argument("--labels", dest="label_column", default=None,
                   help="column with true labels (name or 0-based index); removed from the features")
    p.add_argument("--truth", default=None, help="labels CSV with the true partition")
    p.add_argument("--relevance", default=None, help="relevance CSV with the true informative features")
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out-dir", default=".", help="directory for the output files")


def _add_fit_args(p):
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--beta", type=int, default=4)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--alpha-method", choices=ALPHA_METHODS, default="exact")
    p.add_argument("--n-jobs", type=int, default=None,
                   help="worker threads (default: $LWK_N_JOBS or 1); never changes results")


def build_parser():
    parser = _Parser(prog="lwkmeans", description="Lasso-weighted k-means clustering.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cluster", help="fit one clustering algorithm")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--algo", choices=ALGORITHMS, default="lwk")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--s", type=float, default=None, help="l1 bound for sparse k-means")

    p = sub.add_parser("regpath", help="sweep lambda and aggregate restart weights")
    _add_data_args(p)
    _add_fit_args(p)
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--lambdas", type=_float_list, help="comma separated lambda values")
    grid.add_argument("--grid", choices=("auto",))
    p.add_argument("--n-lambdas", type=_positive_int, default=30)

    p = sub.add_parser("gen", help="write a synthetic dataset")
    p.add_argument("--scheme", required=True, choices=(*SCHEMES, "mixture"))
    p.add_argument("--spec-file", default=None, help="mixture spec JSON (with --scheme mixture)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-noise", type=int, default=None, help="noise features for example2")
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("eval", help="compare two partitions (and relevance vectors)")
    p.add_argument("labels_a")
    p.add_argument("labels_b")
    p.add_argument("--relevance-a", default=None)
    p.add_argument("--relevance-b", default=None)
    p.add_argument("--cer-method", choices=("matching", "pairwise"), default="matching")

    p = sub.add_parser("rerun", help="repeat a run recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir", default=None, help="defaults to the manifest's own output directory")
    p.add_argument("--n-jobs", type=int, default=None)
    return parser


def _load(args):
    has_header = {"auto": None, "yes": True, "no": False}[args.header]
    data, labels, _ = load_csv(args.input, has_header=has_header, label_column=args.label_column)
    if args.truth is not None:
        labels = load_labels(args.truth)
        if len(labels) != data.n:
            raise DataIOError(f"{args.truth}: {len(labels)} labels for {data.n} rows")
    relevance = None
    if args.relevance is not None:
        relevance = load_relevance(args.relevance)
        if relevance.shape[0] != data.p:
            raise DataIOError(f"{args.relevance}: {relevance.shape[0]} flags for {data.p} features")
    if args.standardize:
        data = standardize(data)
    return data, labels, relevance


def _manifest(command, args, **extra):
    params = {k: v for k, v in vars(args).items() if k not in _OUTPUT_ARGS and k != "command"}
    for key in ("input", "truth", "relevance", "spec_file"):
        if params.get(key) is not None:
            params[key] = str(Path(params[key]).resolve())
    payload = {"command": command, "version": __version__, "params": params,
               "out_dir": str(Path(args.out_dir).resolve())}
    payload.update(extra)
    return payload


def _fit(args, data):
    if args.algo == "lwk":
        cfg = LwkConfig(k=args.k, lam=args.lam, beta=args.beta, alpha=args.alpha,
                        epsilon=args.epsilon, max_iter=args.max_iter, seed=args.seed,
                        n_restarts=args.restarts, alpha_method=args.alpha_method)
        return fit_multi(data, cfg, n_jobs=args.n_jobs)
    if args.algo == "kmeans":
        return fit_kmeans_multi(data, args.k, args.epsilon, args.max_iter, args.seed,
                                args.restarts, n_jobs=args.n_jobs)
    if args.algo == "wkmeans":
        return fit_wkmeans_multi(data, args.k, args.beta, args.epsilon, args.max_iter, args.seed,
                                 args.restarts, n_jobs=args.n_jobs)
    if args.s is None:
        raise UsageError("--algo sparse needs --s")
    cfg = SparseKmConfig(k=args.k, s=args.s, max_iter=args.max_iter, epsilon=args.epsilon,
                         seed=args.seed, n_restarts=args.restarts)
    return fit_sparse_kmeans_multi(data, cfg, n_jobs=args.n_jobs)


def cmd_cluster(args):
    start = time.perf_counter()
    data, truth, relevance = _load(args)
    best, _ = _fit(args, data)
    out = Path(args.out_dir)
    outputs = {"labels": str(write_labels(out / "labels.csv", best.labels)),
               "weights": str(write_weights(out / "weights.csv", best.weights.weights))}
    metrics = {}
    if truth is not None:
        metrics["cer"] = cer(best.assignment, truth)
    if relevance is not None:
        metrics["mcc"] = mcc(relevance, relevance_from_weights(best.weights).bits)
    if metrics:
        outputs["metrics"] = str(write_json(out / "metrics.json", metrics))
    manifest = _manifest(
        "cluster", args, outputs=outputs, alpha=best.alpha_used, objective=best.objective,
        iterations=best.iterations, converged=best.converged, degenerate=best.degenerate,
        wall_time=time.perf_counter() - start)
    write_json(out / "manifest.json", manifest)
    if best.degenerate:
        raise DegenerateDataError("every feature weight is zero; lower --lambda")
    return EXIT_OK


def cmd_regpath(args):
    start = time.perf_counter()
    data, truth, _ = _load(args)
    cfg = LwkConfig(k=args.k, beta=args.beta, alpha=args.alpha, epsilon=args.epsilon,
                    max_iter=args.max_iter, seed=args.seed, n_restarts=args.restarts,
                    alpha_method=args.alpha_method)
    if args.lambdas is not None:
        lambdas = args.lambdas
    else:
        lambdas = auto_grid(data, cfg, n_points=args.n_lambdas)
    path = sweep(data, cfg, lambdas, truth=truth, n_jobs=args.n_jobs)
    out = Path(args.out_dir)
    outputs = {"path": str(write_path_csv(out / "path.csv", path)),
               "summary": str(write_summary_csv(out / "summary.csv", path))}
    plateau = select_lambda_plateau(path)
    plateau_info = None if plateau is None else {
        "lambda_high": plateau.lam_high, "lambda_low": plateau.lam_low,
        "n_features": plateau.n_features, "recommended": plateau.recommended}
    manifest = _manifest("regpath", args, outputs=outputs, lambdas=[float(l) for l in lambdas],
                         plateau=plateau_info, wall_time=time.perf_counter() - start)
    write_json(out / "manifest.json", manifest)
    return EXIT_OK


def cmd_gen(args):
    if args.scheme == "mixture":
        if args.spec_file is None:
            raise UsageError("--scheme mixture needs --spec-file")
        data, labels, relevance = gen_mixture(load_genspec(args.spec_file, seed=args.seed))
    elif args.scheme == "example2" and args.p_noise is not None:
        data, labels, relevance = gen_example2(args.seed, p_noise=args.p_noise)
    else:
        data, labels, relevance = SCHEMES[args.scheme](args.seed)
    out = Path(args.out_dir)
    outputs = {"data": str(write_matrix(out / "data.csv", data.values)),
               "labels": str(write_labels(out / "truth_labels.csv", labels.labels)),
               "relevance": str(write_relevance(out / "truth_relevance.csv", relevance.bits))}
    write_json(out / "manifest.json", _manifest("gen", args, outputs=outputs))
    return EXIT_OK


def cmd_eval(args):
    a, b = load_labels(args.labels_a), load_labels(args.labels_b)
    result = {"cer": cer(a, b, method=args.cer_method)}
    if (args.relevance_a is None) != (args.relevance_b is None):
        raise UsageError("give both --relevance-a and --relevance-b or neither")
    if args.relevance_a is not None:
        result["mcc"] = mcc(load_relevance(args.relevance_a), load_relevance(args.relevance_b))
    print(json.dumps(result, sort_keys=True))
    return EXIT_OK


COMMANDS = {"cluster": cmd_cluster, "regpath": cmd_regpath, "gen": cmd_gen, "eval": cmd_eval}


def cmd_rerun(args):
    manifest = read_json(args.manifest)
    command = manifest.get("command")
    if command not in ("cluster", "regpath", "gen"):
        raise UsageError(f"{args.manifest}: cannot rerun command {command!r}")
    params = dict(manifest["params"])
    params["out_dir"] = args.out_dir if args.out_dir is not None else manifest["out_dir"]
    if command != "gen":
        params["n_jobs"] = args.n_jobs
    return COMMANDS[command](argparse.Namespace(command=command, **params))


COMMANDS["rerun"] = cmd_rerun


def _exit_code(exc):
    if isinstance(exc, DegenerateDataError):
        return EXIT_DEGENERATE
    if isinstance(exc, (DataIOError, OSError)):
        return EXIT_IO
    return EXIT_INVALID


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (LwkError, ValueError, OSError) as exc:
        status = _exit_code(exc)
        code = getattr(exc, "code", None) or type(exc).__name__
        print(json.dumps({"error": code, "message": str(exc), "exit": status}), file=sys.stderr)
        return status


if __name__ == "__main__":
    sys.exit(main())
