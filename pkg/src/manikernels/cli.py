"""Command-line front end.

Wires dataset files, kernels and the learning algorithms into
reproducible runs. Every output file carries a provenance header
(command, config, seed, library version) and is byte-identical across
invocations with the same arguments and inputs.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .data import (
    load_dataset,
    load_matrix_csv,
    save_dataset,
    save_matrix_csv,
    synth_grassmann_clusters,
    synth_spd_blobs,
)
from .errors import (
    BadParamError,
    BadShapeError,
    DimMismatchError,
    EmptySetError,
    FrameMismatchError,
    ManiKernelsError,
    NoConvergenceError,
    NonSymmetricError,
    NoPositivesError,
    NotPsdError,
    NotSpdError,
    NumericalError,
    OneClassError,
    RankDeficientError,
    RectOutOfBoundsError,
    SingularScatterError,
    TooFewPixelsError,
    TooSmallError,
    UnsupportedMetricError,
)
from .features import (
    candidate_grid,
    integral_images,
    normalize_by_full_window,
    pedestrian_feature_maps,
    read_image,
    region_covariance,
    select_subwindows,
    texture_feature_maps,
)
from .grassmann import make_grassmann, subspace_from_vectors
from .kernels import (
    KernelSpec,
    cross_gram,
    definiteness_search,
    gram_matrix,
    gram_to_csv,
    gram_to_json,
)
from .learn import (
    MulticlassSvmModel,
    SvmModel,
    kernel_fda,
    kernel_kmeans,
    kernel_pca,
    mkl_train,
    multiclass_svm_predict,
    multiclass_svm_train,
    svm_decision,
    svm_train,
)
from .spd import make_spd

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_USAGE_ERRORS = (BadParamError, UnsupportedMetricError)
_NUMERIC_ERRORS = (
    NoConvergenceError,
    NumericalError,
    NotPsdError,
    SingularScatterError,
)
_DATA_ERRORS = (
    BadShapeError,
    DimMismatchError,
    EmptySetError,
    NonSymmetricError,
    NotSpdError,
    RankDeficientError,
    OneClassError,
    NoPositivesError,
    RectOutOfBoundsError,
    TooFewPixelsError,
    TooSmallError,
    FrameMismatchError,
    OSError,
    json.JSONDecodeError,
    KeyError,
    ValueError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _provenance(command: str, args: argparse.Namespace) -> dict:
    # "out" stays out of the record so retargeting the file keeps bytes equal
    config = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command", "out")
    }
    return {
        "command": command,
        "config": {k: (list(v) if isinstance(v, (tuple,)) else v) for k, v in config.items()},
        "seed": getattr(args, "seed", None),
        "version": __version__,
    }


def _provenance_lines(prov: dict) -> list[str]:
    return [
        f"command={prov['command']}",
        "config=" + json.dumps(prov["config"], sort_keys=True),
        f"seed={prov['seed']}",
        f"version={prov['version']}",
    ]


def _write_json(path, payload) -> None:
    text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _gamma_list(text: str) -> list[float]:
    vals = [float(tok) for tok in text.split(",") if tok.strip()]
    if not vals or any(v <= 0 for v in vals):
        raise BadParamError(f"gamma grid must be positive values, got {text!r}")
    return vals


def _dataset_points(path, validate: bool = True):
    """Dataset items, labels and the manifold implied by the dataset kind."""
    ds = load_dataset(path)
    manifold = {"spd": "spd", "grassmann": "grassmann", "vectors": "euclidean"}[ds["kind"]]
    if validate:
        if ds["kind"] == "spd":
            ds["items"] = [make_spd(x) for x in ds["items"]]
        elif ds["kind"] == "grassmann":
            ds["items"] = [make_grassmann(x) for x in ds["items"]]
    return ds["items"], ds["labels"], manifold


def _metric_for(args, manifold: str) -> str:
    if manifold == "euclidean":
        return "euclidean"
    if args.metric is None:
        return {"spd": "log-euclidean", "grassmann": "projection"}[manifold]
    return args.metric


def _spec_for(args, manifold: str) -> KernelSpec:
    if getattr(args, "manifold", None):
        manifold = args.manifold
    return KernelSpec(
        manifold=manifold,
        metric=_metric_for(args, manifold),
        gamma=args.gamma,
        alpha=args.alpha,
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_definiteness(args) -> int:
    report = definiteness_search(
        args.manifold,
        args.metric,
        _gamma_list(args.gamma_grid),
        m=args.m,
        trials=args.trials,
        seed=args.seed,
        dim=args.dim,
        subspace_dim=args.subspace_dim,
        alpha=args.alpha,
    )
    payload = report.to_dict()
    payload["provenance"] = _provenance("definiteness", args)
    _write_json(args.out, payload)
    return EXIT_OK


def _cmd_gram(args) -> int:
    points, _, manifold = _dataset_points(args.input)
    spec = _spec_for(args, manifold)
    gram = gram_matrix(spec, points, audit=args.audit)
    prov = _provenance("gram", args)
    if args.out.endswith(".json"):
        gram_to_json(gram, args.out, provenance=prov)
    else:
        gram_to_csv(gram, args.out, extra_header=_provenance_lines(prov))
    return EXIT_OK


def _cmd_cluster(args) -> int:
    points, _, manifold = _dataset_points(args.input)
    spec = _spec_for(args, manifold)
    gram = gram_matrix(spec, points)
    result = kernel_kmeans(
        gram, args.k, restarts=args.restarts, max_iter=args.max_iter, seed=args.seed
    )
    header = _provenance_lines(_provenance("cluster", args))
    header.append(f"energy={result.energy!r}")
    header.append(f"restarts_used={result.restarts_used}")
    header.append("columns=index,label")
    rows = np.column_stack([np.arange(len(points)), result.labels]).astype(float)
    save_matrix_csv(args.out, rows, header_lines=header)
    return EXIT_OK


def _cmd_kpca(args) -> int:
    points, _, manifold = _dataset_points(args.input)
    spec = _spec_for(args, manifold)
    gram = gram_matrix(spec, points)
    emb = kernel_pca(gram, args.l)
    header = _provenance_lines(_provenance("kpca", args))
    header.append("eigenvalues=" + ",".join(repr(float(v)) for v in emb.eigenvalues))
    save_matrix_csv(args.out, emb.coords, header_lines=header)
    return EXIT_OK


def _cmd_kfda(args) -> int:
    points, labels, manifold = _dataset_points(args.input)
    if labels is None:
        raise BadShapeError("kfda needs a dataset with labels")
    spec = _spec_for(args, manifold)
    gram = gram_matrix(spec, points)
    emb = kernel_fda(gram, labels, ridge=args.ridge, dims=args.dims)
    header = _provenance_lines(_provenance("kfda", args))
    header.append("eigenvalues=" + ",".join(repr(float(v)) for v in emb.eigenvalues))
    save_matrix_csv(args.out, emb.coords, header_lines=header)
    return EXIT_OK


def _binary_labels(labels) -> np.ndarray:
    uniq = np.unique(labels)
    if set(uniq.tolist()) <= {-1, 1}:
        return np.asarray(labels, dtype=float)
    if len(uniq) == 2:
        return np.where(np.asarray(labels) == uniq[1], 1.0, -1.0)
    raise BadParamError("binary SVM needs exactly two label values")


def _svm_model_payload(model: SvmModel) -> dict:
    return {
        "dual_coefs": model.dual_coefs.tolist(),
        "bias": model.bias,
        "support_indices": model.support_indices.tolist(),
        "C": model.C,
        "kkt_violation": model.kkt_violation,
    }


def _cv_folds(m: int, folds: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    assignment = np.arange(m) % folds
    rng.shuffle(assignment)
    return assignment


def _cv_select(points, labels, manifold, args):
    """Seeded grid search over gamma and C; returns (gamma, C)."""
    if args.cv < 2:
        raise BadParamError(f"--cv needs at least 2 folds, got {args.cv}")
    gammas = _gamma_list(args.gamma_grid) if args.gamma_grid else [args.gamma]
    cs = [float(t) for t in args.c_grid.split(",")] if args.c_grid else [args.C]
    folds = _cv_folds(len(points), args.cv, args.seed)
    best = None
    for gamma in gammas:
        spec = KernelSpec(
            manifold=manifold,
            metric=_metric_for(args, manifold),
            gamma=gamma,
            alpha=args.alpha,
        )
        full = gram_matrix(spec, points).entries
        for c_val in cs:
            correct = 0
            total = 0
            for f in range(args.cv):
                test = folds == f
                train = ~test
                if len(np.unique(np.asarray(labels)[train])) < 2:
                    continue
                sub = full[np.ix_(train, train)]
                cols = full[np.ix_(train, test)]
                y_train = np.asarray(labels)[train]
                y_test = np.asarray(labels)[test]
                if len(np.unique(labels)) == 2:
                    y_bin = _binary_labels(y_train)
                    model = svm_train(sub, y_bin, c_val, kkt_tol=args.kkt_tol)
                    pred_sign = np.where(svm_decision(model, cols) >= 0, 1, -1)
                    uniq = np.unique(labels)
                    mapping = {1: uniq[1], -1: uniq[0]} if not set(uniq.tolist()) <= {-1, 1} else None
                    pred = np.array([mapping[p] for p in pred_sign]) if mapping else pred_sign
                else:
                    model = multiclass_svm_train(sub, y_train, c_val, mode=args.mode, kkt_tol=args.kkt_tol)
                    pred = multiclass_svm_predict(model, cols)
                correct += int(np.sum(pred == y_test))
                total += int(test.sum())
            score = correct / total if total else 0.0
            if best is None or score > best[0]:
                best = (score, gamma, c_val)
    return best[1], best[2]


def _cmd_svm_train(args) -> int:
    points, labels, manifold = _dataset_points(args.input)
    if labels is None:
        raise BadShapeError("svm-train needs a dataset with labels")
    gamma, c_val = args.gamma, args.C
    if args.cv:
        gamma, c_val = _cv_select(points, labels, manifold, args)
    spec = KernelSpec(
        manifold=manifold,
        metric=_metric_for(args, manifold),
        gamma=gamma,
        alpha=args.alpha,
    )
    gram = gram_matrix(spec, points)
    classes = np.unique(labels)
    payload = {"spec": spec.to_dict(), "provenance": _provenance("svm-train", args)}
    if len(classes) == 2:
        y = _binary_labels(labels)
        model = svm_train(gram, y, c_val, kkt_tol=args.kkt_tol, spec=spec)
        payload["type"] = "svm"
        payload["classes"] = [int(classes[0]), int(classes[1])]
        payload["model"] = _svm_model_payload(model)
    else:
        model = multiclass_svm_train(gram, labels, c_val, mode=args.mode, kkt_tol=args.kkt_tol)
        payload["type"] = "multiclass-svm"
        payload["mode"] = model.mode
        payload["classes"] = [int(c) for c in model.classes]
        payload["models"] = [_svm_model_payload(mdl) for mdl in model.models]
        if model.pairs is not None:
            payload["pairs"] = [[int(a), int(b)] for a, b in model.pairs]
            payload["pair_indices"] = [idx.tolist() for idx in model.pair_indices]
    _write_json(args.out, payload)
    return EXIT_OK


def _model_from_payload(payload):
    spec = KernelSpec.from_dict(payload["spec"])
    if payload["type"] == "svm":
        raw = payload["model"]
        model = SvmModel(
            dual_coefs=np.array(raw["dual_coefs"], dtype=float),
            bias=float(raw["bias"]),
            support_indices=np.array(raw["support_indices"], dtype=int),
            C=float(raw["C"]),
            spec=spec,
            kkt_violation=float(raw.get("kkt_violation", 0.0)),
        )
        return spec, model, payload.get("classes")
    models = [
        SvmModel(
            dual_coefs=np.array(raw["dual_coefs"], dtype=float),
            bias=float(raw["bias"]),
            support_indices=np.array(raw["support_indices"], dtype=int),
            C=float(raw["C"]),
            spec=spec,
            kkt_violation=float(raw.get("kkt_violation", 0.0)),
        )
        for raw in payload["models"]
    ]
    multi = MulticlassSvmModel(
        mode=payload["mode"],
        classes=np.array(payload["classes"]),
        models=models,
        pair_indices=[np.array(v, dtype=int) for v in payload.get("pair_indices", [])] or None,
        pairs=[tuple(p) for p in payload.get("pairs", [])] or None,
    )
    return spec, multi, payload["classes"]


def _cmd_svm_predict(args) -> int:
    with open(args.model) as fh:
        payload = json.load(fh)
    spec, model, classes = _model_from_payload(payload)
    train_points, _, train_manifold = _dataset_points(args.train)
    test_points, _, test_manifold = _dataset_points(args.test)
    if train_manifold != test_manifold:
        raise DimMismatchError("train/test dataset kinds differ")
    cols = cross_gram(spec, train_points, test_points)
    header = _provenance_lines(_provenance("svm-predict", args))
    if isinstance(model, SvmModel):
        dec = svm_decision(model, cols)
        pred_sign = np.where(dec >= 0, 1, -1)
        if classes and not set(classes) <= {-1, 1}:
            pred = np.where(pred_sign > 0, classes[1], classes[0])
        else:
            pred = pred_sign
        header.append("columns=index,decision,label")
        rows = np.column_stack([np.arange(len(test_points)), dec, pred.astype(float)])
    else:
        pred = multiclass_svm_predict(model, cols)
        header.append("columns=index,label")
        rows = np.column_stack([np.arange(len(test_points)), pred.astype(float)])
    save_matrix_csv(args.out, rows, header_lines=header)
    return EXIT_OK


def _cmd_mkl_train(args) -> int:
    gammas = _gamma_list(args.gamma_grid) if args.gamma_grid else None
    if gammas and len(args.inputs) > 1:
        raise BadParamError("--gamma-grid expands kernels from a single input")
    grams = []
    labels = None
    manifold_spec = None
    if gammas and len(args.inputs) == 1:
        points, labels, manifold = _dataset_points(args.inputs[0])
        specs = [
            KernelSpec(
                manifold=manifold,
                metric=_metric_for(args, manifold),
                gamma=g,
                alpha=args.alpha,
            )
            for g in gammas
        ]
        grams = [gram_matrix(s, points) for s in specs]
        manifold_spec = [s.to_dict() for s in specs]
    else:
        manifold_spec = []
        for path in args.inputs:
            points, lab, manifold = _dataset_points(path)
            if labels is None:
                labels = lab
            spec = KernelSpec(
                manifold=manifold,
                metric=_metric_for(args, manifold),
                gamma=args.gamma,
                alpha=args.alpha,
            )
            grams.append(gram_matrix(spec, points))
            manifold_spec.append(spec.to_dict())
    if labels is None:
        raise BadShapeError("mkl-train needs labels in the (first) dataset")
    y = _binary_labels(labels)
    model = mkl_train(grams, y, args.C, max_outer_iter=args.max_outer, tol=args.tol)
    payload = {
        "type": "mkl-svm",
        "weights": model.weights.tolist(),
        "objective_trace": [float(v) for v in model.objective_trace],
        "kernel_specs": manifold_spec,
        "model": _svm_model_payload(model.svm),
        "provenance": _provenance("mkl-train", args),
    }
    _write_json(args.out, payload)
    return EXIT_OK


def _cmd_covdesc(args) -> int:
    images = [read_image(p) for p in args.inputs]
    shape = images[0].shape
    maker = pedestrian_feature_maps if args.features == "pedestrian" else texture_feature_maps
    stacks = [maker(img) for img in images]
    prov = _provenance("covdesc", args)
    if not args.select:
        descs = []
        for stack in stacks:
            full_rect = (0, 0, stack.width, stack.height)
            descs.append(region_covariance(stack, full_rect, epsilon=args.epsilon))
        save_dataset(args.out, "spd", descs, provenance=prov)
        return EXIT_OK
    for img in images:
        if img.shape != shape:
            raise FrameMismatchError("subwindow selection needs equally sized images")
    candidates = candidate_grid(shape[0], shape[1])
    descriptors = []
    for stack in stacks:
        integrals = integral_images(stack)
        full_rect = (0, 0, stack.width, stack.height)
        full_cov = region_covariance(stack, full_rect, epsilon=args.epsilon, integrals=integrals)
        per_candidate = []
        for cand in candidates:
            cov = region_covariance(stack, cand.rect, epsilon=args.epsilon, integrals=integrals)
            if args.normalize:
                cov = normalize_by_full_window(cov, full_cov)
            per_candidate.append(cov)
        descriptors.append(per_candidate)
    positives = np.ones(len(images), dtype=bool)
    selected = select_subwindows(
        candidates, descriptors, positives, args.select, args.max_overlap
    )
    candidate_index = {cand.rect: j for j, cand in enumerate(candidates)}
    payload = {
        "features": args.features,
        "image_shape": list(shape),
        "selected": [
            {
                "rect": list(s.rect),
                "score": s.score,
                "descriptors": [
                    descriptors[i][candidate_index[s.rect]].tolist()
                    for i in range(len(images))
                ],
            }
            for s in selected
        ],
        "provenance": prov,
    }
    _write_json(args.out, payload)
    return EXIT_OK


def _cmd_subspace(args) -> int:
    mat = load_matrix_csv(args.input)
    basis = subspace_from_vectors(mat, args.r)
    if args.out.endswith(".json"):
        save_dataset(args.out, "grassmann", [basis], provenance=_provenance("subspace", args))
    else:
        save_matrix_csv(
            args.out, basis, header_lines=_provenance_lines(_provenance("subspace", args))
        )
    return EXIT_OK


def _cmd_synth(args) -> int:
    if args.kind == "spd-blobs":
        points, labels = synth_spd_blobs(
            args.clusters,
            args.per_cluster,
            args.dim,
            seed=args.seed,
            center_scale=args.center_scale,
            noise_scale=args.noise_scale,
        )
        kind = "spd"
    else:
        points, labels = synth_grassmann_clusters(
            args.clusters,
            args.per_cluster,
            args.dim,
            args.subspace_dim,
            seed=args.seed,
            noise_scale=args.noise_scale,
        )
        kind = "grassmann"
    save_dataset(args.out, kind, points, labels=labels, provenance=_provenance("synth", args))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_kernel_flags(sub, manifolds=False):
    if manifolds:
        sub.add_argument("--manifold", choices=("spd", "grassmann", "euclidean"), default=None,
                         help="override the manifold implied by the dataset kind")
    sub.add_argument("--metric", default=None,
                     help="metric name (default: log-euclidean on spd, projection on grassmann)")
    sub.add_argument("--gamma", type=float, default=1.0, help="kernel bandwidth")
    sub.add_argument("--alpha", type=float, default=0.5, help="power-euclidean exponent")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="manikernels", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("definiteness", parents=[], help="randomized kernel definiteness search")
    p.add_argument("--manifold", choices=("spd", "grassmann", "euclidean"), required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--dim", type=int, default=3, help="matrix size d or ambient dimension n")
    p.add_argument("--subspace-dim", type=int, default=2, help="subspace dimension r")
    p.add_argument("--gamma-grid", default="0.01,0.1,1,10,100")
    p.add_argument("--m", type=int, default=40, help="points per trial")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_definiteness)

    p = subs.add_parser("gram", help="Gram matrix of a dataset, with optional audit")
    p.add_argument("--input", required=True)
    _add_kernel_flags(p, manifolds=True)
    p.add_argument("--audit", action="store_true", help="record the smallest eigenvalue")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help=".csv or .json output path")
    p.set_defaults(func=_cmd_gram)

    p = subs.add_parser("cluster", help="kernel k-means on a dataset")
    p.add_argument("--input", required=True)
    _add_kernel_flags(p, manifolds=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cluster)

    p = subs.add_parser("kpca", help="kernel PCA embedding to CSV")
    p.add_argument("--input", required=True)
    _add_kernel_flags(p, manifolds=True)
    p.add_argument("--l", type=int, required=True, help="number of components")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_kpca)

    p = subs.add_parser("kfda", help="kernel FDA projections to CSV")
    p.add_argument("--input", required=True)
    _add_kernel_flags(p, manifolds=True)
    p.add_argument("--ridge", type=float, default=None)
    p.add_argument("--dims", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_kfda)

    p = subs.add_parser("svm-train", help="train a (multiclass) kernel SVM")
    p.add_argument("--input", required=True)
    _add_kernel_flags(p, manifolds=True)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--kkt-tol", type=float, default=1e-3)
    p.add_argument("--mode", choices=("one-vs-all", "one-vs-one"), default="one-vs-all")
    p.add_argument("--cv", type=int, default=0,
                   help="grid-search gamma/C with this many seeded folds")
    p.add_argument("--gamma-grid", default=None, help="gamma candidates for --cv")
    p.add_argument("--c-grid", default=None, help="C candidates for --cv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_svm_train)

    p = subs.add_parser("svm-predict", help="decision values for a test dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--train", required=True, help="dataset the model was trained on")
    p.add_argument("--test", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_svm_predict)

    p = subs.add_parser("mkl-train", help="multiple kernel learning over datasets or a gamma grid")
    p.add_argument("--inputs", nargs="+", required=True)
    _add_kernel_flags(p)
    p.add_argument("--gamma-grid", default=None,
                   help="with one input: one kernel per gamma in the grid")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--max-outer", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_mkl_train)

    p = subs.add_parser("covdesc", help="region covariance descriptors from images")
    p.add_argument("--inputs", nargs="+", required=True, help="PGM or CSV images")
    p.add_argument("--features", choices=("pedestrian", "texture"), default="pedestrian")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--select", type=int, default=0,
                   help="pick this many low-dispersion subwindows")
    p.add_argument("--max-overlap", type=float, default=0.75)
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True,
                   help="rescale subwindow descriptors by the full-window covariance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_covdesc)

    p = subs.add_parser("subspace", help="dominant subspace of a vector-set CSV")
    p.add_argument("--input", required=True, help="n x p CSV, one descriptor per column")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_subspace)

    p = subs.add_parser("synth", help="seeded synthetic datasets")
    p.add_argument("--kind", choices=("spd-blobs", "grassmann-clusters"), required=True)
    p.add_argument("--clusters", type=int, default=3)
    p.add_argument("--per-cluster", type=int, default=40)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--subspace-dim", type=int, default=2)
    p.add_argument("--center-scale", type=float, default=1.0)
    p.add_argument("--noise-scale", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"manikernels: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _NUMERIC_ERRORS as exc:
        print(f"manikernels: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _DATA_ERRORS as exc:
        print(f"manikernels: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ManiKernelsError as exc:
        print(f"manikernels: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
