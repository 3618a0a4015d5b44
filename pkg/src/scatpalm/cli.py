"""Command-line entry point: ``scatpalm <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from . import cache as cachemod
from .dataset import DatasetError, SplitSpec, export_directory, load_directory, split_indices, synth_generate
from .experiments import bench, pca_sweep, predict, train_classifier, train_count_sweep
from .features import FeatureSchema, extract_many
from .filterbank import FilterBankConfig, build_filter_bank, dump_filters, littlewood_paley_report
from .pca import pca_fit, pca_project, retained_variance
from .persist import load_classifier, load_pca, save_classifier, save_pca

log = logging.getLogger("scatpalm")


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _add_schema_flags(p):
    p.add_argument("--size", type=int, default=128, help="image edge length in pixels")
    p.add_argument("--block", type=int, default=32, help="block edge length in pixels")
    p.add_argument("--scales", type=int, default=5, help="number of wavelet scales J")
    p.add_argument("--orientations", type=int, default=6, help="number of orientations p")
    p.add_argument("--layers", type=int, default=2, help="scattering depth m")


def _add_source_flags(p):
    p.add_argument("--input", help="dataset root laid out as <root>/<class>/<image>")
    p.add_argument("--synth-classes", type=int, default=50)
    p.add_argument("--synth-per-class", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)


def _add_split_flags(p):
    p.add_argument("--train-per-class", type=int, default=6)
    p.add_argument("--split-mode", choices=("first-k", "random-k"), default="first-k")


def _add_model_flags(p):
    p.add_argument("--classifier", choices=("svm", "nn"), default="svm")
    p.add_argument("--c", type=float, default=1.0, help="SVM penalty")
    p.add_argument("--tol", type=float, default=1e-4, help="SVM KKT tolerance")
    p.add_argument("--pca-fit-on", choices=("train", "all"), default="train")


def _schema(args) -> FeatureSchema:
    return FeatureSchema(args.size, args.block, args.scales, args.orientations, args.layers)


def _bank(schema: FeatureSchema):
    return build_filter_bank(FilterBankConfig(schema.J, schema.p, schema.block_size))


def _dataset(args):
    if args.input:
        ds = load_directory(args.input, args.size)
        for path, reason in ds.rejected:
            log.warning("rejected %s: %s", path, reason)
        return ds, {"source": "directory", "root": args.input}
    ds = synth_generate(args.synth_classes, args.synth_per_class, args.size, args.seed)
    return ds, {"source": "synthetic", "classes": args.synth_classes,
                "per_class": args.synth_per_class, "seed": args.seed}


def _emit(report, args):
    print(report.table())
    if getattr(args, "csv", None):
        report.write_csv(args.csv)
        print(f"wrote {args.csv}")


def cmd_filters(args):
    bank = build_filter_bank(FilterBankConfig(args.scales, args.orientations, args.block))
    lp_max, lp_min = littlewood_paley_report(bank)
    n = dump_filters(bank, args.out)
    print(f"wrote {n} filter images to {args.out}")
    print(f"littlewood-paley max {lp_max:.6f}, annulus min {lp_min:.6f}")


def cmd_synth(args):
    ds = synth_generate(args.classes, args.per_class, args.size, args.seed)
    n = export_directory(ds, args.out, args.format)
    print(f"wrote {n} images ({args.classes} classes) to {args.out}")


def cmd_extract(args):
    schema = _schema(args)
    ds, source = _dataset(args)
    bank = _bank(schema)
    t0 = time.perf_counter()
    feats = extract_many(ds.images, schema, bank)
    elapsed = time.perf_counter() - t0
    cache = cachemod.FeatureCache(
        {**schema.to_dict(), "dim": schema.dim}, feats, ds.labels, ds.sample_ids.tolist(),
        {"source": source, "sample_index": ds.sample_index.tolist(),
         "class_names": list(ds.class_names)})
    cachemod.write_cache(args.out, cache)
    print(f"wrote {args.out}: N={cache.n} d={cache.dim} ({elapsed:.1f} s)")
    return cache


def _load_cache(path):
    c = cachemod.read_cache(path)
    index = np.asarray(c.meta.get("sample_index", np.arange(c.n)))
    return c, c.vectors.astype(np.float64), c.labels.astype(np.int64), index


def _train_rows(args, labels, index):
    if args.train_per_class is None:
        everything = np.arange(len(labels))
        return everything, everything
    return split_indices(labels, index, SplitSpec(args.train_per_class, args.seed, args.split_mode))


def cmd_pca(args):
    _, X, labels, index = _load_cache(args.cache)
    train, _ = _train_rows(args, labels, index)
    model = pca_fit(X if args.pca_fit_on == "all" else X[train])
    save_pca(args.out, model, pca_fit_on=args.pca_fit_on, cache=args.cache)
    print(f"wrote {args.out}: K_max={model.k_max}")
    for K in _int_list(args.pca_k):
        if 1 <= K <= model.k_max:
            print(f"K={K:5d} retained variance {retained_variance(model, K):.6f}")
        else:
            print(f"K={K:5d} outside [1, {model.k_max}]")


def cmd_train(args):
    _, X, labels, index = _load_cache(args.cache)
    train, _ = _train_rows(args, labels, index)
    model, _ = load_pca(args.pca)
    K = int(args.pca_k)
    Z = pca_project(model, X[train], K)
    t0 = time.perf_counter()
    clf = train_classifier(args.classifier, Z, labels[train], train, args.c, args.tol, args.seed)
    save_classifier(args.out, clf, K, pca=args.pca)
    print(f"trained {args.classifier} on {len(train)} vectors, K={K} "
          f"({time.perf_counter() - t0:.2f} s) -> {args.out}")


def cmd_eval(args):
    _, X, labels, index = _load_cache(args.cache)
    _, test = _train_rows(args, labels, index)
    pca, _ = load_pca(args.pca)
    clf, meta = load_classifier(args.model)
    Z = pca_project(pca, X[test], meta["K"])
    pred = predict(meta["kind"], clf, Z)
    acc = float(np.mean(pred == labels[test]))
    print(json.dumps({"accuracy": acc, "n_test": int(len(test)), "classifier": meta["kind"],
                      "K": meta["K"]}))


def cmd_sweep_k(args):
    _, X, labels, index = _load_cache(args.cache)
    report = pca_sweep(X, labels, index, args.classifier, _int_list(args.pca_k),
                       SplitSpec(args.train_per_class, args.seed, args.split_mode),
                       args.pca_fit_on, args.c, args.tol)
    report.config["cache"] = args.cache
    _emit(report, args)


def cmd_sweep_train(args):
    _, X, labels, index = _load_cache(args.cache)
    report = train_count_sweep(X, labels, index, args.classifier, _int_list(args.train_counts),
                               _int_list(args.seeds), int(args.pca_k), args.pca_fit_on,
                               args.c, args.tol)
    report.config["cache"] = args.cache
    _emit(report, args)


def cmd_bench(args):
    schema = _schema(args)
    ds, source = _dataset(args)
    bank = _bank(schema)
    train, test = split_indices(ds.labels, ds.sample_index,
                                SplitSpec(args.train_per_class, args.seed, args.split_mode))
    feats = extract_many(ds.images[train], schema, bank)
    model = pca_fit(feats)
    K = min(int(args.pca_k), model.k_max)
    clf = train_classifier(args.classifier, pca_project(model, feats, K), ds.labels[train],
                           train, args.c, args.tol, args.seed)
    report = bench(ds.images[test][: args.n], schema, bank, model, args.classifier, clf, K)
    report.config["source"] = source
    _emit(report, args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scatpalm", description=__doc__)
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filters", help="dump the filter bank as PGM images")
    p.add_argument("--out", required=True)
    p.add_argument("--block", type=int, default=32)
    p.add_argument("--scales", type=int, default=5)
    p.add_argument("--orientations", type=int, default=6)
    p.set_defaults(func=cmd_filters)

    p = sub.add_parser("synth", help="export a synthetic dataset as an image tree")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=50)
    p.add_argument("--per-class", type=int, default=12)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("pgm", "png"), default="pgm")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="compute scattering features into an SCF1 cache")
    _add_source_flags(p)
    _add_schema_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("pca", help="fit PCA on a feature cache")
    p.add_argument("--cache", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pca-k", default="50,100,200", help="K values to report retained variance for")
    p.add_argument("--pca-fit-on", choices=("train", "all"), default="train")
    p.add_argument("--train-per-class", type=int, default=None)
    p.add_argument("--split-mode", choices=("first-k", "random-k"), default="first-k")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_pca)

    for name, func, help_ in (("train", cmd_train, "train a classifier on PCA features"),
                              ("eval", cmd_eval, "evaluate a trained classifier")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--cache", required=True)
        p.add_argument("--pca", required=True, help="PCA model written by 'pca'")
        p.add_argument("--train-per-class", type=int, default=None)
        p.add_argument("--split-mode", choices=("first-k", "random-k"), default="first-k")
        p.add_argument("--seed", type=int, default=0)
        if name == "train":
            _add_model_flags(p)
            p.add_argument("--pca-k", type=int, default=200)
            p.add_argument("--out", required=True)
        else:
            p.add_argument("--model", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("sweep-k", help="accuracy vs. number of PCA features")
    p.add_argument("--cache", required=True)
    p.add_argument("--pca-k", default="10,20,50,100,200")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    _add_split_flags(p)
    _add_model_flags(p)
    p.set_defaults(func=cmd_sweep_k)

    p = sub.add_parser("sweep-train", help="accuracy vs. training samples per class")
    p.add_argument("--cache", required=True)
    p.add_argument("--train-counts", default="1,2,3,4,5,6,7,8,9,10,11")
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--pca-k", type=int, default=200)
    p.add_argument("--csv")
    _add_model_flags(p)
    p.set_defaults(func=cmd_sweep_train)

    p = sub.add_parser("bench", help="per-image extract + project + match latency")
    _add_source_flags(p)
    _add_schema_flags(p)
    _add_split_flags(p)
    _add_model_flags(p)
    p.add_argument("--n", type=int, default=20, help="number of query images timed")
    p.add_argument("--pca-k", type=int, default=200)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (DatasetError, cachemod.CacheFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        for path, reason in getattr(exc, "problems", []):
            print(f"  {path}: {reason}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
