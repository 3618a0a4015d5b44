"""Evaluation protocols: accuracy vs. PCA size, vs. training count, latency."""

from __future__ import annotations

import csv
import statistics
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .classify import GalleryIndex, nn_predict, nn_predict_many, svm_predict, svm_predict_many, svm_train
from .dataset import SplitSpec, split_indices
from .features import FeatureSchema, extract_features
from .filterbank import FilterBank
from .pca import pca_fit, pca_project

CSV_FIELDS = ("param", "classifier", "accuracy", "seed", "wall_ms")


@dataclass
class ExperimentReport:
    name: str
    config: dict
    rows: list = field(default_factory=list)
    stages: dict = field(default_factory=dict)  # stage name -> seconds
    confusion: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def table(self) -> str:
        lines = [f"# {self.name}"]
        lines += [f"#   {k} = {v}" for k, v in sorted(self.config.items())]
        lines.append(f"{'param':>8} {'classifier':>10} {'accuracy':>9} {'seed':>6} {'wall_ms':>9}")
        for r in self.rows:
            acc = "error" if r["accuracy"] is None else f"{r['accuracy']:.4f}"
            lines.append(f"{r['param']:>8} {r['classifier']:>10} {acc:>9} {r['seed']!s:>6} "
                         f"{r['wall_ms']:>9.1f}")
            if r.get("error"):
                lines.append(f"{'':>8} ! {r['error']}")
        for stage, sec in self.stages.items():
            lines.append(f"# stage {stage}: {sec:.3f} s")
        if self.confusion:
            lines.append(f"# confusion: {self.confusion}")
        lines += [f"# {n}" for n in self.notes]
        return "\n".join(lines)

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, extrasaction="ignore")
            writer.writeheader()
            for r in self.rows:
                writer.writerow({**r, "accuracy": "" if r["accuracy"] is None else r["accuracy"]})


def confusion_summary(truth, pred, top: int = 5) -> dict:
    truth, pred = np.asarray(truth), np.asarray(pred)
    wrong = truth != pred
    pairs = Counter(zip(truth[wrong].tolist(), pred[wrong].tolist()))
    return {"n_test": int(len(truth)), "n_errors": int(wrong.sum()),
            "top_confusions": [f"{a}->{b} x{n}" for (a, b), n in pairs.most_common(top)]}


def train_classifier(kind: str, Z, labels, sample_ids=None, C=1.0, tol=1e-4, seed=0):
    if kind == "svm":
        return svm_train(Z, labels, C=C, tol=tol, seed=seed)
    if kind == "nn":
        return GalleryIndex.build(Z, labels, sample_ids)
    raise ValueError(f"unknown classifier {kind!r}")


def predict(kind: str, model, Z) -> np.ndarray:
    return svm_predict_many(model, Z) if kind == "svm" else nn_predict_many(model, Z)


def _fit_pca(X, train, fit_on):
    if fit_on == "train":
        return pca_fit(X[train])
    if fit_on == "all":
        return pca_fit(X)
    raise ValueError(f"pca fit mode must be 'train' or 'all', got {fit_on!r}")


def pca_sweep(X, labels, sample_index, classifier: str, Ks, split: SplitSpec,
              pca_fit_on: str = "train", C: float = 1.0, tol: float = 1e-4) -> ExperimentReport:
    """Test accuracy for each number of retained components in ``Ks``.

    The PCA is fitted once; every K uses the leading K coordinates. A K larger
    than the model supports is reported as an error row and skipped.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    report = ExperimentReport("pca-sweep", {
        "classifier": classifier, "K": list(Ks), "train_per_class": split.train_per_class,
        "split_mode": split.mode, "seed": split.seed, "pca_fit_on": pca_fit_on,
        "C": C, "tol": tol, "n_samples": len(labels), "dim": X.shape[1]})
    train, test = split_indices(labels, sample_index, split)
    t0 = time.perf_counter()
    model = _fit_pca(X, train, pca_fit_on)
    report.stages["pca_fit"] = time.perf_counter() - t0
    full_tr = pca_project(model, X[train], model.k_max)
    full_te = pca_project(model, X[test], model.k_max)
    last_pred = None
    for K in sorted(Ks):
        t0 = time.perf_counter()
        row = {"param": K, "classifier": classifier, "seed": split.seed}
        if not 1 <= K <= model.k_max:
            row.update(accuracy=None, wall_ms=0.0, error=f"K={K} outside [1, {model.k_max}]")
            report.rows.append(row)
            continue
        clf = train_classifier(classifier, full_tr[:, :K], labels[train], train, C, tol, split.seed)
        pred = predict(classifier, clf, full_te[:, :K])
        row.update(accuracy=float(np.mean(pred == labels[test])),
                   wall_ms=1000 * (time.perf_counter() - t0))
        report.rows.append(row)
        last_pred = pred
    if last_pred is not None:
        report.confusion = confusion_summary(labels[test], last_pred)
    return report


def train_count_sweep(X, labels, sample_index, classifier: str, ks, seeds=(0, 1, 2),
                      K: int = 200, pca_fit_on: str = "train", C: float = 1.0,
                      tol: float = 1e-4) -> ExperimentReport:
    """Accuracy vs. training samples per class over random splits.

    For each ``k`` and seed: random-k split, PCA on the training side, the
    classifier on ``min(K, K_max)`` components. A mean row follows each k.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    report = ExperimentReport("train-count-sweep", {
        "classifier": classifier, "k": list(ks), "seeds": list(seeds), "K": K,
        "pca_fit_on": pca_fit_on, "C": C, "tol": tol, "n_samples": len(labels),
        "dim": X.shape[1]})
    for k in sorted(ks):
        accs = []
        for seed in seeds:
            t0 = time.perf_counter()
            row = {"param": k, "classifier": classifier, "seed": seed}
            try:
                train, test = split_indices(labels, sample_index, SplitSpec(k, seed, "random-k"))
            except ValueError as exc:
                row.update(accuracy=None, wall_ms=0.0, error=str(exc))
                report.rows.append(row)
                continue
            model = _fit_pca(X, train, pca_fit_on)
            k_used = min(K, model.k_max)
            if k_used < K:
                note = f"k={k}: K capped at {k_used} (PCA rank limit)"
                if note not in report.notes:
                    report.notes.append(note)
            Ztr = pca_project(model, X[train], k_used)
            Zte = pca_project(model, X[test], k_used)
            clf = train_classifier(classifier, Ztr, labels[train], train, C, tol, seed)
            acc = float(np.mean(predict(classifier, clf, Zte) == labels[test]))
            accs.append(acc)
            row.update(accuracy=acc, wall_ms=1000 * (time.perf_counter() - t0))
            report.rows.append(row)
        if accs:
            report.rows.append({"param": k, "classifier": classifier, "seed": "mean",
                                "accuracy": float(np.mean(accs)), "wall_ms": 0.0})
    return report


def bench(images, schema: FeatureSchema, bank: FilterBank, pca_model, classifier: str,
          clf, K: int) -> ExperimentReport:
    """Per-image wall clock of feature extraction, projection and matching."""
    times = {"extract": [], "project": [], "match": [], "total": []}
    for img in images:
        t0 = time.perf_counter()
        f = extract_features(img, schema, bank)
        t1 = time.perf_counter()
        z = pca_project(pca_model, f, K)
        t2 = time.perf_counter()
        if classifier == "svm":
            svm_predict(clf, z)
        else:
            nn_predict(clf, z)
        t3 = time.perf_counter()
        times["extract"].append(t1 - t0)
        times["project"].append(t2 - t1)
        times["match"].append(t3 - t2)
        times["total"].append(t3 - t0)
    report = ExperimentReport("bench", {"n_images": len(times["total"]), "classifier": classifier,
                                        "K": K, **schema.to_dict()})
    for stage, vals in times.items():
        if vals:
            report.stages[f"{stage}_mean"] = statistics.fmean(vals)
            report.stages[f"{stage}_median"] = statistics.median(vals)
    report.stages["wall_total"] = float(sum(times["total"]))
    return report
