"""Save and load fitted PCA and classifier models as ``.npz`` archives."""

from __future__ import annotations

import io
import json

import numpy as np

from .cache import atomic_write
from .classify import GalleryIndex, SvmModel
from .pca import PcaModel


def _dump(path, meta, **arrays):
    buf = io.BytesIO()
    np.savez(buf, meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8),
             **arrays)
    atomic_write(path, buf.getvalue())


def _load(path, kind):
    with np.load(path, allow_pickle=False) as data:
        arrays = {k: data[k] for k in data.files}
    meta = json.loads(arrays.pop("meta").tobytes().decode())
    if meta.get("kind") != kind:
        raise ValueError(f"{path}: expected a {kind} model, found {meta.get('kind')!r}")
    return meta, arrays


def save_pca(path: str, model: PcaModel, **meta) -> None:
    _dump(path, {"kind": "pca", **meta}, mean=model.mean, components=model.components,
          eigenvalues=model.eigenvalues)


def load_pca(path: str) -> tuple[PcaModel, dict]:
    meta, a = _load(path, "pca")
    return PcaModel(a["mean"], a["components"], a["eigenvalues"]), meta


def save_classifier(path: str, model, K: int, **meta) -> None:
    if isinstance(model, SvmModel):
        pairs = np.array([[a, b] for a, b, _ in model.pairs])
        _dump(path, {"kind": "svm", "K": K, "C": model.C, "tol": model.tol, **meta},
              classes=model.classes, pairs=pairs, weights=model.weights)
    elif isinstance(model, GalleryIndex):
        _dump(path, {"kind": "nn", "K": K, **meta}, vectors=model.vectors,
              labels=model.labels, sample_ids=model.sample_ids)
    else:
        raise TypeError(f"cannot save {type(model).__name__}")


def load_classifier(path: str):
    with np.load(path, allow_pickle=False) as data:
        kind = json.loads(data["meta"].tobytes().decode()).get("kind")
    meta, a = _load(path, kind)
    if kind == "svm":
        pairs = [(a_, b_, w) for (a_, b_), w in zip(a["pairs"].tolist(), a["weights"])]
        return SvmModel(a["classes"], pairs, meta["C"], meta["tol"]), meta
    if kind == "nn":
        return GalleryIndex(a["vectors"], a["labels"], a["sample_ids"]), meta
    raise ValueError(f"{path}: unknown model kind {kind!r}")
