"""Palmprint datasets: directory ingestion, synthetic generation, splits."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

IMAGE_EXTENSIONS = (".pgm", ".png")


class DatasetError(ValueError):
    """Raised when a dataset cannot be loaded; ``problems`` lists (path, reason)."""

    def __init__(self, message, problems=()):
        super().__init__(message)
        self.problems = list(problems)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    images: np.ndarray  # (N, H, W) float64 in [0, 1]
    labels: np.ndarray  # (N,) int class ids
    sample_index: np.ndarray  # (N,) index within class
    class_names: list = field(default_factory=list)
    rejected: list = field(default_factory=list)  # (path, reason) skipped at load time
    sample_ids: np.ndarray = None  # global ids, stable across splits
    signatures: list = None  # generator parameters, synthetic data only

    def __post_init__(self):
        if not len(self.images) == len(self.labels) == len(self.sample_index):
            raise ValueError("images, labels and sample indices differ in length")
        if self.sample_ids is None:
            object.__setattr__(self, "sample_ids", np.arange(len(self.labels)))
        pairs = set(zip(self.labels.tolist(), self.sample_index.tolist()))
        if len(pairs) != len(self.labels):
            raise ValueError("sample index repeated within a class")

    def __len__(self):
        return len(self.labels)

    @property
    def n_classes(self) -> int:
        return len(np.unique(self.labels))

    @property
    def samples_per_class(self) -> int:
        """Smallest class size."""
        return int(np.bincount(self.labels).min()) if len(self.labels) else 0

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=int)
        return LabeledDataset(self.images[idx], self.labels[idx], self.sample_index[idx],
                              self.class_names, sample_ids=self.sample_ids[idx])


# -- loading ---------------------------------------------------------------


def read_image(path: str) -> np.ndarray:
    """Decode an 8-bit grayscale image to floats in [0, 1]."""
    with Image.open(path) as img:
        if img.mode not in ("L", "P", "RGB", "RGBA", "I;16", "I"):
            raise ValueError(f"unsupported image mode {img.mode}")
        arr = np.asarray(img.convert("L"), dtype=np.float64)
    return arr / 255.0


def write_image(path: str, image: np.ndarray) -> None:
    """Quantize a [0, 1] image to 8 bits and save it (format from the suffix)."""
    arr = np.clip(np.round(np.asarray(image) * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path)


def load_directory(root: str, size: int = 128) -> LabeledDataset:
    """Load ``root/<class>/<sample>.(pgm|png)``.

    Classes are ordered by directory name and samples by file name. Files that
    cannot be decoded or are not ``size`` x ``size`` are skipped and listed in
    ``dataset.rejected``; a class left without images is an error.
    """
    if not os.path.isdir(root):
        raise DatasetError(f"{root}: not a directory")
    class_dirs = sorted(d for d in os.listdir(root) if os.path.isdir(os.path.join(root, d)))
    if not class_dirs:
        raise DatasetError(f"{root}: no classes found")

    images, labels, index, rejected, empty = [], [], [], [], []
    for label, name in enumerate(class_dirs):
        cdir = os.path.join(root, name)
        files = sorted(f for f in os.listdir(cdir) if f.lower().endswith(IMAGE_EXTENSIONS))
        count = 0
        for fname in files:
            path = os.path.join(cdir, fname)
            try:
                img = read_image(path)
            except (OSError, ValueError) as exc:
                rejected.append((path, f"unreadable: {exc}"))
                continue
            if img.shape != (size, size):
                rejected.append((path, f"expected {size}x{size}, got {img.shape[0]}x{img.shape[1]}"))
                continue
            images.append(img)
            labels.append(label)
            index.append(count)
            count += 1
        if count == 0:
            empty.append((cdir, "no usable images"))
    if empty:
        raise DatasetError(f"{root}: {len(empty)} empty class(es)", empty + rejected)
    return LabeledDataset(np.stack(images), np.array(labels), np.array(index),
                          class_dirs, rejected)


def export_directory(ds: LabeledDataset, root: str, ext: str = "pgm") -> int:
    """Write a dataset in the ``root/<class>/<sample>.<ext>`` layout."""
    names = ds.class_names or [f"c{c:04d}" for c in range(int(ds.labels.max()) + 1)]
    for img, label, idx in zip(ds.images, ds.labels, ds.sample_index):
        cdir = os.path.join(root, names[label])
        os.makedirs(cdir, exist_ok=True)
        write_image(os.path.join(cdir, f"s{idx:03d}.{ext}"), img)
    return len(ds)


# -- synthetic palmprints ----------------------------------------------------


@dataclass(frozen=True)
class ClassSignature:
    """Random parameters defining one synthetic identity."""

    grating_freq: np.ndarray  # radians per pixel
    grating_theta: np.ndarray
    grating_amp: np.ndarray
    grating_phase: np.ndarray
    line_coef: np.ndarray  # (n_lines, 4): offset, slope, curvature, bend phase
    line_theta: np.ndarray
    line_width: np.ndarray
    line_depth: np.ndarray

    def params(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in (
            self.grating_freq, self.grating_theta, self.grating_amp, self.grating_phase,
            self.line_coef, self.line_theta, self.line_width, self.line_depth)])


def draw_signature(rng: np.random.Generator) -> ClassSignature:
    n_grat = int(rng.integers(3, 7))
    n_lines = int(rng.integers(2, 4))
    return ClassSignature(
        grating_freq=rng.uniform(0.2, 1.6, n_grat),
        grating_theta=rng.uniform(0.0, np.pi, n_grat),
        grating_amp=rng.uniform(0.04, 0.12, n_grat),
        grating_phase=rng.uniform(0.0, 2 * np.pi, n_grat),
        line_coef=np.column_stack([
            rng.uniform(-0.5, 0.5, n_lines),
            rng.uniform(-0.6, 0.6, n_lines),
            rng.uniform(-0.8, 0.8, n_lines),
            rng.uniform(0.0, 2 * np.pi, n_lines),
        ]),
        line_theta=rng.uniform(0.0, np.pi, n_lines),
        line_width=rng.uniform(1.5, 3.5, n_lines),
        line_depth=rng.uniform(0.15, 0.35, n_lines),
    )


def render_signature(sig: ClassSignature, size: int) -> np.ndarray:
    """Noise-free template: gratings around mid-gray plus dark smooth curves."""
    coords = np.arange(size) - (size - 1) / 2.0
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    img = np.full((size, size), 0.5)
    for f, th, a, ph in zip(sig.grating_freq, sig.grating_theta, sig.grating_amp,
                            sig.grating_phase):
        img += a * np.cos(f * (xx * np.cos(th) + yy * np.sin(th)) + ph)
    half = size / 2.0
    for (off, slope, curv, bend), th, width, depth in zip(
            sig.line_coef, sig.line_theta, sig.line_width, sig.line_depth):
        # curve in a rotated frame: v = f(u), with u, v normalized to [-1, 1]
        u = (xx * np.cos(th) + yy * np.sin(th)) / half
        v = (-xx * np.sin(th) + yy * np.cos(th)) / half
        center = off + slope * u + curv * u**2 + 0.1 * np.sin(3 * u + bend)
        dist = (v - center) * half
        img -= depth * np.exp(-0.5 * (dist / width) ** 2)
    return img


def synth_generate(n_classes: int, per_class: int, size: int = 128, seed: int = 0,
                   shift: int = 3, noise: float = 0.02, brightness: float = 0.05) -> LabeledDataset:
    """Deterministic synthetic palmprint-like dataset.

    Every class gets a random texture signature; every sample of the class is
    the rendered template circularly shifted by up to ``shift`` pixels per axis,
    scaled by a brightness factor in ``1 +/- brightness`` and corrupted with
    Gaussian noise of std ``noise``, then clipped to [0, 1].
    """
    if n_classes < 1 or per_class < 1:
        raise ValueError("n_classes and per_class must be positive")
    if size < 2 or size & (size - 1):
        raise ValueError(f"size must be a power of two, got {size}")
    root = np.random.SeedSequence(seed)
    class_seeds = root.spawn(n_classes)
    images = np.empty((n_classes * per_class, size, size))
    signatures = []
    for c, cseed in enumerate(class_seeds):
        sig_seed, sample_seed = cseed.spawn(2)
        sig = draw_signature(np.random.default_rng(sig_seed))
        signatures.append(sig)
        template = render_signature(sig, size)
        rng = np.random.default_rng(sample_seed)
        for s in range(per_class):
            dy, dx = rng.integers(-shift, shift + 1, size=2)
            gain = rng.uniform(1 - brightness, 1 + brightness)
            img = np.roll(template, (int(dy), int(dx)), axis=(0, 1)) * gain
            img = img + rng.normal(0.0, noise, img.shape)
            images[c * per_class + s] = np.clip(img, 0.0, 1.0)
    labels = np.repeat(np.arange(n_classes), per_class)
    index = np.tile(np.arange(per_class), n_classes)
    return LabeledDataset(images, labels, index, [f"c{c:04d}" for c in range(n_classes)],
                          signatures=signatures)


# -- splits ----------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    train_per_class: int
    seed: int = 0
    mode: str = "first-k"

    def __post_init__(self):
        if self.mode not in ("first-k", "random-k"):
            raise ValueError(f"unknown split mode {self.mode!r}")


def split_indices(labels, sample_index, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Row indices of the train and test parts, each sorted ascending."""
    labels = np.asarray(labels)
    sample_index = np.asarray(sample_index)
    k = spec.train_per_class
    smallest = int(np.unique(labels, return_counts=True)[1].min()) if len(labels) else 0
    if not 1 <= k < smallest:
        raise ValueError(f"train_per_class={k} must lie in [1, {smallest - 1}]")
    rng = np.random.default_rng(spec.seed)
    train, test = [], []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        members = members[np.argsort(sample_index[members], kind="stable")]
        if spec.mode == "random-k":
            members = members[rng.permutation(len(members))]
        train.extend(members[:k])
        test.extend(members[k:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


def split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Per class, ``k`` samples go to train and the rest to test.

    ``first-k`` takes the lowest sample indices; ``random-k`` draws a seeded
    permutation per class.
    """
    train, test = split_indices(ds.labels, ds.sample_index, spec)
    return ds.subset(train), ds.subset(test)
