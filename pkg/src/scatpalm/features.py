"""Block-wise scattering statistics for whole images."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .filterbank import FilterBank
from .scattering import ScatteringMaps, block_stats, path_count


@dataclass(frozen=True)
class FeatureSchema:
    image_size: int = 128
    block_size: int = 32
    J: int = 5
    p: int = 6
    m: int = 2

    def __post_init__(self):
        if self.block_size < 1 or self.image_size % self.block_size:
            raise ValueError(
                f"image size {self.image_size} is not divisible by block size {self.block_size}"
            )
        if not 0 <= self.m <= self.J:
            raise ValueError(f"layer count m={self.m} must lie in [0, J={self.J}]")

    @property
    def n_blocks(self) -> int:
        return (self.image_size // self.block_size) ** 2

    @property
    def n_paths(self) -> int:
        return path_count(self.J, self.p, self.m)

    @property
    def dim(self) -> int:
        return self.n_blocks * 2 * self.n_paths

    def to_dict(self) -> dict:
        return asdict(self)

    def check_bank(self, bank: FilterBank) -> None:
        cfg = bank.config
        if (cfg.size, cfg.J, cfg.p) != (self.block_size, self.J, self.p):
            raise ValueError(
                f"filter bank (size={cfg.size}, J={cfg.J}, p={cfg.p}) does not match schema "
                f"(block={self.block_size}, J={self.J}, p={self.p})"
            )


def split_blocks(image: np.ndarray, block: int) -> np.ndarray:
    """Non-overlapping ``block`` x ``block`` tiles in row-major order.

    Returns an array of shape (n_tiles, block, block). Dimensions that are not
    multiples of ``block`` raise ``ValueError``; nothing is padded.
    """
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {image.shape}")
    h, w = image.shape
    if h % block or w % block:
        raise ValueError(f"image {h}x{w} is not divisible into {block}x{block} blocks")
    tiles = image.reshape(h // block, block, w // block, block).swapaxes(1, 2)
    return tiles.reshape(-1, block, block)


def merge_blocks(tiles: np.ndarray, height: int, width: int) -> np.ndarray:
    """Inverse of :func:`split_blocks`."""
    block = tiles.shape[-1]
    grid = tiles.reshape(height // block, width // block, block, block).swapaxes(1, 2)
    return grid.reshape(height, width)


def map_stats(maps: ScatteringMaps | np.ndarray) -> np.ndarray:
    """Interleaved (mean, population variance) of each map, length 2 * n_maps."""
    arr = maps.maps if isinstance(maps, ScatteringMaps) else np.asarray(maps, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.shape[0] == 0:
        raise ValueError("no maps to summarize")
    flat = arr.reshape(arr.shape[0], -1)
    mean = flat.mean(axis=1)
    var = np.mean((flat - mean[:, None]) ** 2, axis=1)
    return np.stack([mean, var], axis=1).ravel()


def extract_features(image: np.ndarray, schema: FeatureSchema, bank: FilterBank) -> np.ndarray:
    """Feature vector of one image: block-major, then path order, then (mean, var).

    ``image`` holds intensities already scaled to [0, 1].
    """
    schema.check_bank(bank)
    image = np.asarray(image, dtype=np.float64)
    if image.shape != (schema.image_size, schema.image_size):
        raise ValueError(
            f"image shape {image.shape} does not match schema size {schema.image_size}"
        )
    return block_stats(split_blocks(image, schema.block_size), bank, schema.m).ravel()


def extract_many(images, schema: FeatureSchema, bank: FilterBank, progress=None) -> np.ndarray:
    """Stack feature vectors for an iterable of images into an (N, dim) array."""
    rows = []
    for i, img in enumerate(images):
        rows.append(extract_features(img, schema, bank))
        if progress is not None:
            progress(i + 1)
    if not rows:
        return np.empty((0, schema.dim))
    return np.vstack(rows)
