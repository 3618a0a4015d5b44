"""Scattering cascade: wavelet convolution, complex modulus, low-pass averaging.

Scale index ``j`` grows toward coarser scales. A path ``(j1, l1), (j2, l2), ...``
is admissible when its scales strictly increase: the envelope
``|f * psi_{j1}|`` only carries energy below the band of ``psi_{j1}``, so
only coarser second-layer wavelets see anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from math import comb

import numpy as np
from scipy import fft

from .filterbank import FilterBank


@dataclass(frozen=True, order=True)
class ScatteringPath:
    scales: tuple[int, ...] = ()
    orientations: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.scales) != len(self.orientations):
            raise ValueError("scales and orientations must have equal length")
        if any(a >= b for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError(f"scales must strictly increase, got {self.scales}")

    @property
    def layer(self) -> int:
        return len(self.scales)

    def __str__(self):
        if not self.scales:
            return "S0"
        return "S" + "".join(f"({j},{l})" for j, l in zip(self.scales, self.orientations))


@dataclass(frozen=True)
class ScatteringMaps:
    paths: list[ScatteringPath]
    maps: np.ndarray  # (n_paths, size, size)

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(zip(self.paths, self.maps))


def path_count(J: int, p: int, m: int) -> int:
    return sum(p**k * comb(J, k) for k in range(m + 1))


def enumerate_paths(J: int, p: int, m: int) -> list[ScatteringPath]:
    """All admissible paths of layers 0..m, layer-major then lexicographic."""
    if m > J:
        raise ValueError(f"layer count m={m} exceeds scale count J={J}")
    if m < 0:
        raise ValueError(f"layer count must be non-negative, got {m}")
    paths = []
    for k in range(m + 1):
        for scales in combinations(range(J), k):
            for orients in product(range(p), repeat=k):
                paths.append(ScatteringPath(scales, orients))
    return paths


def circular_convolve(image: np.ndarray, filter_hat: np.ndarray) -> np.ndarray:
    """Circular convolution of ``image`` with a filter given by its 2-D DFT.

    Leading axes of ``image`` broadcast against those of ``filter_hat``.
    """
    image = np.asarray(image)
    filter_hat = np.asarray(filter_hat)
    if image.shape[-2:] != filter_hat.shape[-2:]:
        raise ValueError(
            f"image grid {image.shape[-2:]} does not match filter grid {filter_hat.shape[-2:]}"
        )
    return fft.ifft2(fft.fft2(image) * filter_hat)


def _propagate(blocks: np.ndarray, bank: FilterBank, m: int) -> list[np.ndarray]:
    """Modulus signals U of every path, grouped by layer.

    ``blocks`` has shape (B, n, n). Layer k is returned with shape
    (B, P_k, n, n), paths in canonical order. Layer 0 is the input itself.
    """
    B, n, _ = blocks.shape
    psi = bank.psi_hat
    J, p = bank.J, bank.p
    layers = [blocks[:, None]]
    if m == 0:
        return layers

    u1 = np.abs(fft.ifft2(fft.fft2(blocks)[:, None, None] * psi[None], overwrite_x=True))
    layers.append(u1.reshape(B, J * p, n, n))

    prev_paths = [((j,), (l,)) for j in range(J) for l in range(p)]
    for _ in range(2, m + 1):
        prev_hat = fft.fft2(layers[-1])
        groups = {}
        for idx, (scales, _orients) in enumerate(prev_paths):
            if scales[-1] + 1 < J:
                groups.setdefault(scales[-1], []).append(idx)
        parts, part_paths = [], []
        for last, idxs in groups.items():
            coarser = psi[last + 1:]  # (Jc, p, n, n)
            # (B, len(idxs), Jc, p, n, n)
            u = np.abs(fft.ifft2(prev_hat[:, idxs, None, None] * coarser[None, None], overwrite_x=True))
            parts.append(u.reshape(B, -1, n, n))
            for i in idxs:
                scales, orients = prev_paths[i]
                for dj in range(coarser.shape[0]):
                    for l in range(p):
                        part_paths.append((scales + (last + 1 + dj,), orients + (l,)))
        order = sorted(range(len(part_paths)), key=part_paths.__getitem__)
        prev_paths = [part_paths[i] for i in order]
        layers.append(np.concatenate(parts, axis=1)[:, order])
    return layers


def _check_blocks(blocks, bank, m):
    blocks = np.asarray(blocks, dtype=np.float64)
    if blocks.ndim != 3 or blocks.shape[1:] != (bank.size, bank.size):
        raise ValueError(
            f"blocks of shape {blocks.shape[1:]} do not match bank grid {bank.size}x{bank.size}"
        )
    if not 0 <= m <= bank.J:
        raise ValueError(f"layer count m={m} must lie in [0, J={bank.J}]")
    return blocks


def transform_blocks(blocks: np.ndarray, bank: FilterBank, m: int) -> np.ndarray:
    """Scattering maps for a stack of blocks, shape (B, n_paths, n, n)."""
    blocks = _check_blocks(blocks, bank, m)
    n = bank.size
    phi_half = bank.phi_hat[:, : n // 2 + 1]
    out = [fft.irfft2(fft.rfft2(u) * phi_half, s=(n, n)) for u in _propagate(blocks, bank, m)]
    return np.concatenate(out, axis=1)


def block_stats(blocks: np.ndarray, bank: FilterBank, m: int) -> np.ndarray:
    """Mean and population variance of every scattering map, shape (B, n_paths, 2).

    Equivalent to taking the statistics of :func:`transform_blocks`, but reads
    them off the half spectra: the mean is the DC bin and, by Parseval, the
    variance is the low-passed energy of the non-DC bins.
    """
    blocks = _check_blocks(blocks, bank, m)
    n = bank.size
    n2 = n * n
    half = n // 2 + 1
    # rfft2 keeps columns 0..n/2; the others are conjugate mirrors
    weight = bank.phi_hat[:, :half] ** 2
    weight[:, 1 : n // 2] *= 2.0
    weight[0, 0] = 0.0
    out = []
    for u in _propagate(blocks, bank, m):
        u_hat = fft.rfft2(u)
        mean = u_hat[..., 0, 0].real * bank.phi_hat[0, 0] / n2
        power = u_hat.real**2 + u_hat.imag**2
        var = np.einsum("bkxy,xy->bk", power, weight) / n2**2
        out.append(np.stack([mean, var], axis=-1))
    return np.concatenate(out, axis=1)


def transform_block(block: np.ndarray, bank: FilterBank, m: int = 2) -> ScatteringMaps:
    """Scattering transform of one block up to layer ``m``, at full resolution.

    Layer 0 is ``f * phi``; layer k applies k rounds of wavelet convolution
    and modulus along an admissible path before the final ``* phi``.
    All convolutions are circular.
    """
    block = np.asarray(block, dtype=np.float64)
    if block.shape != (bank.size, bank.size):
        raise ValueError(f"block shape {block.shape} does not match bank grid {bank.size}")
    maps = transform_blocks(block[None], bank, m)[0]
    return ScatteringMaps(enumerate_paths(bank.J, bank.p, m), maps)
