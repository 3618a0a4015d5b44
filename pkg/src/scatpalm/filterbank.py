"""Directional Morlet filter bank built on the discrete frequency grid."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FilterBankConfig:
    """Parameters of a J-scale, p-orientation Morlet bank on a size x size grid.

    ``sigma0`` is the spatial Gaussian width of the mother wavelet, ``xi0``
    its center frequency in radians per pixel and ``slant`` the ratio of the
    along-oscillation to across-oscillation spatial width.
    """

    J: int = 5
    p: int = 6
    size: int = 32
    sigma0: float = 0.8
    xi0: float = 3 * math.pi / 4
    slant: float = 0.5

    def __post_init__(self):
        if self.J < 1 or self.p < 1:
            raise ValueError(f"J and p must be positive, got J={self.J}, p={self.p}")
        if self.size < 2 or self.size & (self.size - 1):
            raise ValueError(f"size must be a power of two, got {self.size}")
        if 2**self.J > self.size:
            raise ValueError(f"2**J = {2**self.J} exceeds grid size {self.size}")
        if self.sigma0 <= 0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")
        if not 0 < self.xi0 < math.pi:
            raise ValueError(f"xi0 must lie in (0, pi), got {self.xi0}")
        if not 0 < self.slant <= 1:
            raise ValueError(f"slant must lie in (0, 1], got {self.slant}")


@dataclass(frozen=True, eq=False)
class FilterBank:
    config: FilterBankConfig
    psi_hat: np.ndarray  # (J, p, size, size) complex
    phi_hat: np.ndarray  # (size, size) real
    lp_max: float = field(default=0.0)
    lp_min_annulus: float = field(default=0.0)

    @property
    def J(self) -> int:
        return self.config.J

    @property
    def p(self) -> int:
        return self.config.p

    @property
    def size(self) -> int:
        return self.config.size

    @property
    def n_wavelets(self) -> int:
        return self.J * self.p


def frequency_grid(size: int) -> tuple[np.ndarray, np.ndarray]:
    """Angular frequencies (rows, cols) in FFT order, each in [-pi, pi)."""
    w = 2 * np.pi * np.fft.fftfreq(size)
    return np.meshgrid(w, w, indexing="ij")


def _gaussian_hat(wy, wx, sigma, slant, theta, center):
    # Fourier transform of a unit-mass anisotropic Gaussian with spatial std
    # sigma along theta and sigma/slant across it, shifted to `center` along theta.
    # Summing over the 3x3 neighbouring periods aliases it onto the sampled grid.
    c, s = math.cos(theta), math.sin(theta)
    out = np.zeros_like(wy)
    for ky in (-1, 0, 1):
        for kx in (-1, 0, 1):
            uy = wy + 2 * np.pi * ky
            ux = wx + 2 * np.pi * kx
            along = ux * c + uy * s - center
            across = -ux * s + uy * c
            out += np.exp(-0.5 * sigma**2 * (along**2 + (across / slant) ** 2))
    return out


def littlewood_paley(psi_hat: np.ndarray, phi_hat: np.ndarray) -> np.ndarray:
    """Symmetrized Littlewood-Paley sum evaluated on every frequency bin."""
    energy = np.sum(np.abs(psi_hat) ** 2, axis=(0, 1))
    # index -k modulo size, i.e. the response at -omega
    mirrored = np.roll(energy[::-1, ::-1], 1, axis=(0, 1))
    return 0.5 * (energy + mirrored) + np.abs(phi_hat) ** 2


def build_filter_bank(cfg: FilterBankConfig) -> FilterBank:
    """Build the frequency-domain wavelets psi[j, l] and the low-pass phi.

    Wavelet ``(j, l)`` has spatial width ``sigma0 * 2**j``, center frequency
    ``xi0 / 2**j`` and orientation ``pi * l / p``. Each wavelet has its DC
    response cancelled by subtracting a scaled copy of its own envelope.
    The low-pass is a Gaussian of width ``sigma0 * 2**(J-1)`` with unit DC
    gain. The wavelets are then multiplied by one common scalar so that the
    Littlewood-Paley sum never exceeds one.
    """
    wy, wx = frequency_grid(cfg.size)
    psi = np.empty((cfg.J, cfg.p, cfg.size, cfg.size), dtype=np.complex128)
    for j in range(cfg.J):
        sigma = cfg.sigma0 * 2**j
        xi = cfg.xi0 / 2**j
        for l in range(cfg.p):
            theta = math.pi * l / cfg.p
            gabor = _gaussian_hat(wy, wx, sigma, cfg.slant, theta, xi)
            envelope = _gaussian_hat(wy, wx, sigma, cfg.slant, theta, 0.0)
            psi[j, l] = gabor - (gabor[0, 0] / envelope[0, 0]) * envelope

    phi = _gaussian_hat(wy, wx, cfg.sigma0 * 2 ** (cfg.J - 1), 1.0, 0.0, 0.0)
    phi /= phi[0, 0]

    wavelet_energy = littlewood_paley(psi, np.zeros_like(phi))
    headroom = 1.0 - phi**2
    active = wavelet_energy > 0
    scale = math.sqrt(float(np.min(headroom[active] / wavelet_energy[active])))
    psi *= scale

    lp = littlewood_paley(psi, phi)
    psi.setflags(write=False)
    phi.setflags(write=False)
    lp_max, lp_min = _lp_stats(lp, cfg)
    return FilterBank(cfg, psi, phi, lp_max, lp_min)


def _lp_stats(lp: np.ndarray, cfg: FilterBankConfig) -> tuple[float, float]:
    wy, wx = frequency_grid(cfg.size)
    radius = np.hypot(wy, wx)
    band = (radius >= math.pi / 2**cfg.J) & (radius <= 0.75 * math.pi)
    return float(lp.max()), float(lp[band].min())


def littlewood_paley_report(bank: FilterBank) -> tuple[float, float]:
    """Return ``(lp_max, lp_min_annulus)`` recomputed from the bank's filters.

    ``lp_min_annulus`` is the minimum over bins whose radial frequency lies in
    ``[pi / 2**J, 3 pi / 4]``.
    """
    return _lp_stats(littlewood_paley(bank.psi_hat, bank.phi_hat), bank.config)


def spatial_filters(bank: FilterBank) -> tuple[np.ndarray, np.ndarray]:
    """Spatial-domain filters, centered with fftshift for display."""
    psi = np.fft.fftshift(np.fft.ifft2(bank.psi_hat), axes=(-2, -1))
    phi = np.fft.fftshift(np.fft.ifft2(bank.phi_hat).real)
    return psi, phi


def _to_uint8(img: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(img))
    if peak == 0:
        return np.full(img.shape, 128, dtype=np.uint8)
    return np.round(127.5 + 127.5 * img / peak).astype(np.uint8)


def write_pgm(path: str, img: np.ndarray) -> None:
    """Write an 8-bit image as binary PGM (P5)."""
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def dump_filters(bank: FilterBank, directory: str) -> int:
    """Write each spatial filter as an 8-bit PGM image; return the file count.

    Wavelets produce ``psi_j{j}_l{l}_re.pgm`` and ``psi_j{j}_l{l}_im.pgm``,
    the low-pass produces ``phi.pgm``. Each image is scaled by its own peak
    amplitude so that zero maps to mid-gray.
    """
    psi, phi = spatial_filters(bank)
    os.makedirs(directory, exist_ok=True)
    count = 0
    images = [("phi.pgm", phi)]
    for j in range(bank.J):
        for l in range(bank.p):
            images.append((f"psi_j{j}_l{l}_re.pgm", psi[j, l].real))
            images.append((f"psi_j{j}_l{l}_im.pgm", psi[j, l].imag))
    for name, img in images:
        path = os.path.join(directory, name)
        try:
            write_pgm(path, _to_uint8(img))
        except OSError as exc:
            raise OSError(f"cannot write filter image {path}: {exc}") from exc
        count += 1
    return count
