import math

import numpy as np
import pytest

from scatpalm.filterbank import (
    FilterBankConfig,
    build_filter_bank,
    dump_filters,
    frequency_grid,
    littlewood_paley_report,
)


def lp_sum_bruteforce(bank):
    """Littlewood-Paley sum bin by bin, with -omega taken modulo the grid."""
    n = bank.size
    out = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            ma, mb = (-a) % n, (-b) % n
            s = 0.0
            for j in range(bank.J):
                for l in range(bank.p):
                    s += abs(bank.psi_hat[j, l, a, b]) ** 2 + abs(bank.psi_hat[j, l, ma, mb]) ** 2
            out[a, b] = 0.5 * s + bank.phi_hat[a, b] ** 2
    return out


def test_default_bank_shape(default_bank):
    assert default_bank.psi_hat.shape == (5, 6, 32, 32)
    assert default_bank.n_wavelets == 30
    assert default_bank.phi_hat.shape == (32, 32)


def test_single_filter_bank():
    bank = build_filter_bank(FilterBankConfig(J=1, p=1, size=8))
    assert bank.psi_hat.shape == (1, 1, 8, 8)
    assert abs(bank.psi_hat[0, 0, 0, 0]) <= 1e-6 * np.abs(bank.psi_hat).max()


@pytest.mark.parametrize("kwargs", [
    dict(size=48), dict(size=31), dict(J=6, size=32), dict(J=0), dict(p=0),
    dict(xi0=math.pi), dict(slant=0.0), dict(sigma0=-1.0),
])
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        FilterBankConfig(**kwargs)


def test_lp_max_against_bruteforce():
    bank = build_filter_bank(FilterBankConfig(J=3, p=4, size=64))
    lp = lp_sum_bruteforce(bank)
    assert 0.9 <= lp.max() <= 1.0 + 1e-6
    assert bank.lp_max == pytest.approx(lp.max(), abs=1e-12)


def test_lp_report_default(default_bank):
    lp_max, lp_min = littlewood_paley_report(default_bank)
    assert lp_max <= 1.0 + 1e-6
    # regression baseline measured at build time: 0.4608
    assert lp_min > 0.1
    assert lp_min == pytest.approx(0.46079, abs=1e-4)


def test_fewer_orientations_cover_less(default_bank):
    one = build_filter_bank(FilterBankConfig(p=1))
    assert littlewood_paley_report(one)[1] < littlewood_paley_report(default_bank)[1]


def test_dc_and_lowpass(default_bank):
    psi = default_bank.psi_hat
    peak = np.abs(psi).max(axis=(2, 3))
    assert np.all(np.abs(psi[:, :, 0, 0]) <= 1e-6 * peak)
    assert default_bank.phi_hat[0, 0] == pytest.approx(1.0, abs=1e-15)


def test_spatial_wavelets_have_zero_mean(default_bank):
    spatial = np.fft.ifft2(default_bank.psi_hat)
    mean = np.abs(spatial.mean(axis=(2, 3)))
    assert np.all(mean <= 1e-6 * np.abs(spatial).max(axis=(2, 3)))


def _rotated_dtft(spatial, theta):
    # DTFT of the sampled filter evaluated on the grid rotated by -theta
    n = spatial.shape[0]
    x = np.fft.fftfreq(n) * n
    Y, X = np.meshgrid(x, x, indexing="ij")
    wy, wx = frequency_grid(n)
    c, s = math.cos(theta), math.sin(theta)
    ux, uy = c * wx + s * wy, -s * wx + c * wy
    phase = np.exp(-1j * (np.multiply.outer(uy, Y) + np.multiply.outer(ux, X)))
    return np.einsum("abxy,xy->ab", phase, spatial)


@pytest.mark.parametrize("size,J,scales", [(32, 5, (1, 2)), (64, 6, (1, 2, 3))])
def test_orientations_are_rotations(size, J, scales):
    # scales whose envelope is resolved both in frequency (below Nyquist) and in space
    # (inside the grid); the finest reaches past Nyquist, the coarsest wrap spatially
    bank = build_filter_bank(FilterBankConfig(J=J, p=6, size=size))
    for j in scales:
        base = np.fft.ifft2(bank.psi_hat[j, 0])
        for l in range(1, 6):
            target = bank.psi_hat[j, l]
            rotated = _rotated_dtft(base, math.pi * l / 6)
            rel = np.sum(np.abs(rotated - target) ** 2) / np.sum(np.abs(target) ** 2)
            assert rel <= 0.10, (j, l, rel)


def test_scale_halves_radial_frequency():
    bank = build_filter_bank(FilterBankConfig(J=5, p=6, size=256))
    wy, wx = frequency_grid(256)
    radius = np.hypot(wy, wx)
    for l in range(6):
        centroid = []
        for j in range(5):
            energy = np.abs(bank.psi_hat[j, l]) ** 2
            centroid.append(np.sum(radius * energy) / np.sum(energy))
        ratios = np.array(centroid[1:]) / np.array(centroid[:-1])
        assert np.all((ratios >= 0.45) & (ratios <= 0.55)), ratios


def test_construction_is_deterministic():
    a = build_filter_bank(FilterBankConfig())
    b = build_filter_bank(FilterBankConfig())
    assert a.psi_hat.tobytes() == b.psi_hat.tobytes()
    assert a.phi_hat.tobytes() == b.phi_hat.tobytes()


def test_bank_is_read_only(default_bank):
    with pytest.raises(ValueError):
        default_bank.psi_hat[0, 0, 0, 0] = 1.0


def _read_pgm(path):
    data = open(path, "rb").read()
    magic, dims, maxval, rest = data.split(b"\n", 3)
    assert magic == b"P5" and maxval == b"255"
    w, h = map(int, dims.split())
    return np.frombuffer(rest, dtype=np.uint8).reshape(h, w)


def test_dump_filters_counts(tmp_path, default_bank):
    assert dump_filters(default_bank, tmp_path / "full") == 61
    names = {p.name for p in (tmp_path / "full").iterdir()}
    assert "phi.pgm" in names and "psi_j4_l5_im.pgm" in names and len(names) == 61
    small = build_filter_bank(FilterBankConfig(J=1, p=1, size=8))
    assert dump_filters(small, tmp_path / "small") == 3


def test_dumped_lowpass_is_symmetric(tmp_path, default_bank):
    dump_filters(default_bank, tmp_path)
    img = _read_pgm(tmp_path / "phi.pgm").astype(int)
    # index 0 is x = -n/2, which has no mirror inside the grid
    core = img[1:, 1:]
    assert np.array_equal(core, core.T)
    assert np.array_equal(core, core[::-1, ::-1])


def test_dump_filters_reports_path(tmp_path, default_bank):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        dump_filters(default_bank, str(blocker))
