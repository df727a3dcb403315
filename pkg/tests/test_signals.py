import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from scatstab import (
    Grid, Signal, delta, fft_convolve, fourier_multiplier, japanese_bracket, l1_norm, l2_norm,
    load_signal, read_pgm, save_signal, subsample, write_pgm,
)
from conftest import random_signal


def test_grid_coordinates_are_centered():
    g = Grid.regular(1, 8, 4.0)
    assert g.spacing == 0.5
    assert g.origin == (-2.0,)
    np.testing.assert_array_equal(g.axis(0), -2.0 + 0.5 * np.arange(8))
    assert g.points().shape == (8, 1)
    assert Grid.regular(2, 4, 1.0).points().shape == (4, 4, 2)


@pytest.mark.parametrize("extent", [(3,), (1,), (6, 8)])
def test_grid_rejects_bad_extents(extent):
    with pytest.raises(ValueError):
        Grid(len(extent), extent, 1.0)


def test_grid_rejects_bad_spacing():
    with pytest.raises(ValueError):
        Grid(1, (8,), 0.0)


def test_refined_and_decimated_grids():
    g = Grid.regular(1, 16, 4.0)
    fine = g.refined(2)
    assert fine.extent == (32,) and fine.lengths == g.lengths
    coarse = g.decimated(4)
    assert coarse.extent == (4,) and coarse.spacing == g.spacing
    with pytest.raises(ValueError):
        g.decimated(3)


def test_l2_norm_zero_signal():
    assert l2_norm(Signal.zeros(Grid(1, (8,), 1.0))) == 0.0


def test_l2_norm_single_sample():
    f = Signal(Grid(1, (4,), 0.5), [2, 0, 0, 0])
    assert l2_norm(f) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_l2_norm_of_indicator_matches_integral():
    g = Grid(1, (8192,), 2.0**-10)
    x = g.points()[..., 0]
    f = Signal(g, ((x >= -1) & (x < 1)).astype(float))
    assert abs(l2_norm(f) - math.sqrt(2)) < 1e-3


def test_l2_norm_of_gaussian_matches_quadrature():
    g = Grid.regular(1, 1024, 16.0)
    f = Signal.from_function(g, lambda p: np.exp(-p[..., 0] ** 2 / 0.7**2))
    exact, _ = integrate.quad(lambda x: math.exp(-2 * x * x / 0.7**2), -np.inf, np.inf)
    assert l2_norm(f) == pytest.approx(math.sqrt(exact), rel=1e-10)


def test_parseval_under_documented_normalization(rng, grid2):
    f = random_signal(grid2, rng)
    spectral = grid2.cell_volume / grid2.size * np.sum(np.abs(np.fft.fftn(f.samples)) ** 2)
    assert l2_norm(f) ** 2 == pytest.approx(spectral, rel=1e-12)


def test_convolution_with_delta_is_identity(rng, grid1):
    f = random_signal(grid1, rng)
    np.testing.assert_allclose(fft_convolve(f, delta(grid1)).samples, f.samples, atol=1e-12)


def test_convolution_matches_direct_circular_sum(rng):
    g = Grid.regular(1, 16, 4.0)
    f, h = random_signal(g, rng, envelope=False), random_signal(g, rng, envelope=False)
    n, c = 16, 8  # origin of h sits at index n // 2
    direct = np.array([
        sum(f.samples[j] * h.samples[(k - j + c) % n] for j in range(n)) for k in range(n)
    ]) * g.spacing
    np.testing.assert_allclose(fft_convolve(f, h).samples, direct, atol=1e-12)


def test_box_convolution_is_a_triangle():
    g = Grid(1, (4096,), 2.0**-9)
    x = g.points()[..., 0]
    box = Signal(g, ((x >= 0) & (x < 1)).astype(float))
    tri = fft_convolve(box, box).samples.real
    expected = np.clip(1 - np.abs(x - 1), 0, None)
    assert np.max(np.abs(tri - expected)) <= 2 * g.spacing
    assert abs(x[np.argmax(tri)] - 1) <= g.spacing


def test_convolution_commutes(rng, grid2):
    f, h = random_signal(grid2, rng), random_signal(grid2, rng)
    diff = fft_convolve(f, h) - fft_convolve(h, f)
    assert l2_norm(diff) <= 1e-12 * l2_norm(fft_convolve(f, h))


@given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=10),
       st.complex_numbers(max_magnitude=10))
def test_convolution_is_bilinear(seed, a, b):
    rng = np.random.default_rng(seed)
    g = Grid.regular(1, 64, 8.0)
    f1, f2, h = (random_signal(g, rng) for _ in range(3))
    lhs = fft_convolve(f1 * a + f2 * b, h).samples
    rhs = a * fft_convolve(f1, h).samples + b * fft_convolve(f2, h).samples
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + np.abs(rhs).max()))


@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2]))
def test_young_inequality(seed, dim):
    rng = np.random.default_rng(seed)
    g = Grid.regular(dim, 64 if dim == 1 else 16, 8.0)
    f, h = random_signal(g, rng), random_signal(g, rng)
    assert l2_norm(fft_convolve(f, h)) <= l1_norm(h) * l2_norm(f) * (1 + 1e-10)


def test_fourier_multiplier_of_gaussian_is_its_transform():
    g = Grid.regular(1, 512, 32.0)
    w = 1.3
    f = Signal.from_function(g, lambda p: np.exp(-p[..., 0] ** 2 / w**2))
    xi = g.frequencies()[..., 0]
    exact = w * math.sqrt(math.pi) * np.exp(-(math.pi * w * xi) ** 2)
    np.testing.assert_allclose(fourier_multiplier(f), exact, atol=1e-12)


def test_subsample_identity_for_factor_one(rng, grid1):
    f = random_signal(grid1, rng)
    assert subsample(f, 1) is f


def test_subsample_small_example():
    out = subsample(Signal(Grid(1, (4,), 1.0), [1, 0, 1, 0]), 2)
    np.testing.assert_allclose(out.samples, [math.sqrt(2), math.sqrt(2)])
    assert out.grid.extent == (2,)


@pytest.mark.parametrize("dim", [1, 2])
def test_subsample_preserves_norm_for_block_constant(rng, dim):
    g = Grid.regular(dim, 32 if dim == 1 else 16, 4.0)
    coarse = rng.standard_normal(tuple(n // 2 for n in g.extent))
    blocks = coarse
    for ax in range(dim):
        blocks = np.repeat(blocks, 2, axis=ax)
    f = Signal(g, blocks)
    # block-constant signals keep the energy of their block values, weighted by block volume
    assert l2_norm(subsample(f, 2)) == pytest.approx(l2_norm(f), rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4]))
def test_subsample_of_lowpass_signal_does_not_gain_energy(seed, factor):
    rng = np.random.default_rng(seed)
    g = Grid.regular(1, 256, 16.0)
    spectrum = np.fft.fft(rng.standard_normal(256) + 1j * rng.standard_normal(256))
    nyq_out = 0.5 / (factor * g.spacing)
    spectrum[np.abs(g.frequencies()[..., 0]) >= 0.9 * nyq_out] = 0
    f = Signal(g, np.fft.ifft(spectrum))
    assert l2_norm(subsample(f, factor)) <= l2_norm(f) * (1 + 1e-10)


def test_subsample_rejects_bad_factor(grid1):
    with pytest.raises(ValueError):
        subsample(Signal.zeros(grid1), 0)


def test_japanese_bracket_values():
    assert japanese_bracket(0.0) == 1.0
    assert japanese_bracket(np.array([1.0, 1.0, 1.0])) == pytest.approx(2.0)
    assert japanese_bracket(3.0) == pytest.approx(math.sqrt(10))


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=2),
       st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=2))
def test_japanese_bracket_is_monotone(x, y):
    x, y = np.asarray(x), np.asarray(y)
    if np.linalg.norm(x) <= np.linalg.norm(y):
        assert japanese_bracket(x) <= japanese_bracket(y)
    else:
        assert japanese_bracket(x) >= japanese_bracket(y)


def test_signals_are_immutable(grid1):
    f = Signal.zeros(grid1)
    with pytest.raises(ValueError):
        f.samples[0] = 1.0


def test_signal_shape_mismatch_rejected(grid1):
    with pytest.raises(ValueError):
        Signal(grid1, np.zeros(10))


def test_arithmetic_requires_same_grid(grid1):
    with pytest.raises(ValueError):
        Signal.zeros(grid1) + Signal.zeros(Grid.regular(1, 128, 16.0))


@pytest.mark.parametrize("dim", [1, 2])
def test_scs_round_trip(tmp_path, rng, dim):
    g = Grid.regular(dim, 16, 3.0)
    f = random_signal(g, rng)
    save_signal(f, tmp_path / "f.scs")
    data = (tmp_path / "f.scs").read_bytes()
    assert data[:4] == b"SCS1" and len(data) == 32 + 16 * g.size
    back = load_signal(tmp_path / "f.scs")
    assert back.grid == g
    np.testing.assert_array_equal(back.samples, f.samples)


def test_scs_rejects_corrupt_files(tmp_path):
    (tmp_path / "bad.scs").write_bytes(b"NOPE" + bytes(28))
    with pytest.raises(ValueError):
        load_signal(tmp_path / "bad.scs")
    (tmp_path / "short.scs").write_bytes(b"SCS1")
    with pytest.raises(ValueError):
        load_signal(tmp_path / "short.scs")


def test_pgm_round_trip(tmp_path):
    g = Grid(2, (8, 16), 1.0)
    values = np.arange(128).reshape(8, 16) * 2
    write_pgm(Signal(g, values.astype(float)), tmp_path / "im.pgm", vmin=0, vmax=255)
    back = read_pgm(tmp_path / "im.pgm")
    assert back.grid.extent == (8, 16)
    np.testing.assert_allclose(back.samples.real * 255, values, atol=1e-9)


def test_pgm_pads_to_powers_of_two(tmp_path):
    raster = bytes(range(15))
    (tmp_path / "odd.pgm").write_bytes(b"P5\n# comment\n5 3\n255\n" + raster)
    f = read_pgm(tmp_path / "odd.pgm")
    assert f.grid.extent == (4, 8)
    np.testing.assert_allclose(f.samples.real[0:3, 1:6] * 255, np.arange(15).reshape(3, 5))
    assert f.samples.real[3].sum() == 0 and f.samples.real[:, 0].sum() == 0


def test_pgm_rejects_other_formats(tmp_path):
    (tmp_path / "x.pgm").write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(ValueError):
        read_pgm(tmp_path / "x.pgm")
