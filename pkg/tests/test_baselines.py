import numpy as np
import pytest

from mmreg.baselines import (
    PhaseSlopeConfig,
    UpsampleConfig,
    register_phase_slope,
    register_upsampled_dft,
)
from mmreg.datagen import draw_mixture, synth_gaussian
from mmreg.errors import ConstantImageError, DimensionMismatchError, RankDeficientError
from mmreg.grid import Grid, circular_shift


def fourier_shift(values, dx, dy):
    h, w = values.shape
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    return np.fft.ifft2(np.fft.fft2(values) * np.exp(-2j * np.pi * (fx * dx + fy * dy))).real


@pytest.fixture(scope="module")
def mixture_image():
    return synth_gaussian(draw_mixture(np.random.default_rng(21)))


@pytest.mark.parametrize("register_fn", [register_upsampled_dft, register_phase_slope])
def test_identical_images(mixture_image, register_fn):
    d = register_fn(mixture_image, mixture_image)
    assert abs(d.dx) <= 1e-9 and abs(d.dy) <= 1e-9


def test_upsampled_integer_shift_exact(mixture_image):
    d = register_upsampled_dft(mixture_image, circular_shift(mixture_image, 3, -2))
    assert (d.dx, d.dy) == (3.0, -2.0)


@pytest.mark.parametrize("kappa, dx, dy", [(16, 5 / 16, -7 / 16), (100, 0.27, 0.41), (20, -0.5, 0.05)])
def test_upsampled_on_grid_fourier_shift(mixture_image, kappa, dx, dy):
    target = fourier_shift(mixture_image.values, dx, dy)
    d = register_upsampled_dft(mixture_image, target, UpsampleConfig(kappa=kappa))
    assert d.dx == pytest.approx(dx, abs=1e-12) and d.dy == pytest.approx(dy, abs=1e-12)


def test_upsampled_error_bound_off_grid(mixture_image):
    kappa = 16
    for dx, dy in [(0.1, -0.2), (0.33, 0.47), (-0.49, 0.01)]:
        d = register_upsampled_dft(mixture_image, fourier_shift(mixture_image.values, dx, dy), UpsampleConfig(kappa))
        assert abs(d.dx - dx) <= 1 / (2 * kappa) + 1e-12
        assert abs(d.dy - dy) <= 1 / (2 * kappa) + 1e-12


def test_upsample_config_validation():
    with pytest.raises(ValueError):
        UpsampleConfig(kappa=1)
    with pytest.raises(ValueError):
        UpsampleConfig(kappa=2.5)


def test_phase_slope_sinusoid_half_pixel():
    n = 64
    y, x = np.mgrid[0:n, 0:n].astype(float)
    ref = np.cos(2 * np.pi * x / n) + np.cos(2 * np.pi * y / n)
    target = np.cos(2 * np.pi * (x - 0.5) / n) + np.cos(2 * np.pi * y / n)
    for cfg in [PhaseSlopeConfig(), PhaseSlopeConfig(weighted=False)]:
        d = register_phase_slope(ref, target, cfg)
        assert d.dx == pytest.approx(0.5, abs=1e-6)
        assert d.dy == pytest.approx(0.0, abs=1e-6)


def test_phase_slope_fourier_shift(mixture_image):
    d = register_phase_slope(mixture_image, fourier_shift(mixture_image.values, 0.25, -0.375))
    assert d.dx == pytest.approx(0.25, abs=1e-9) and d.dy == pytest.approx(-0.375, abs=1e-9)


def test_phase_slope_integer_plus_fraction(mixture_image):
    shifted = fourier_shift(circular_shift(mixture_image, 6, -11).values, 0.3, 0.2)
    d = register_phase_slope(mixture_image, shifted)
    assert d.dx == pytest.approx(6.3, abs=1e-9) and d.dy == pytest.approx(-10.8, abs=1e-9)


def test_phase_slope_rank_deficient():
    n = 32
    x = np.arange(n, dtype=float)
    ref = np.tile(np.cos(2 * np.pi * 2 * x / n), (n, 1))
    with pytest.raises(RankDeficientError):
        register_phase_slope(ref, ref)


@pytest.mark.parametrize("cfg", [PhaseSlopeConfig(), PhaseSlopeConfig(weighted=False, tukey_alpha=0.5)])
def test_phase_slope_dataset1_pair(cfg):
    spec = draw_mixture(np.random.default_rng(11))
    d = register_phase_slope(synth_gaussian(spec), synth_gaussian(spec.with_shift(0.25, -0.375)), cfg)
    assert abs(d.dx - 0.25) < 0.05 and abs(d.dy + 0.375) < 0.05


def test_upsampled_dataset2_pair():
    from mmreg.datagen import disk_source, make_dataset2

    tiles = make_dataset2(disk_source(seed=1, size=600, disk_radius=150, sigma_range=(16, 40)), 16, 32)
    ref = next(g for g, t in tiles if (t.dx, t.dy) == (0, 0))
    image, truth = next((g, t) for g, t in tiles if (t.dx, t.dy) == (5 / 16, -7 / 16))
    d = register_upsampled_dft(ref, image, UpsampleConfig(kappa=16))
    assert (d.dx, d.dy) == (0.3125, -0.4375)


@pytest.mark.parametrize("register_fn", [register_upsampled_dft, register_phase_slope])
def test_errors(register_fn, rng):
    with pytest.raises(DimensionMismatchError):
        register_fn(rng.random((8, 8)), rng.random((9, 8)))
    with pytest.raises(ConstantImageError):
        register_fn(rng.random((8, 8)), np.zeros((8, 8)))


@pytest.mark.parametrize("register_fn", [register_upsampled_dft, register_phase_slope])
@pytest.mark.parametrize("k", [1e-3, 1e3])
def test_gain_invariance(dataset1, register_fn, k):
    ref, target, _ = dataset1[2]
    base = register_fn(ref, target)
    d = register_fn(Grid(k * ref.values), Grid(k * target.values))
    assert abs(d.dx - base.dx) <= 1e-12 and abs(d.dy - base.dy) <= 1e-12


@pytest.mark.parametrize("register_fn", [register_upsampled_dft, register_phase_slope])
@pytest.mark.parametrize("sx, sy", [(5, -9), (-64, 33)])
def test_joint_shift_equivariance(dataset1, register_fn, sx, sy):
    ref, target, _ = dataset1[3]
    base = register_fn(ref, target)
    d = register_fn(circular_shift(ref, sx, sy), circular_shift(target, sx, sy))
    assert d == base


def test_phase_slope_config_rho():
    with pytest.raises(ValueError):
        PhaseSlopeConfig(rho=0)
