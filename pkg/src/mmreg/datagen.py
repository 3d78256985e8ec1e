"""Synthetic test data with exactly known subpixel shifts.

Randomness: every generator takes an integer seed and draws from
``numpy.random.Generator(PCG64(SeedSequence(seed)))`` (what
``np.random.default_rng(seed)`` builds), which is bit-reproducible across
platforms. Per-image noise seeds are derived with :func:`derive_seed`, which
feeds ``[seed, *keys]`` to a ``SeedSequence`` and takes its first 64-bit word.

PSNR convention: ``10 * log10(peak**2 / MSE)`` with ``peak`` the maximum of the
clean image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GridError
from .grid import Displacement, Grid, GridLike, as_grid

__all__ = [
    "GaussianMixtureSpec",
    "DownsampleSpec",
    "NoiseSpec",
    "derive_seed",
    "draw_mixture",
    "synth_gaussian",
    "sample_dataset1",
    "disk_source",
    "dataset2_offsets",
    "downsample_tile",
    "make_dataset2",
    "noise_sigma",
    "add_noise_psnr",
    "measure_psnr",
]


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for ``(seed, *keys)``."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *(int(k) for k in keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True, eq=False)
class GaussianMixtureSpec:
    """Sum of isotropic 2-D Gaussians, optionally translated by ``shift``.

    ``components`` is an ``(n, 4)`` array of rows ``(amplitude, x_center,
    y_center, sigma)``.
    """

    components: np.ndarray
    width: int = 128
    height: int = 128
    shift: Displacement = field(default_factory=lambda: Displacement(0.0, 0.0))

    def __post_init__(self):
        comp = np.array(self.components, dtype=np.float64, copy=True).reshape(-1, 4)
        if comp.shape[0] < 1:
            raise ValueError("a mixture needs at least one component")
        if not np.all(comp[:, 3] > 0):
            raise ValueError("every sigma must be positive")
        comp.setflags(write=False)
        object.__setattr__(self, "components", comp)

    def with_shift(self, dx: float, dy: float) -> GaussianMixtureSpec:
        return replace(self, shift=Displacement(dx, dy))

    def translated(self) -> GaussianMixtureSpec:
        """Equivalent spec with the shift folded into the centres and zero shift."""
        comp = self.components.copy()
        comp[:, 1] += self.shift.dx
        comp[:, 2] += self.shift.dy
        return GaussianMixtureSpec(comp, self.width, self.height)


def draw_mixture(rng: np.random.Generator, width: int = 128, height: int = 128,
                 n_components: int = 200) -> GaussianMixtureSpec:
    """Random mixture: centres uniform on [0, width] x [0, height], sigma on [1, 6],
    amplitude on (0, 1]. Draw order is x centres, y centres, sigmas, amplitudes."""
    xs = rng.uniform(0.0, width, n_components)
    ys = rng.uniform(0.0, height, n_components)
    sigmas = rng.uniform(1.0, 6.0, n_components)
    amps = 1.0 - rng.random(n_components)
    return GaussianMixtureSpec(np.column_stack([amps, xs, ys, sigmas]), width, height)


def synth_gaussian(spec: GaussianMixtureSpec) -> Grid:
    """Evaluate the (shifted) mixture at integer pixel positions, no interpolation.

    Each Gaussian is separable, so the image is ``(A * gy).T @ gx`` with one
    row of ``gx``/``gy`` per component.
    """
    amp, cx, cy, sigma = spec.components.T
    cx = cx + spec.shift.dx
    cy = cy + spec.shift.dy
    inv = 1.0 / (2.0 * sigma * sigma)
    x = np.arange(spec.width, dtype=np.float64)
    y = np.arange(spec.height, dtype=np.float64)
    gx = np.exp(-((x[np.newaxis, :] - cx[:, np.newaxis]) ** 2) * inv[:, np.newaxis])
    gy = np.exp(-((y[np.newaxis, :] - cy[:, np.newaxis]) ** 2) * inv[:, np.newaxis])
    return Grid((amp[:, np.newaxis] * gy).T @ gx)


def sample_dataset1(seed: int, n_pairs: int, size: int = 128, n_components: int = 200
                    ) -> list[tuple[Grid, Grid, Displacement]]:
    """``n_pairs`` of (reference, shifted, truth) sharing one mixture drawn from ``seed``.

    Shifts are uniform on [-0.5, 0.5] per axis, drawn after the mixture from the
    same generator as ``(dx, dy)`` pairs.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    rng = np.random.default_rng(seed)
    spec = draw_mixture(rng, size, size, n_components)
    reference = synth_gaussian(spec)
    shifts = rng.uniform(-0.5, 0.5, (n_pairs, 2))
    out = []
    for dx, dy in shifts:
        truth = Displacement(dx, dy)
        out.append((reference, synth_gaussian(spec.with_shift(dx, dy)), truth))
    return out


def disk_source(seed: int, size: int = 2200, n_features: int = 300, disk_radius: float | None = None,
                sigma_range: tuple[float, float] = (24.0, 96.0)) -> Grid:
    """High-resolution test scene: smooth Gaussian features scattered over a
    central disc on a dark background, like a full-disk solar image.

    Features stay well inside every crop, so tiles cut from it are effectively
    periodic and subpixel shifts survive circular correlation unbiased.
    """
    rng = np.random.default_rng(seed)
    radius = 0.3 * size if disk_radius is None else disk_radius
    r = radius * np.sqrt(rng.random(n_features))
    theta = rng.uniform(0.0, 2.0 * np.pi, n_features)
    comp = np.column_stack([
        1.0 - rng.random(n_features),
        size / 2 + r * np.cos(theta),
        size / 2 + r * np.sin(theta),
        rng.uniform(*sigma_range, n_features),
    ])
    return synth_gaussian(GaussianMixtureSpec(comp, size, size))


@dataclass(frozen=True)
class DownsampleSpec:
    """One dataset-II tile: decimation ``factor`` and high-resolution offset ``(u, v)``."""

    factor: int
    u: int = 0
    v: int = 0

    def __post_init__(self):
        if self.factor < 1:
            raise ValueError("factor must be a positive integer")
        lim = self.factor // 2
        if abs(self.u) > lim or abs(self.v) > lim:
            raise ValueError(f"offsets must satisfy |u|, |v| <= {lim}")

    @property
    def truth(self) -> Displacement:
        return Displacement(self.u / self.factor, self.v / self.factor)


def dataset2_offsets(factor: int) -> list[int]:
    """High-resolution offsets ``-(D//2), ..., D//2``.

    Even ``D`` gives ``D + 1`` values and fractional shifts covering [-0.5, 0.5]
    inclusive; odd ``D`` gives ``D`` values strictly inside that interval.
    """
    h = int(factor) // 2
    return list(range(-h, h + 1))


def _box_rows(src: np.ndarray, y0: int, crop: int, d: int) -> np.ndarray:
    return src[y0:y0 + crop * d].reshape(crop, d, -1).sum(axis=1)


def downsample_tile(source: np.ndarray, factor: int, crop: int, x0: int, y0: int) -> np.ndarray:
    """Mean over ``factor x factor`` blocks of the ``(crop*factor)**2`` window at ``(x0, y0)``."""
    d = factor
    win = source[y0:y0 + crop * d, x0:x0 + crop * d]
    if win.shape != (crop * d, crop * d):
        raise GridError("tile window extends past the source image")
    return win.reshape(crop, d, crop, d).mean(axis=(1, 3))


def make_dataset2(source: GridLike, factor: int = 16, crop: int = 128) -> list[tuple[Grid, Displacement]]:
    """Box-filter and decimate ``source`` at every offset tile.

    The tile for offset ``(u, v)`` starts ``(u, v)`` high-resolution pixels
    *before* a centred base window, so its content sits ``(u/D, v/D)``
    low-resolution pixels further along +x/+y than the ``(0, 0)`` tile, which is
    the reference. Images are ordered with ``v`` outer and ``u`` inner.

    Raises:
        GridError: ``source`` cannot hold every offset window.
    """
    src = as_grid(source).values
    d, span = int(factor), int(crop) * int(factor)
    if d < 1 or crop < 1:
        raise ValueError("factor and crop must be positive")
    offsets = dataset2_offsets(d)
    h = offsets[-1]
    height, width = src.shape
    if height < span + 2 * h or width < span + 2 * h:
        raise GridError(
            f"source {width}x{height} too small for crop {crop} at factor {d}: "
            f"need at least {span + 2 * h} pixels per side"
        )
    bx, by = (width - span) // 2, (height - span) // 2

    # separable box sums: rows once per v, then columns per u
    out = []
    for v in offsets:
        rows = _box_rows(src, by - v, crop, d)
        for u in offsets:
            x0 = bx - u
            img = rows[:, x0:x0 + span].reshape(crop, crop, d).sum(axis=2) / (d * d)
            out.append((Grid(img), DownsampleSpec(d, u, v).truth))
    return out


@dataclass(frozen=True)
class NoiseSpec:
    """Target PSNR in dB (``None`` means leave the image clean) and noise seed."""

    psnr_db: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.psnr_db is not None and not math.isfinite(self.psnr_db):
            raise ValueError("psnr_db must be finite")


def noise_sigma(peak: float, psnr_db: float) -> float:
    """Noise standard deviation reaching ``psnr_db`` for an image with maximum ``peak``."""
    return peak / 10.0 ** (psnr_db / 20.0)


def add_noise_psnr(image: GridLike, spec: NoiseSpec) -> Grid:
    """Add i.i.d. zero-mean Gaussian noise calibrated to ``spec.psnr_db``."""
    image = as_grid(image)
    if spec.psnr_db is None:
        return image
    peak = float(image.values.max())
    if not peak > 0:
        raise ValueError("PSNR noise needs an image with a positive maximum")
    sigma = noise_sigma(peak, spec.psnr_db)
    rng = np.random.default_rng(spec.seed)
    return Grid(image.values + rng.normal(0.0, sigma, image.shape))


def measure_psnr(clean: GridLike, noisy: GridLike) -> float:
    """Realised PSNR of ``noisy`` against ``clean`` under the module convention."""
    c, n = as_grid(clean).values, as_grid(noisy).values
    mse = float(np.mean((n - c) ** 2))
    return 10.0 * math.log10(float(c.max()) ** 2 / mse)
