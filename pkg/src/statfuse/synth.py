"""Synthetic PAN/MS pairs for closed-loop testing.

A full-resolution 3-band reference is degraded to make the MS image, and a
weighted band sum (plus optional seeded noise) stands in for the PAN band.
"""
from __future__ import annotations

from importlib import resources

import numpy as np

from .raster import Band, ImageStack, as_stack, degrade

SCENE_SEED = 20111
SCENE_SIZE = (140, 160)  # height, width; divisible by 1, 2, 4 and 5


def _smooth_noise(rng, shape, scale):
    """Value noise: a coarse random grid, bilinearly interpolated."""
    h, w = shape
    gh, gw = h // scale + 2, w // scale + 2
    coarse = rng.standard_normal((gh, gw))
    y = np.arange(h) / scale
    x = np.arange(w) / scale
    y0, x0 = np.floor(y).astype(int), np.floor(x).astype(int)
    fy, fx = (y - y0)[:, None], (x - x0)[None, :]
    c00 = coarse[np.ix_(y0, x0)]
    c01 = coarse[np.ix_(y0, x0 + 1)]
    c10 = coarse[np.ix_(y0 + 1, x0)]
    c11 = coarse[np.ix_(y0 + 1, x0 + 1)]
    return (c00 * (1 - fx) + c01 * fx) * (1 - fy) + (c10 * (1 - fx) + c11 * fx) * fy


def make_scene(seed: int = SCENE_SEED, shape: tuple[int, int] = SCENE_SIZE) -> ImageStack:
    """Procedural 8-bit RGB scene mixing smooth terrain, fields and built-up blocks.

    Bands are strongly but not perfectly correlated with each other, so a PAN
    synthesized from them carries most (not all) of each band's structure.
    """
    rng = np.random.default_rng(seed)
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w] / max(h, w)

    terrain = 0.6 * _smooth_noise(rng, shape, 32) + 0.3 * _smooth_noise(rng, shape, 12)
    texture = _smooth_noise(rng, shape, 3)
    moisture = _smooth_noise(rng, shape, 24)

    # rectangular fields and buildings with per-band reflectances
    labels = np.zeros(shape, dtype=int)
    reflect = [np.array([0.0, 0.0, 0.0])]
    for k in range(1, 40):
        bh, bw = rng.integers(4, 28, size=2)
        y0, x0 = rng.integers(0, h - bh), rng.integers(0, w - bw)
        labels[y0 : y0 + bh, x0 : x0 + bw] = k
        reflect.append(rng.uniform(-60, 60, size=3) + rng.uniform(-40, 40))
    reflect = np.array(reflect)

    # a diagonal road
    road = np.abs((yy - 0.15) - 0.7 * xx) < 0.012

    base = np.array([110.0, 120.0, 100.0])
    bands = []
    for b in range(3):
        v = base[b] + 35 * terrain + 6 * texture + reflect[labels, b]
        v = v + (18, -6, -14)[b] * moisture + 20 * (b - 1) * yy
        v = np.where(road, 200.0 - 10 * b, v)
        bands.append(np.clip(np.round(v), 0, 255))
    return ImageStack.from_array(np.stack(bands), bit_depth=8)


def bundled_scene() -> ImageStack:
    """The reference scene shipped with the package (``data/scene.ppm``)."""
    from .io import decode_image

    data = resources.files("statfuse").joinpath("data/scene.ppm").read_bytes()
    return decode_image(data)


def synthesize_pair(
    reference,
    ratio: int,
    seed: int = 0,
    noise: float = 0.0,
    weights=None,
) -> tuple[Band, ImageStack, ImageStack]:
    """Return ``(pan, ms, truth)`` built from a full-resolution reference stack.

    ``pan`` is the weighted band sum plus zero-mean Gaussian noise of standard
    deviation ``noise`` (DN), drawn from ``numpy.random.default_rng(seed)``.
    ``ms`` is the reference box-degraded by ``ratio``; ``truth`` is the
    reference itself.
    """
    reference = as_stack(reference)
    k = reference.band_count
    if weights is None:
        weights = np.full(k, 1.0 / k)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (k,):
        raise ValueError(f"need {k} PAN weights, got {weights.size}")
    if noise < 0:
        raise ValueError(f"noise must be >= 0, got {noise}")
    pan = np.tensordot(weights, reference.to_array(), axes=1)
    if noise > 0:
        pan = pan + np.random.default_rng(seed).normal(0.0, noise, size=pan.shape)
    depth = max(b.bit_depth for b in reference)
    pan_band = Band(pan, depth)
    ms = ImageStack(tuple(degrade(b, ratio) for b in reference))
    return pan_band, ms, reference
