"""Band/stack containers plus the resampling primitives shared by every method."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True, eq=False)
class Band:
    """Single-channel grid of digital numbers, stored as read-only float64.

    ``data`` has shape ``(height, width)``.  ``bit_depth`` is metadata only; it
    sets the default clamp range when a band is written to an integer file.
    """

    data: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True, order="C")
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"band data must be a non-empty 2-D grid, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("band data contains NaN or Inf")
        if self.bit_depth < 1:
            raise ValueError(f"bit_depth must be >= 1, got {self.bit_depth}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def maxval(self) -> int:
        return 2**self.bit_depth - 1

    def with_data(self, data) -> Band:
        return Band(data, self.bit_depth)

    def __eq__(self, other):
        if not isinstance(other, Band):
            return NotImplemented
        return self.bit_depth == other.bit_depth and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"Band({self.width}x{self.height}, bit_depth={self.bit_depth})"


@dataclass(frozen=True)
class ImageStack:
    """Ordered, co-registered bands of identical size."""

    bands: tuple[Band, ...] = field(default_factory=tuple)

    def __post_init__(self):
        bands = tuple(self.bands)
        if not bands:
            raise DimensionError("an image stack needs at least one band")
        shapes = {b.shape for b in bands}
        if len(shapes) != 1:
            raise DimensionError(f"bands differ in size: {sorted(shapes)}")
        object.__setattr__(self, "bands", bands)

    @classmethod
    def from_array(cls, arr, bit_depth: int = 8) -> ImageStack:
        """Build from a ``(bands, height, width)`` array (or a single 2-D grid)."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[None]
        return cls(tuple(Band(a, bit_depth) for a in arr))

    def to_array(self) -> np.ndarray:
        return np.stack([b.data for b in self.bands])

    @property
    def band_count(self) -> int:
        return len(self.bands)

    @property
    def width(self) -> int:
        return self.bands[0].width

    @property
    def height(self) -> int:
        return self.bands[0].height

    @property
    def shape(self) -> tuple[int, int]:
        return self.bands[0].shape

    def __len__(self):
        return len(self.bands)

    def __iter__(self):
        return iter(self.bands)

    def __getitem__(self, i) -> Band:
        return self.bands[i]


@dataclass(frozen=True)
class AlignmentVerdict:
    ok: bool
    message: str = ""

    def __bool__(self):
        return self.ok


def _check_factor(factor: int) -> int:
    if isinstance(factor, bool) or int(factor) != factor or factor < 1:
        raise ValueError(f"resolution ratio must be a positive integer, got {factor!r}")
    return int(factor)


def upsample_nearest(band: Band, factor: int) -> Band:
    """Replicate every pixel into a ``factor`` x ``factor`` block."""
    factor = _check_factor(factor)
    if factor == 1:
        return band.with_data(band.data)
    out = np.repeat(np.repeat(band.data, factor, axis=0), factor, axis=1)
    return band.with_data(out)


def degrade(band: Band, factor: int) -> Band:
    """Box-average ``factor`` x ``factor`` blocks and decimate."""
    factor = _check_factor(factor)
    h, w = band.shape
    if h % factor or w % factor:
        raise DimensionError(f"{w}x{h} band is not divisible by ratio {factor}")
    if factor == 1:
        return band.with_data(band.data)
    blocks = band.data.reshape(h // factor, factor, w // factor, factor)
    # sum in a fixed order, then divide: keeps a constant block's mean exact
    out = blocks.sum(axis=(1, 3)) / (factor * factor)
    # guard the mean inside the block range against rounding
    out = np.clip(out, blocks.min(axis=(1, 3)), blocks.max(axis=(1, 3)))
    return band.with_data(out)


def check_alignment(pan: Band, ms: ImageStack | Band, factor: int) -> AlignmentVerdict:
    factor = _check_factor(factor)
    ph, pw = pan.shape
    mh, mw = ms.shape
    if pw == mw * factor and ph == mh * factor:
        return AlignmentVerdict(True)
    return AlignmentVerdict(
        False,
        f"PAN is {pw}x{ph} but MS {mw}x{mh} at ratio {factor} implies "
        f"{mw * factor}x{mh * factor}",
    )


def upsample_stack(stack: ImageStack, factor: int) -> ImageStack:
    return ImageStack(tuple(upsample_nearest(b, factor) for b in stack))


def degrade_stack(stack: ImageStack, factor: int) -> ImageStack:
    return ImageStack(tuple(degrade(b, factor) for b in stack))


def as_stack(bands: ImageStack | Band | Sequence[Band] | Iterable[Band]) -> ImageStack:
    if isinstance(bands, ImageStack):
        return bands
    if isinstance(bands, Band):
        return ImageStack((bands,))
    return ImageStack(tuple(bands))
