"""Sliding-window local statistics backed by summed-area tables.

Every statistic reduces to a handful of window sums (of x, y, x*x, x*y), each
costing O(1) per pixel once the table is built.  The box-sum kernel is the
compiled ``statfuse._sat`` extension when available and the numpy fallback in
``statfuse._sat_py`` otherwise; set ``STATFUSE_PURE_PYTHON=1`` to force the
fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .raster import Band

DEFAULT_EPSILON = 1e-12

if os.environ.get("STATFUSE_PURE_PYTHON", "") not in ("", "0"):
    from ._sat_py import box_sum as _box_sum

    BACKEND = "python"
else:
    try:
        from ._sat import box_sum as _box_sum

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._sat_py import box_sum as _box_sum

        BACKEND = "python"


def use_backend(name: str) -> None:
    """Switch the box-sum kernel at runtime (``"cython"`` or ``"python"``)."""
    global _box_sum, BACKEND
    if name == "cython":
        from ._sat import box_sum
    elif name == "python":
        from ._sat_py import box_sum
    else:
        raise ValueError(f"unknown backend {name!r}")
    _box_sum = box_sum
    BACKEND = name


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _sat  # noqa: F401
    except ImportError:
        return names
    return ["cython", *names]


@dataclass(frozen=True)
class WindowSpec:
    width: int = 3
    height: int = 3
    border: str = "replicate"
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        for side in (self.width, self.height):
            if int(side) != side or side < 1 or side % 2 == 0:
                raise ValueError(f"window sides must be odd positive integers, got {self.width}x{self.height}")
        if self.border != "replicate":
            raise ValueError(f"unsupported border policy {self.border!r}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")

    @classmethod
    def square(cls, size: int, epsilon: float = DEFAULT_EPSILON) -> WindowSpec:
        return cls(size, size, epsilon=epsilon)

    @classmethod
    def parse(cls, text: str, epsilon: float = DEFAULT_EPSILON) -> WindowSpec:
        """Parse ``"WxH"`` or a single odd integer."""
        parts = text.lower().split("x")
        if len(parts) == 1:
            return cls.square(int(parts[0]), epsilon)
        if len(parts) == 2:
            return cls(int(parts[0]), int(parts[1]), epsilon=epsilon)
        raise ValueError(f"cannot parse window size {text!r}")

    @property
    def size(self) -> int:
        return self.width * self.height

    def __str__(self):
        return f"{self.width}x{self.height}"


def _grid(x) -> np.ndarray:
    if isinstance(x, Band):
        return x.data
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D grid, got shape {arr.shape}")
    return arr


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = _grid(a), _grid(b)
    if a.shape != b.shape:
        raise DimensionError(f"grids differ in shape: {a.shape} vs {b.shape}")
    return a, b


def _shift(x: np.ndarray) -> tuple[np.ndarray, float]:
    # Subtracting the sample closest to the mean shrinks the table magnitudes.
    # Being a data value, it keeps integer DN integral and flattens constant
    # bands to exact zeros.
    flat = x.ravel()
    c = float(flat[np.argmin(np.abs(flat - flat.mean()))])
    return x - c, c


def _mean(x: np.ndarray, win: WindowSpec) -> np.ndarray:
    return _box_sum(x, win.height, win.width) / win.size


def local_mean(band, win: WindowSpec) -> np.ndarray:
    data = _grid(band)
    x, c = _shift(data)
    # a mean cannot leave the data range; the clip also keeps constant bands exact
    return np.clip(_mean(x, win) + c, data.min(), data.max())


def _centered_moments(x: np.ndarray, y: np.ndarray, win: WindowSpec):
    n = win.size
    sx = _box_sum(x, win.height, win.width)
    sy = _box_sum(y, win.height, win.width)
    sxy = _box_sum(x * y, win.height, win.width)
    # (n*Sxy - Sx*Sy) / n^2 is exact for integer data of moderate range
    return sx / n, sy / n, (n * sxy - sx * sy) / (n * n)


def local_var(band, win: WindowSpec) -> np.ndarray:
    x, _ = _shift(_grid(band))
    n = win.size
    sx = _box_sum(x, win.height, win.width)
    sxx = _box_sum(x * x, win.height, win.width)
    return np.maximum((n * sxx - sx * sx) / (n * n), 0.0)


def local_std(band, win: WindowSpec) -> np.ndarray:
    """Population (1/n) standard deviation over each window."""
    return np.sqrt(local_var(band, win))


def local_cov(a, b, win: WindowSpec) -> np.ndarray:
    """Population covariance of two bands over each window."""
    a, b = _pair(a, b)
    if a is b or np.array_equal(a, b):
        return local_var(a, win)
    x, _ = _shift(a)
    y, _ = _shift(b)
    return _centered_moments(x, y, win)[2]


def local_regression(m, p, win: WindowSpec) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares line ``m ~ intercept + slope * p`` fitted in every window.

    Returns ``(slope, intercept)``.  Where the PAN variance is below
    ``win.epsilon`` the slope is 0 and the intercept is the local mean of ``m``.
    """
    m, p = _pair(m, p)
    y, cm = _shift(m)
    x, cp = _shift(p)
    mean_p, mean_m, s_pm = _centered_moments(x, y, win)
    s_pp = local_var(p, win)
    mean_p = mean_p + cp
    mean_m = mean_m + cm
    flat = s_pp < win.epsilon
    slope = np.where(flat, 0.0, s_pm / np.where(flat, 1.0, s_pp))
    intercept = mean_m - slope * mean_p
    return slope, intercept
