"""Local statistical pan-sharpening: LMM, LMVM, RVS and LCM.

All four map a PAN band and one multispectral band to a fused band at PAN
resolution.  LMM, LMVM and RVS expect the MS band already upsampled to the PAN
grid; LCM takes the original low-resolution band and does its own resampling.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, NumericError
from .raster import Band, ImageStack, as_stack, check_alignment, degrade, upsample_nearest
from .window_stats import DEFAULT_EPSILON, WindowSpec, local_mean, local_regression, local_std


class FusionMethod(str, enum.Enum):
    LMM = "LMM"
    LMVM = "LMVM"
    RVS = "RVS"
    LCM = "LCM"

    @classmethod
    def parse(cls, name) -> FusionMethod:
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).upper())
        except ValueError:
            raise ValueError(f"unknown fusion method {name!r}; expected one of lmm, lmvm, rvs, lcm") from None

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class FusionConfig:
    method: FusionMethod = FusionMethod.RVS
    window_lmm: WindowSpec = field(default_factory=lambda: WindowSpec.square(11))
    window_lmvm: WindowSpec = field(default_factory=lambda: WindowSpec.square(11))
    window_rvs: WindowSpec = field(default_factory=lambda: WindowSpec.square(5))
    window_lcm: WindowSpec = field(default_factory=lambda: WindowSpec.square(11))
    ratio: int = 1
    clamp: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", FusionMethod.parse(self.method))
        if int(self.ratio) != self.ratio or self.ratio < 1:
            raise ValueError(f"ratio must be a positive integer, got {self.ratio!r}")
        if self.clamp is not None:
            lo, hi = self.clamp
            if lo > hi:
                raise ValueError(f"clamp range is empty: [{lo}, {hi}]")

    def window(self, method: FusionMethod | str | None = None) -> WindowSpec:
        method = self.method if method is None else FusionMethod.parse(method)
        return getattr(self, f"window_{method.value.lower()}")

    def with_method(self, method) -> FusionConfig:
        return replace(self, method=FusionMethod.parse(method))

    def with_epsilon(self, epsilon: float) -> FusionConfig:
        return replace(
            self,
            **{
                f"window_{m.value.lower()}": replace(self.window(m), epsilon=epsilon)
                for m in FusionMethod
            },
        )


@dataclass(frozen=True)
class FusedBand:
    band: Band
    method: FusionMethod
    index: int = 0


def _finish(values: np.ndarray, pan: Band, ms: Band, cfg: FusionConfig, method, index) -> FusedBand:
    if not np.all(np.isfinite(values)):
        raise NumericError(f"{method} produced non-finite values")
    if cfg.clamp is not None:
        values = np.clip(values, *cfg.clamp)
    return FusedBand(Band(values, ms.bit_depth), FusionMethod(method), index)


def _same_grid(pan: Band, ms: Band) -> None:
    if pan.shape != ms.shape:
        raise DimensionError(
            f"PAN is {pan.width}x{pan.height} but MS band is {ms.width}x{ms.height}; "
            "upsample the MS band to the PAN grid first"
        )


def fuse_lmm(pan: Band, ms: Band, cfg: FusionConfig | None = None, index: int = 0) -> FusedBand:
    """Local mean matching: scale PAN by the ratio of local MS and PAN means."""
    cfg = cfg or FusionConfig(FusionMethod.LMM)
    _same_grid(pan, ms)
    win = cfg.window_lmm
    p = pan.data
    mean_p = local_mean(p, win)
    mean_m = local_mean(ms.data, win)
    flat = np.abs(mean_p) < win.epsilon
    safe = np.where(flat, 1.0, mean_p)
    fused = np.where(flat, mean_m, p * (mean_m / safe))
    return _finish(fused, pan, ms, cfg, FusionMethod.LMM, index)


def fuse_lmvm(pan: Band, ms: Band, cfg: FusionConfig | None = None, index: int = 0) -> FusedBand:
    """Local mean and variance matching."""
    cfg = cfg or FusionConfig(FusionMethod.LMVM)
    _same_grid(pan, ms)
    win = cfg.window_lmvm
    p = pan.data
    mean_p = local_mean(p, win)
    mean_m = local_mean(ms.data, win)
    std_p = local_std(p, win)
    std_m = local_std(ms.data, win)
    flat = std_p < win.epsilon
    gain = std_m / np.where(flat, 1.0, std_p)
    fused = np.where(flat, mean_m, (p - mean_p) * gain + mean_m)
    return _finish(fused, pan, ms, cfg, FusionMethod.LMVM, index)


def fuse_rvs(pan: Band, ms: Band, cfg: FusionConfig | None = None, index: int = 0) -> FusedBand:
    """Regression variable substitution with a sliding-window least-squares fit."""
    cfg = cfg or FusionConfig(FusionMethod.RVS)
    _same_grid(pan, ms)
    slope, intercept = local_regression(ms.data, pan.data, cfg.window_rvs)
    fused = intercept + slope * pan.data
    return _finish(fused, pan, ms, cfg, FusionMethod.RVS, index)


def lcm_coefficients(pan: Band, ms_low: Band, cfg: FusionConfig):
    """Low-resolution LCM model: ``(slope, intercept, residual, pan_low)`` planes."""
    ratio = cfg.ratio
    verdict = check_alignment(pan, ms_low, ratio)
    if not verdict:
        raise DimensionError(verdict.message)
    pan_low = degrade(pan, ratio).data
    m_low = ms_low.data
    slope, intercept = local_regression(m_low, pan_low, cfg.window_lcm)
    residual = m_low - (intercept + slope * pan_low)
    return slope, intercept, residual, pan_low


def fuse_lcm(pan: Band, ms_low: Band, cfg: FusionConfig | None = None, index: int = 0) -> FusedBand:
    """Local correlation modelling.

    The regression runs between the low-resolution MS band and the degraded
    PAN; each low-res pixel's slope, intercept and residual are then applied
    to its ratio x ratio block of the full-resolution PAN.
    """
    cfg = cfg or FusionConfig(FusionMethod.LCM)
    slope, intercept, residual, pan_low = lcm_coefficients(pan, ms_low, cfg)
    r = cfg.ratio

    def up(plane):
        return np.repeat(np.repeat(plane, r, axis=0), r, axis=1)

    # intercept + slope*P + residual, regrouped as M_low + slope*(P - P_low):
    # algebraically the same, and exact when P equals its own degraded version.
    m_up = up(ms_low.data)
    fused = m_up + up(slope) * (pan.data - up(pan_low))
    return _finish(fused, pan, ms_low, cfg, FusionMethod.LCM, index)


_FUSERS = {
    FusionMethod.LMM: fuse_lmm,
    FusionMethod.LMVM: fuse_lmvm,
    FusionMethod.RVS: fuse_rvs,
    FusionMethod.LCM: fuse_lcm,
}


def fuse_band(pan: Band, ms_low: Band, cfg: FusionConfig, index: int = 0) -> FusedBand:
    """Fuse one low-resolution MS band with the configured method."""
    if cfg.method is FusionMethod.LCM:
        return fuse_lcm(pan, ms_low, cfg, index)
    verdict = check_alignment(pan, ms_low, cfg.ratio)
    if not verdict:
        raise DimensionError(verdict.message)
    return _FUSERS[cfg.method](pan, upsample_nearest(ms_low, cfg.ratio), cfg, index)


def fuse_stack(pan: Band, ms: ImageStack | Band, cfg: FusionConfig) -> list[FusedBand]:
    """Fuse every band of a low-resolution MS stack, in order."""
    ms = as_stack(ms)
    verdict = check_alignment(pan, ms, cfg.ratio)
    if not verdict:
        raise DimensionError(verdict.message)
    return [fuse_band(pan, band, cfg, k) for k, band in enumerate(ms)]


def fused_to_stack(fused: list[FusedBand]) -> ImageStack:
    return ImageStack(tuple(f.band for f in fused))


__all__ = [
    "DEFAULT_EPSILON",
    "FusedBand",
    "FusionConfig",
    "FusionMethod",
    "fuse_band",
    "fuse_lcm",
    "fuse_lmm",
    "fuse_lmvm",
    "fuse_rvs",
    "fuse_stack",
    "fused_to_stack",
    "lcm_coefficients",
]
