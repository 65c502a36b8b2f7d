"""Fusion quality indices and Table-2-style reports.

SD and En describe a single band.  CC, SNR, NRMSE and DI compare a fused band
``f`` with a reference band ``m`` on the same grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInput, DimensionError, StatfuseError
from .raster import Band, ImageStack, as_stack, upsample_nearest

METRIC_NAMES = ("SD", "En", "SNR", "NRMSE", "DI", "CC")
COMPARATIVE = ("SNR", "NRMSE", "DI", "CC")
ORIGIN = "ORIGIN"
DI_EPSILON = 1e-12


def _grid(x) -> np.ndarray:
    if isinstance(x, Band):
        return x.data
    return np.asarray(x, dtype=np.float64)


def _pair(f, m):
    f, m = _grid(f), _grid(m)
    if f.shape != m.shape:
        raise DimensionError(f"bands differ in shape: {f.shape} vs {m.shape}")
    return f, m


def std_dev(band) -> float:
    """Global population standard deviation (two-pass)."""
    x = _grid(band)
    return float(np.sqrt(np.mean((x - x.mean()) ** 2)))


def quantize(band, levels: int = 256) -> np.ndarray:
    """Round half-up and clamp into the integer levels ``0 .. levels-1``."""
    return np.clip(np.floor(_grid(band) + 0.5), 0, levels - 1).astype(np.int64)


def histogram(band, levels: int = 256) -> np.ndarray:
    if levels < 2:
        raise ValueError(f"levels must be >= 2, got {levels}")
    return np.bincount(quantize(band, levels).ravel(), minlength=levels)


def entropy(band, levels: int = 256) -> float:
    """Shannon entropy of the DN histogram, in bits."""
    counts = histogram(band, levels)
    p = counts[counts > 0] / counts.sum()
    h = -math.fsum(p * np.log2(p))
    return max(h, 0.0)


def correlation(f, m) -> float:
    f, m = _pair(f, m)
    df = f - f.mean()
    dm = m - m.mean()
    sff = np.sum(df * df)
    smm = np.sum(dm * dm)
    if sff == 0 or smm == 0:
        raise DegenerateInput("correlation is undefined for a constant band")
    cc = np.sum(df * dm) / (np.sqrt(sff) * np.sqrt(smm))
    return float(np.clip(cc, -1.0, 1.0))


def snr(f, m) -> float:
    """sqrt(sum f^2 / sum (f - m)^2): fused-band energy over squared error."""
    f, m = _pair(f, m)
    err = np.sum((f - m) ** 2)
    if err == 0:
        raise DegenerateInput("SNR is undefined when fused and reference bands are identical")
    return float(np.sqrt(np.sum(f * f) / err))


def nrmse(f, m) -> float:
    """Root-mean-square error normalised by the 8-bit full scale 255."""
    f, m = _pair(f, m)
    return float(np.sqrt(np.mean((f - m) ** 2) / 255.0**2))


def deviation_index(f, m, epsilon: float = DI_EPSILON) -> float:
    """Mean of |f - m| / m over reference pixels with m > epsilon."""
    f, m = _pair(f, m)
    keep = m > epsilon
    if not np.any(keep):
        raise DegenerateInput("deviation index needs at least one positive reference pixel")
    return float(np.mean(np.abs(f[keep] - m[keep]) / m[keep]))


_COMPARATORS = {"SNR": snr, "NRMSE": nrmse, "DI": deviation_index, "CC": correlation}


@dataclass
class QualityRow:
    method: str
    band: int
    SD: float | None = None
    En: float | None = None
    SNR: float | None = None
    NRMSE: float | None = None
    DI: float | None = None
    CC: float | None = None
    errors: dict[str, str] = field(default_factory=dict)

    def values(self) -> dict[str, float | None]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    @property
    def is_origin(self) -> bool:
        return self.method == ORIGIN


@dataclass
class QualityReport:
    rows: list[QualityRow] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def extend(self, other: QualityReport) -> None:
        for row in other.rows:
            if row.is_origin and any(
                r.is_origin and r.band == row.band for r in self.rows
            ):
                continue
            self.rows.append(row)
        self.sort()

    def sort(self) -> None:
        """Table 2 order: ORIGIN, LMM, LMVM, RVS, LCM, then others; bands ascending."""
        self.rows.sort(key=_row_key)

    def get(self, method: str, band: int) -> QualityRow:
        for row in self.rows:
            if row.method == method and row.band == band:
                return row
        raise KeyError((method, band))

    def methods(self) -> list[str]:
        seen = []
        for row in self.rows:
            if row.method not in seen:
                seen.append(row.method)
        return seen


_METHOD_ORDER = {name: i for i, name in enumerate((ORIGIN, "LMM", "LMVM", "RVS", "LCM"))}


def _row_key(row: QualityRow):
    return (_METHOD_ORDER.get(row.method, len(_METHOD_ORDER)), row.method, row.band)


def origin_row(reference: Band, band_number: int, levels: int = 256) -> QualityRow:
    return QualityRow(ORIGIN, band_number, SD=std_dev(reference), En=entropy(reference, levels))


def compare_row(method: str, band_number: int, fused: Band, reference: Band, levels: int = 256) -> QualityRow:
    """All six indices for one fused band; failures are recorded, not raised."""
    row = QualityRow(str(method), band_number)
    row.SD = std_dev(fused)
    row.En = entropy(fused, levels)
    for name, fn in _COMPARATORS.items():
        try:
            setattr(row, name, fn(fused, reference))
        except StatfuseError as exc:
            row.errors[name] = str(exc)
    return row


def evaluate_stack(
    fused: Sequence,
    reference: ImageStack | Band | Iterable[Band],
    levels: int = 256,
    method: str | None = None,
    include_origin: bool = True,
) -> QualityReport:
    """Score fused bands against the (nearest-neighbour upsampled) reference MS.

    ``fused`` holds ``FusedBand`` objects (their ``method`` labels the rows) or
    plain ``Band`` objects labelled by ``method``.  Bands are numbered from 1.
    """
    reference = as_stack(reference)
    items = list(fused)
    if len(items) != reference.band_count:
        raise DimensionError(
            f"{len(items)} fused bands but the reference has {reference.band_count}"
        )
    rows = []
    if include_origin:
        rows += [origin_row(ref, k + 1, levels) for k, ref in enumerate(reference)]
    for k, (item, ref) in enumerate(zip(items, reference)):
        band = getattr(item, "band", item)
        label = method or str(getattr(item, "method", "FUSED"))
        ref_up = _match_grid(ref, band)
        rows.append(compare_row(label, k + 1, band, ref_up, levels))
    report = QualityReport(rows)
    report.rows.sort(key=_row_key)
    return report


def _match_grid(ref: Band, target: Band) -> Band:
    if ref.shape == target.shape:
        return ref
    fh, fw = target.shape
    rh, rw = ref.shape
    if fh % rh or fw % rw or fh // rh != fw // rw:
        raise DimensionError(
            f"reference {rw}x{rh} does not divide fused {fw}x{fh} by an integer ratio"
        )
    return upsample_nearest(ref, fh // rh)
