"""Netpbm (PGM/PPM) image files and quality-report serialization."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, RangeError, ShapeError
from .metrics import METRIC_NAMES, QualityReport
from .raster import Band, ImageStack, as_stack

_MAGIC = {
    b"P2": ("PGM-ascii", 1, False),
    b"P5": ("PGM-binary", 1, True),
    b"P3": ("PPM-ascii", 3, False),
    b"P6": ("PPM-binary", 3, True),
}
_WHITESPACE = b" \t\r\n\v\f"
REPORT_COLUMNS = ("method", "band", *METRIC_NAMES)


@dataclass(frozen=True)
class ImageFileHeader:
    format: str
    width: int
    height: int
    maxval: int
    data_offset: int = 0

    @property
    def channels(self) -> int:
        return 3 if self.format.startswith("PPM") else 1

    @property
    def binary(self) -> bool:
        return self.format.endswith("binary")


def bit_depth_for(maxval: int) -> int:
    return max(1, math.ceil(math.log2(maxval + 1)))


class _Tokenizer:
    """Whitespace/comment-aware token reader over a byte buffer."""

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def skip(self):
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = data[self.pos : self.pos + 1]
            if c == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = n if end < 0 else end + 1
            elif c in _WHITESPACE:
                self.pos += 1
            else:
                break

    def integer(self, what: str) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos : self.pos + 1].isdigit():
            self.pos += 1
        if self.pos == start:
            if start >= len(self.data):
                raise ParseError(f"unexpected end of file while reading {what}", start)
            raise ParseError(f"expected an integer for {what}", start)
        return int(self.data[start : self.pos])


def parse_header(data: bytes) -> ImageFileHeader:
    magic = data[:2]
    if magic not in _MAGIC:
        raise ParseError(f"unsupported magic number {magic!r}; expected P2, P3, P5 or P6", 0)
    fmt, _, binary = _MAGIC[magic]
    tok = _Tokenizer(data, 2)
    if tok.pos < len(data) and data[tok.pos : tok.pos + 1] not in _WHITESPACE + b"#":
        raise ParseError("magic number must be followed by whitespace", tok.pos)
    width = tok.integer("width")
    height = tok.integer("height")
    at = tok.pos
    maxval = tok.integer("maxval")
    if width < 1 or height < 1:
        raise ParseError(f"image dimensions must be positive, got {width}x{height}", at)
    if not 1 <= maxval <= 65535:
        raise ParseError(f"maxval must lie in 1..65535, got {maxval}", tok.pos)
    if binary:
        # exactly one whitespace byte separates the header from the raster
        if tok.pos >= len(data) or data[tok.pos : tok.pos + 1] not in _WHITESPACE:
            raise ParseError("missing whitespace after maxval", tok.pos)
        offset = tok.pos + 1
    else:
        offset = tok.pos
    return ImageFileHeader(fmt, width, height, maxval, offset)


def decode_image(data: bytes) -> ImageStack:
    header = parse_header(data)
    count = header.width * header.height * header.channels
    if header.binary:
        dtype = np.dtype(">u2") if header.maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        raster = data[header.data_offset : header.data_offset + need]
        if len(raster) < need:
            raise ParseError(
                f"raster truncated: expected {need} bytes, found {len(raster)}",
                header.data_offset + len(raster),
            )
        samples = np.frombuffer(raster, dtype=dtype).astype(np.int64)
    else:
        tok = _Tokenizer(data, header.data_offset)
        samples = np.array([tok.integer("sample") for _ in range(count)], dtype=np.int64)
    if samples.size and samples.max() > header.maxval:
        bad = int(np.argmax(samples > header.maxval))
        raise RangeError(
            f"sample {bad} has value {int(samples[bad])} above maxval {header.maxval}"
        )
    grid = samples.reshape(header.height, header.width, header.channels).astype(np.float64)
    depth = bit_depth_for(header.maxval)
    return ImageStack(tuple(Band(grid[:, :, c], depth) for c in range(header.channels)))


def read_image(path) -> ImageStack:
    """Load a PGM (one band) or PPM (three bands) file without rescaling."""
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def clamp_round(values, maxval: int) -> np.ndarray:
    """Round half-up, then clamp into ``0 .. maxval``."""
    return np.clip(np.floor(np.asarray(values, dtype=np.float64) + 0.5), 0, maxval).astype(np.int64)


def encode_image(stack, maxval: int | None = None) -> bytes:
    stack = as_stack(stack)
    if stack.band_count not in (1, 3):
        raise ShapeError(f"PGM/PPM hold 1 or 3 bands, got {stack.band_count}")
    if maxval is None:
        maxval = max(b.maxval for b in stack)
    if not 1 <= maxval <= 65535:
        raise ValueError(f"maxval must lie in 1..65535, got {maxval}")
    magic = b"P5" if stack.band_count == 1 else b"P6"
    samples = np.stack([clamp_round(b.data, maxval) for b in stack], axis=-1)
    dtype = ">u2" if maxval > 255 else "u1"
    header = b"%s\n%d %d\n%d\n" % (magic, stack.width, stack.height, maxval)
    return header + samples.astype(dtype).tobytes()


def write_image(stack: ImageStack | Band, path, maxval: int | None = None) -> None:
    """Write a binary PGM/PPM.  ``maxval`` defaults to the bands' bit depth."""
    data = encode_image(stack, maxval)
    with open(path, "wb") as fh:
        fh.write(data)


def _fmt(value) -> str:
    return "" if value is None else f"{value:.4f}"


def report_to_csv(report: QualityReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in report.rows:
        writer.writerow([row.method, row.band, *(_fmt(v) for v in row.values().values())])
    return buf.getvalue()


def report_to_records(report: QualityReport) -> list[dict]:
    records = []
    for row in report.rows:
        rec = {"method": row.method, "band": row.band}
        for name, value in row.values().items():
            rec[name] = None if value is None else round(value, 4)
        if row.errors:
            rec["errors"] = dict(sorted(row.errors.items()))
        records.append(rec)
    return records


def report_to_json(report: QualityReport) -> str:
    return json.dumps(report_to_records(report), indent=2) + "\n"


def write_report(report: QualityReport, path, format: str = "csv") -> None:
    """Serialize a report as CSV (Table 2 columns) or a JSON list of rows."""
    if format == "csv":
        text = report_to_csv(report)
    elif format == "json":
        text = report_to_json(report)
    else:
        raise ValueError(f"unknown report format {format!r}")
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def report_format_for(path, default: str = "csv") -> str:
    ext = os.path.splitext(str(path or ""))[1].lower()
    return {".json": "json", ".csv": "csv"}.get(ext, default)
