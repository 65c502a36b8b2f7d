import json
from pathlib import Path

import numpy as np
import pytest

from statfuse.errors import ParseError, RangeError, ShapeError
from statfuse.io import (
    decode_image,
    encode_image,
    parse_header,
    read_image,
    report_to_csv,
    write_image,
    write_report,
)
from statfuse.metrics import QualityReport, QualityRow
from statfuse.raster import Band, ImageStack

GOLDEN = Path(__file__).parent / "golden"


def table2_report():
    """Table 2 of the source study, as a report object."""
    rows = []
    for line in (GOLDEN / "table2.csv").read_text().splitlines()[1:]:
        method, band, *vals = line.split(",")
        vals = [float(v) if v else None for v in vals]
        rows.append(QualityRow(method, int(band), *vals))
    return QualityReport(rows)


def test_read_binary_pgm(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 64, 128, 255]))
    stack = read_image(path)
    assert stack.band_count == 1
    np.testing.assert_array_equal(stack[0].data, [[0, 64], [128, 255]])
    assert stack[0].bit_depth == 8


def test_read_ppm_splits_channels():
    stack = decode_image(b"P6 1 1 255\n" + bytes([10, 20, 30]))
    assert [b.data[0, 0] for b in stack] == [10, 20, 30]


def test_ascii_with_comments_and_whitespace():
    data = b"P2\n# made by hand\n3  1 # trailing\n\t63\n0 31\n63\n"
    stack = decode_image(data)
    np.testing.assert_array_equal(stack[0].data, [[0, 31, 63]])
    assert stack[0].bit_depth == 6
    ppm = decode_image(b"P3 2 1 255 1 2 3 4 5 6")
    np.testing.assert_array_equal(ppm.to_array()[:, 0, :], [[1, 4], [2, 5], [3, 6]])


def test_sixteen_bit_big_endian():
    stack = decode_image(b"P5 2 1 1000\n" + bytes([0x01, 0x02, 0x03, 0xE8]))
    np.testing.assert_array_equal(stack[0].data, [[258, 1000]])
    assert stack[0].bit_depth == 10


@pytest.mark.parametrize(
    "data, offset",
    [
        (b"P7 1 1 255\n\x00", 0),
        (b"P5 x 1 255\n\x00", 3),
        (b"P5 1 1 0\n\x00", 8),
        (b"P5 2 2 255\n\x00", 12),
        (b"P5 1 1 255", 10),
        (b"P2 2 1 255 7", 12),
    ],
)
def test_parse_errors_carry_offset(data, offset):
    with pytest.raises(ParseError) as err:
        decode_image(data)
    assert err.value.offset == offset
    assert f"byte {offset}" in str(err.value)


def test_sample_above_maxval():
    with pytest.raises(RangeError):
        decode_image(b"P5 2 1 63\n" + bytes([10, 64]))
    with pytest.raises(RangeError):
        decode_image(b"P2 1 1 15 16")


def test_header_fields():
    h = parse_header(b"P6\n4 3\n255\n")
    assert (h.format, h.width, h.height, h.maxval, h.channels, h.data_offset) == ("PPM-binary", 4, 3, 255, 3, 11)


def test_write_rounds_half_up_and_clamps(tmp_path):
    path = tmp_path / "x.pgm"
    write_image(Band([[3.6, 2.5, -2.0, 300.0]]), path, 255)
    np.testing.assert_array_equal(read_image(path)[0].data, [[4, 3, 0, 255]])
    assert path.read_bytes().startswith(b"P5\n4 1\n255\n")


def test_round_trip_random_8bit(tmp_path, rng):
    stack = ImageStack.from_array(rng.integers(0, 256, size=(3, 17, 13)).astype(float))
    write_image(stack, tmp_path / "r.ppm", 255)
    back = read_image(tmp_path / "r.ppm")
    assert back.to_array().tobytes() == stack.to_array().tobytes()


def test_round_trip_16bit_and_6bit(rng):
    for maxval in (63, 4095, 65535):
        band = Band(rng.integers(0, maxval + 1, size=(5, 6)), bit_depth=16)
        back = decode_image(encode_image(band, maxval))[0]
        np.testing.assert_array_equal(back.data, band.data)


def test_write_rejects_two_bands(tmp_path):
    with pytest.raises(ShapeError):
        write_image(ImageStack.from_array(np.zeros((2, 3, 3))), tmp_path / "x.ppm", 255)


def test_csv_report_matches_golden(tmp_path):
    out = tmp_path / "r.csv"
    write_report(table2_report(), out, "csv")
    assert out.read_bytes() == (GOLDEN / "table2.csv").read_bytes()


def test_csv_row_examples():
    lines = report_to_csv(table2_report()).splitlines()
    assert lines[0] == "method,band,SD,En,SNR,NRMSE,DI,CC"
    assert "RVS,1,51.3230,5.8841,7.8550,0.0780,0.0850,0.9240" in lines
    assert lines[1] == "ORIGIN,1,51.0180,5.2093,,,,"


def test_json_report_matches_golden(tmp_path):
    out = tmp_path / "r.json"
    write_report(table2_report(), out, "json")
    assert json.loads(out.read_text()) == json.loads((GOLDEN / "table2.json").read_text())


def test_empty_report_is_header_only(tmp_path):
    out = tmp_path / "e.csv"
    write_report(QualityReport(), out, "csv")
    assert out.read_text() == "method,band,SD,En,SNR,NRMSE,DI,CC\n"


def test_report_serialization_deterministic(tmp_path):
    write_report(table2_report(), tmp_path / "a.json", "json")
    write_report(table2_report(), tmp_path / "b.json", "json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
