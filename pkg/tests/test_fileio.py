import json
import os
import struct

import numpy as np
import pytest

from maxent_inversion import FormatError, ParseError, ShapeError, TruncatedFile
from maxent_inversion.fileio import (
    make_report,
    nudge_interior,
    read_idx_images,
    read_kinds_csv,
    read_matrix_csv,
    read_pgm,
    read_vector_csv,
    to_bytes,
    write_idx_images,
    write_matrix_csv,
    write_pgm,
    write_report,
    write_vector_csv,
)
from maxent_inversion.priors import EntropyReport

from conftest import MNIST_FIXTURE


def test_read_matrix(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1,2\n3,4\n")
    np.testing.assert_array_equal(read_matrix_csv(p), [[1, 2], [3, 4]])


def test_blank_lines_and_spaces(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1, 2\n\n 3 ,4e0\n")
    np.testing.assert_array_equal(read_matrix_csv(p), [[1, 2], [3, 4]])


def test_ragged(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1,2\n3\n")
    with pytest.raises(ShapeError, match="row 2"):
        read_matrix_csv(p)


def test_parse_error_location(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1,2\n3,abc\n")
    with pytest.raises(ParseError) as info:
        read_matrix_csv(p)
    assert (info.value.row, info.value.column) == (2, 2)


def test_matrix_round_trip_exact(tmp_path, rng):
    m = rng.standard_normal((50, 8)) * 10.0 ** rng.integers(-30, 30, (50, 8))
    p = tmp_path / "w.csv"
    write_matrix_csv(p, m)
    np.testing.assert_array_equal(read_matrix_csv(p), m)


def test_vector_round_trip(tmp_path, rng):
    v = rng.standard_normal(17)
    p = tmp_path / "v.csv"
    write_vector_csv(p, v)
    assert len(p.read_text().splitlines()) == 17
    np.testing.assert_array_equal(read_vector_csv(p), v)
    p.write_text(",".join(repr(float(x)) for x in v) + "\n")
    np.testing.assert_array_equal(read_vector_csv(p), v)


def test_vector_rejects_matrix(tmp_path):
    p = tmp_path / "v.csv"
    p.write_text("1,2\n3,4\n")
    with pytest.raises(ShapeError):
        read_vector_csv(p)


def test_written_file_permissions(tmp_path):
    p = tmp_path / "v.csv"
    write_vector_csv(p, [1.0])
    umask = os.umask(0)
    os.umask(umask)
    assert os.stat(p).st_mode & 0o777 == 0o666 & ~umask
    assert [f.name for f in tmp_path.iterdir()] == ["v.csv"]


def test_kinds(tmp_path):
    p = tmp_path / "k.csv"
    p.write_text("chisq1,exp\nexp\n ted \n")
    assert read_kinds_csv(p) == ["chisq1", "exp", "exp", "ted"]


def test_idx_round_trip(tmp_path, rng):
    imgs = rng.integers(0, 256, (3, 5, 5), dtype=np.uint8)
    p = tmp_path / "x.idx"
    write_idx_images(p, imgs)
    batch = read_idx_images(p)
    assert (batch.count, batch.side) == (3, 5)
    np.testing.assert_array_equal(batch.pixels, imgs.reshape(3, 25) / 255.0)
    assert read_idx_images(p, 0).count == 0
    assert read_idx_images(p, 2).count == 2


def test_idx_fixture():
    batch = read_idx_images(MNIST_FIXTURE, 6)
    assert batch.count == 6 and batch.side == 28
    assert batch.pixels.min() >= 0.0 and batch.pixels.max() <= 1.0
    assert batch.pixels.max() == 1.0


def test_idx_label_magic(tmp_path):
    p = tmp_path / "labels"
    p.write_bytes(struct.pack(">IIII", 0x801, 1, 28, 28) + bytes(784))
    with pytest.raises(FormatError):
        read_idx_images(p)


def test_idx_truncated(tmp_path):
    p = tmp_path / "t"
    p.write_bytes(struct.pack(">IIII", 0x803, 2, 4, 4) + bytes(20))
    with pytest.raises(TruncatedFile):
        read_idx_images(p)
    p.write_bytes(b"\x00\x00")
    with pytest.raises(TruncatedFile):
        read_idx_images(p)


def test_pgm_rounding_and_clipping(tmp_path):
    data, clipped = to_bytes(np.full(4, 0.5))
    assert list(data) == [128] * 4 and clipped == 0
    img = np.array([1.2, -0.1, 0.0, 1.0])
    p = tmp_path / "a.pgm"
    assert write_pgm(p, img, 2) == 2
    np.testing.assert_array_equal(read_pgm(p), [[255, 0], [0, 255]])
    assert p.read_bytes().startswith(b"P5\n2 2\n255\n")
    with pytest.raises(ValueError):
        write_pgm(p, img, 2, clamp=False)
    with pytest.raises(ShapeError):
        write_pgm(p, img, 3)


def test_pgm_monotone(rng):
    v = np.sort(rng.random(200))
    assert np.all(np.diff(to_bytes(v)[0].astype(int)) >= 0)


def test_nudge():
    x, count = nudge_interior(np.array([0.0, 0.5, 1.0]))
    np.testing.assert_allclose(x, [1e-6, 0.5, 1 - 1e-6])
    assert count == 2


def test_report_key_order(tmp_path):
    rep = make_report(
        "invert",
        {"a": 1},
        np.float64(1e-12),
        3,
        EntropyReport(1.0, 2.0, 3.0),
        timings_ms={"solve": 1.0},
        clipped_pixels=4,
        x=np.array([1.0, np.nan]),
    )
    assert list(rep) == ["command", "parameters", "residual_inf", "iterations", "entropy", "clipped_pixels", "x", "timings_ms"]
    assert rep["x"] == [1.0, None]
    p = tmp_path / "r.json"
    write_report(p, rep)
    assert json.loads(p.read_text()) == rep
