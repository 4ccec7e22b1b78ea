"""Snapshot matrix assembly, splitting, binary round-trips and CSV export."""

import numpy as np
import pytest

import koopmanrom as kr
from koopmanrom.errors import (BadMagic, CorruptHeader, IndexOutOfRange,
                               ShapeMismatch, TooFewColumns, UnsupportedVersion)
from koopmanrom.snapshots import FieldTag, SnapshotMatrix, save, load


@pytest.fixture
def small_grid(classic_constants):
    return kr.Grid.for_channel(6, 4, classic_constants)


def random_matrix(rng, nx=5, ny=3, nsnap=7, **kw):
    data = rng.standard_normal((nx * ny, nsnap))
    return SnapshotMatrix(data=data, nx=nx, ny=ny, dt=kw.get("dt", 2.5),
                          dx=kw.get("dx", 1.25), dy=kw.get("dy", 0.5),
                          field_tag=kw.get("tag", FieldTag.u),
                          nondimensional=kw.get("nondimensional", False))


class TestAssemble:
    def test_constant_fields_give_equal_columns(self, small_grid):
        f = np.arange(24, dtype=float).reshape(4, 6)
        m = kr.assemble([f, f, f], 1.0, FieldTag.h, small_grid)
        assert m.n_snapshots == 3
        assert np.array_equal(m.data[:, 0], m.data[:, 1])
        assert np.array_equal(m.data[:, 1], m.data[:, 2])

    def test_flattening_order_and_round_trip(self, small_grid):
        f0 = np.arange(24, dtype=float).reshape(4, 6)
        f1 = f0[::-1].copy()
        m = kr.assemble([f0, f1], 3.0, FieldTag.v, small_grid)
        # fixed flattening: linear index = iy*nx + ix
        assert m.data[1, 0] == f0[0, 1]
        assert m.data[6, 0] == f0[1, 0]
        assert np.array_equal(m.field(0), f0)
        assert np.array_equal(m.field(1), f1)

    def test_order_preserving(self, small_grid):
        rng = np.random.default_rng(7)
        fields = [rng.standard_normal((4, 6)) for _ in range(5)]
        m = kr.assemble(fields, 1.0, FieldTag.h, small_grid)
        perm = [3, 0, 4, 1, 2]
        mp = kr.assemble([fields[i] for i in perm], 1.0, FieldTag.h, small_grid)
        assert np.array_equal(mp.data, m.data[:, perm])

    def test_shape_mismatch(self, small_grid):
        good = np.zeros((4, 6))
        bad = np.zeros((4, 5))
        with pytest.raises(ShapeMismatch):
            kr.assemble([good, bad], 1.0, FieldTag.h, small_grid)

    def test_too_few(self, small_grid):
        with pytest.raises(TooFewColumns):
            kr.assemble([np.zeros((4, 6))], 1.0, FieldTag.h, small_grid)

    def test_metadata(self, small_grid):
        m = kr.assemble([np.zeros((4, 6))] * 2, 42.0, FieldTag.u, small_grid,
                        nondimensional=True)
        assert (m.nx, m.ny, m.dt) == (6, 4, 42.0)
        assert m.dx == small_grid.dx and m.dy == small_grid.dy
        assert m.field_tag is FieldTag.u and m.nondimensional


class TestSplit:
    def test_minimal_two_columns(self):
        rng = np.random.default_rng(1)
        m = random_matrix(rng, nsnap=2)
        pair = kr.split(m)
        assert pair.v0.shape == (15, 1) and pair.v1.shape == (15, 1)
        assert np.array_equal(pair.v0[:, 0], m.data[:, 0])
        assert np.array_equal(pair.v1[:, 0], m.data[:, 1])

    def test_289_column_run_gives_rank_288_pair(self):
        rng = np.random.default_rng(2)
        m = random_matrix(rng, nx=2, ny=2, nsnap=289)
        pair = kr.split(m)
        assert pair.v0.shape == (4, 288) and pair.v1.shape == (4, 288)

    def test_reinterleave_restores_matrix(self):
        rng = np.random.default_rng(3)
        m = random_matrix(rng, nsnap=9)
        pair = kr.split(m)
        rebuilt = np.hstack([pair.v0, pair.v1[:, -1:]])
        assert np.array_equal(rebuilt, m.data)
        assert np.array_equal(pair.v0[:, 1:], pair.v1[:, :-1])

    def test_single_column_matrix_rejected(self):
        with pytest.raises(TooFewColumns):
            SnapshotMatrix(data=np.zeros((4, 1)), nx=2, ny=2, dt=1.0,
                           dx=1.0, dy=1.0, field_tag=FieldTag.h)


class TestBinaryFormat:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(11)
        m = random_matrix(rng, nondimensional=True, tag=FieldTag.v)
        # adversarial payload values: subnormals, signed zeros, extremes
        m.data[0, 0] = 5e-324
        m.data[1, 0] = -5e-324
        m.data[2, 0] = -0.0
        m.data[3, 0] = 1.7976931348623157e308
        m.data[4, 0] = -2.2250738585072014e-308
        path = tmp_path / "t.ksnp"
        save(m, path)
        back = load(path)
        assert np.array_equal(m.data.view(np.uint64), back.data.view(np.uint64))
        assert (back.nx, back.ny, back.dt, back.dx, back.dy) == (m.nx, m.ny, m.dt, m.dx, m.dy)
        assert back.field_tag is m.field_tag and back.nondimensional == m.nondimensional

    def test_header_layout_is_sealed(self, tmp_path):
        m = SnapshotMatrix(data=np.array([[1.0, 2.0]]), nx=1, ny=1, dt=3.0,
                           dx=4.0, dy=5.0, field_tag=FieldTag.u, nondimensional=True)
        path = tmp_path / "t.ksnp"
        save(m, path)
        raw = path.read_bytes()
        assert raw[:4] == b"KSNP"
        header = np.frombuffer(raw[4:28], dtype="<u4")
        assert list(header) == [1, 1, 1, 1, 1, 2]
        assert np.frombuffer(raw[28:52], dtype="<f8").tolist() == [3.0, 4.0, 5.0]
        assert np.frombuffer(raw[52:], dtype="<f8").tolist() == [1.0, 2.0]

    def test_truncated_file(self, tmp_path):
        rng = np.random.default_rng(12)
        path = tmp_path / "t.ksnp"
        save(random_matrix(rng), path)
        raw = path.read_bytes()
        for cut in (2, 30, len(raw) - 8):
            path.write_bytes(raw[:cut])
            with pytest.raises(CorruptHeader):
                load(path)

    def test_bad_magic(self, tmp_path):
        rng = np.random.default_rng(13)
        path = tmp_path / "t.ksnp"
        save(random_matrix(rng), path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with pytest.raises(BadMagic):
            load(path)

    def test_unsupported_version(self, tmp_path):
        rng = np.random.default_rng(14)
        path = tmp_path / "t.ksnp"
        save(random_matrix(rng), path)
        raw = bytearray(path.read_bytes())
        raw[4:8] = (9).to_bytes(4, "little")
        path.write_bytes(bytes(raw))
        with pytest.raises(UnsupportedVersion):
            load(path)

    def test_trailing_garbage_rejected(self, tmp_path):
        rng = np.random.default_rng(15)
        path = tmp_path / "t.ksnp"
        save(random_matrix(rng), path)
        path.write_bytes(path.read_bytes() + b"\x00" * 8)
        with pytest.raises(CorruptHeader):
            load(path)

    def test_random_bit_patterns_round_trip(self, tmp_path):
        rng = np.random.default_rng(16)
        bits = rng.integers(0, 2 ** 64, size=(12, 4), dtype=np.uint64)
        data = bits.view(np.float64)
        data[~np.isfinite(data)] = 0.0  # finite doubles only
        m = SnapshotMatrix(data=data, nx=4, ny=3, dt=1.0, dx=1.0, dy=1.0,
                           field_tag=FieldTag.other)
        path = tmp_path / "t.ksnp"
        save(m, path)
        assert np.array_equal(load(path).data.view(np.uint64), data.view(np.uint64))


class TestCsvExport:
    def test_layout(self, tmp_path):
        m = SnapshotMatrix(data=np.array([[1.0, 0], [2.0, 0], [3.0, 0], [4.0, 0]]),
                           nx=2, ny=2, dt=1.0, dx=1.0, dy=1.0, field_tag=FieldTag.h)
        path = tmp_path / "f.csv"
        kr.export_csv(m, 0, path)
        assert path.read_bytes() == b"1,2\n3,4\n"

    def test_parse_back_is_exact(self, tmp_path):
        rng = np.random.default_rng(17)
        m = random_matrix(rng)
        path = tmp_path / "f.csv"
        kr.export_csv(m, 3, path)
        back = np.loadtxt(path, delimiter=",")
        # 17 significant digits round-trip doubles exactly
        assert np.array_equal(back, m.field(3))

    def test_index_out_of_range(self, tmp_path):
        rng = np.random.default_rng(18)
        m = random_matrix(rng, nsnap=4)
        for bad in (-1, 4, 99):
            with pytest.raises(IndexOutOfRange):
                kr.export_csv(m, bad, tmp_path / "f.csv")
