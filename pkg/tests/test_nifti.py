import gzip
import struct

import numpy as np
import pytest

from segeval import (
    BadMagic,
    HeaderSizeMismatch,
    IoFailure,
    MalformedHeader,
    RescaledLabels,
    TruncatedData,
    UnsupportedDatatype,
    UnsupportedDimension,
    Volume,
    read_nifti,
    write_nifti,
)
from conftest import write_nifti_big_endian

DTYPES = [np.uint8, np.int16, np.int32, np.float32]


def random_volume(rng, dtype, dims=None, spacing=None):
    dims = dims or tuple(int(d) for d in rng.integers(1, 9, size=3))
    spacing = spacing or tuple(float(s) for s in rng.uniform(0.3, 3.0, size=3))
    if np.dtype(dtype).kind == "f":
        data = rng.standard_normal(dims).astype(dtype)
    else:
        info = np.iinfo(dtype)
        data = rng.integers(info.min, info.max, size=dims, endpoint=True).astype(dtype)
    return Volume(dims, spacing, data)


def patched(path, offset, blob, out):
    raw = bytearray(path.read_bytes())
    raw[offset : offset + len(blob)] = blob
    out.write_bytes(bytes(raw))
    return out


class TestWriteFormat:
    def test_single_voxel_file_layout(self, tmp_path):
        v = Volume((1, 1, 1), (1, 1, 1), np.array([7], dtype=np.uint8))
        path = tmp_path / "one.nii"
        write_nifti(v, path)
        raw = path.read_bytes()
        assert len(raw) == 352 + 1
        assert raw[352] == 0x07
        assert struct.unpack_from("<i", raw, 0)[0] == 348
        assert raw[344:348] == b"n+1\x00"
        assert struct.unpack_from("<f", raw, 108)[0] == 352.0

    def test_gzip_output_is_gzip(self, tmp_path):
        v = Volume((2, 2, 2), (1, 1, 1), np.zeros((2, 2, 2), np.uint8))
        path = tmp_path / "m.nii.gz"
        write_nifti(v, path)
        assert path.read_bytes()[:2] == b"\x1f\x8b"
        assert read_nifti(path) == v

    def test_unwritable_path_raises(self, tmp_path):
        v = Volume((1, 1, 1), (1, 1, 1), np.array([1], dtype=np.uint8))
        with pytest.raises(IoFailure):
            write_nifti(v, tmp_path / "no" / "such" / "dir" / "x.nii")


class TestRoundTrip:
    @pytest.mark.parametrize("dtype", DTYPES)
    def test_round_trip_bit_identical(self, dtype, tmp_path):
        rng = np.random.default_rng(hash(np.dtype(dtype).name) % (2**32))
        for trial in range(5):
            v = random_volume(rng, dtype)
            path = tmp_path / f"{np.dtype(dtype).name}_{trial}.nii"
            write_nifti(v, path)
            back = read_nifti(path)
            assert back == v
            assert back.data.tobytes(order="F") == v.data.tobytes(order="F")

    def test_payload_order_is_x_fastest(self, tmp_path):
        data = np.arange(24, dtype=np.int16).reshape((2, 3, 4), order="F")
        v = Volume((2, 3, 4), (1, 1, 1), data)
        path = tmp_path / "order.nii"
        write_nifti(v, path)
        payload = path.read_bytes()[352:]
        assert np.frombuffer(payload, dtype="<i2").tolist() == list(range(24))

    def test_gzip_detected_by_content_not_extension(self, tmp_path):
        rng = np.random.default_rng(5)
        v = random_volume(rng, np.uint8)
        gz = tmp_path / "a.nii.gz"
        write_nifti(v, gz)
        misnamed = tmp_path / "b.nii"
        misnamed.write_bytes(gz.read_bytes())
        assert read_nifti(misnamed) == v


class TestEndianness:
    def test_big_endian_twin_decodes_identically(self, tmp_path):
        rng = np.random.default_rng(17)
        for dtype in DTYPES:
            v = random_volume(rng, dtype, dims=(5, 4, 3))
            le = tmp_path / f"le_{np.dtype(dtype).name}.nii"
            be = tmp_path / f"be_{np.dtype(dtype).name}.nii"
            write_nifti(v, le)
            write_nifti_big_endian(v, be)
            assert read_nifti(be) == read_nifti(le)


class TestMalformed:
    @pytest.fixture()
    def good(self, tmp_path):
        v = Volume((3, 3, 3), (1, 1, 1), np.arange(27, dtype=np.int16))
        path = tmp_path / "good.nii"
        write_nifti(v, path)
        return path

    def test_bad_magic(self, good, tmp_path):
        bad = patched(good, 344, b"abcd", tmp_path / "bad_magic.nii")
        with pytest.raises(BadMagic):
            read_nifti(bad)

    def test_pair_magic_rejected(self, good, tmp_path):
        bad = patched(good, 344, b"ni1\x00", tmp_path / "pair.nii")
        with pytest.raises(BadMagic):
            read_nifti(bad)

    def test_header_size_mismatch(self, good, tmp_path):
        bad = patched(good, 0, struct.pack("<i", 350), tmp_path / "hdr350.nii")
        with pytest.raises(HeaderSizeMismatch):
            read_nifti(bad)

    def test_truncated_header(self, good, tmp_path):
        short = tmp_path / "short.nii"
        short.write_bytes(good.read_bytes()[:100])
        with pytest.raises(TruncatedData):
            read_nifti(short)

    def test_truncated_payload(self, good, tmp_path):
        cut = tmp_path / "cut.nii"
        cut.write_bytes(good.read_bytes()[:-4])
        with pytest.raises(TruncatedData):
            read_nifti(cut)

    def test_corrupt_gzip(self, tmp_path):
        v = Volume((2, 2, 2), (1, 1, 1), np.zeros((2, 2, 2), np.uint8))
        gz = tmp_path / "x.nii.gz"
        write_nifti(v, gz)
        raw = gz.read_bytes()
        (tmp_path / "trunc.nii.gz").write_bytes(raw[: len(raw) // 2])
        with pytest.raises(TruncatedData):
            read_nifti(tmp_path / "trunc.nii.gz")

    def test_unsupported_datatype(self, good, tmp_path):
        bad = patched(good, 70, struct.pack("<h", 64), tmp_path / "f64.nii")
        with pytest.raises(UnsupportedDatatype):
            read_nifti(bad)

    def test_bitpix_mismatch(self, good, tmp_path):
        bad = patched(good, 72, struct.pack("<h", 8), tmp_path / "bitpix.nii")
        with pytest.raises(MalformedHeader):
            read_nifti(bad)

    def test_dim0_invalid_in_both_orders(self, good, tmp_path):
        bad = patched(good, 40, struct.pack("<h", 0), tmp_path / "dim0.nii")
        with pytest.raises(MalformedHeader):
            read_nifti(bad)

    def test_nonpositive_pixdim(self, good, tmp_path):
        bad = patched(good, 80, struct.pack("<f", 0.0), tmp_path / "pixdim.nii")
        with pytest.raises(MalformedHeader):
            read_nifti(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoFailure):
            read_nifti(tmp_path / "absent.nii")


class TestScaling:
    def test_rescaled_integer_labels_rejected(self, tmp_path):
        v = Volume((2, 2, 2), (1, 1, 1), np.ones((2, 2, 2), np.uint8))
        path = tmp_path / "labels.nii"
        write_nifti(v, path)
        bad = patched(path, 112, struct.pack("<f", 2.0), tmp_path / "slope.nii")
        with pytest.raises(RescaledLabels):
            read_nifti(bad)
        bad = patched(path, 116, struct.pack("<f", 1.0), tmp_path / "inter.nii")
        with pytest.raises(RescaledLabels):
            read_nifti(bad)

    def test_trivial_scaling_accepted(self, tmp_path):
        v = Volume((2, 2, 2), (1, 1, 1), np.ones((2, 2, 2), np.uint8))
        path = tmp_path / "triv.nii"
        write_nifti(v, path)
        # slope 0 means "no scaling" just like slope 1
        zero = patched(path, 112, struct.pack("<f", 0.0), tmp_path / "slope0.nii")
        assert read_nifti(zero) == v

    def test_float_scaling_applied(self, tmp_path):
        data = np.ones((2, 2, 2), np.float32)
        v = Volume((2, 2, 2), (1, 1, 1), data)
        path = tmp_path / "f.nii"
        write_nifti(v, path)
        scaled = patched(path, 112, struct.pack("<ff", 2.0, 0.5), tmp_path / "fs.nii")
        back = read_nifti(scaled)
        assert back.data.dtype == np.float32
        assert bool(np.all(back.data == np.float32(2.5)))


class TestDimensionality:
    def test_singleton_fourth_axis_squeezed(self, tmp_path):
        v = Volume((3, 3, 3), (1, 1, 1), np.arange(27, dtype=np.int16))
        path = tmp_path / "v4.nii"
        write_nifti(v, path)
        fourd = patched(path, 40, struct.pack("<2h", 4, 3), tmp_path / "dim4.nii")
        assert read_nifti(fourd) == v

    def test_multivolume_rejected(self, tmp_path):
        v = Volume((3, 3, 3), (1, 1, 1), np.arange(27, dtype=np.int16))
        path = tmp_path / "v.nii"
        write_nifti(v, path)
        raw = bytearray(path.read_bytes())
        struct.pack_into("<2h", raw, 40, 4, 3)
        struct.pack_into("<h", raw, 48, 2)  # dim[4] = 2
        bad = tmp_path / "time.nii"
        bad.write_bytes(bytes(raw))
        with pytest.raises(UnsupportedDimension):
            read_nifti(bad)
