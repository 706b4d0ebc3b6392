import struct

import numpy as np
import pytest

from tokenprune import BinaryMask, FormatError, GrayImage, RgbImage, TokenGrid
from tokenprune.formats import (
    TENSOR_MAGIC,
    read_image,
    read_mask,
    read_tensor,
    write_image,
    write_mask,
    write_tensor,
)


class TestTensorRoundtrip:
    def test_matrix_roundtrip_is_exact(self, tmp_path):
        path = tmp_path / "m.iapt"
        original = np.array([[1.5, -2.25, 3.0], [0.0, 1e-7, 4096.5]], dtype=np.float32)
        write_tensor(path, original)
        assert np.array_equal(read_tensor(path), original)

    def test_vector_layout(self, tmp_path):
        path = tmp_path / "v.iapt"
        write_tensor(path, np.array([1.0, 2.0, 3.0, 4.0], dtype=np.float32))
        raw = path.read_bytes()
        assert raw[0:4] == TENSOR_MAGIC
        version, ndim = struct.unpack_from("<HH", raw, 4)
        assert (version, ndim) == (1, 1)
        assert struct.unpack_from("<I", raw, 8) == (4,)
        assert len(raw) == 8 + 4 + 16

    def test_float64_input_is_narrowed_to_float32(self, tmp_path):
        path = tmp_path / "n.iapt"
        write_tensor(path, np.array([1 / 3], dtype=np.float64))
        assert read_tensor(path)[0] == np.float32(1 / 3)

    def test_3d_roundtrip(self, tmp_path):
        path = tmp_path / "t.iapt"
        original = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
        write_tensor(path, original)
        assert np.array_equal(read_tensor(path), original)


class TestTensorErrors:
    def test_bad_magic_reports_offset_zero(self, tmp_path):
        path = tmp_path / "bad.iapt"
        path.write_bytes(b"IAPX" + b"\x00" * 12)
        with pytest.raises(FormatError, match="offset 0"):
            read_tensor(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "bad.iapt"
        path.write_bytes(TENSOR_MAGIC + struct.pack("<HH", 2, 1) + struct.pack("<I", 1) + b"\x00" * 4)
        with pytest.raises(FormatError, match="offset 4"):
            read_tensor(path)

    def test_zero_dim(self, tmp_path):
        path = tmp_path / "bad.iapt"
        path.write_bytes(TENSOR_MAGIC + struct.pack("<HH", 1, 2) + struct.pack("<II", 3, 0))
        with pytest.raises(FormatError, match="zero dimension"):
            read_tensor(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "bad.iapt"
        path.write_bytes(TENSOR_MAGIC + struct.pack("<HH", 1, 1) + struct.pack("<I", 4) + b"\x00" * 8)
        with pytest.raises(FormatError, match="length mismatch"):
            read_tensor(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "bad.iapt"
        path.write_bytes(b"IAP")
        with pytest.raises(FormatError, match="truncated"):
            read_tensor(path)

    def test_empty_array_rejected_on_write(self, tmp_path):
        from tokenprune import DataError

        with pytest.raises(DataError):
            write_tensor(tmp_path / "e.iapt", np.zeros((0, 3), dtype=np.float32))


class TestImageRoundtrip:
    def test_rgb_roundtrip(self, tmp_path):
        path = tmp_path / "img.ppm"
        rng = np.random.default_rng(4)
        pixels = rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
        write_image(path, RgbImage(pixels))
        out = read_image(path)
        assert isinstance(out, RgbImage)
        assert np.array_equal(out.pixels, pixels)

    def test_known_2x2_p6(self, tmp_path):
        path = tmp_path / "img.ppm"
        payload = bytes([255, 0, 0, 0, 255, 0, 0, 0, 255, 9, 9, 9])
        path.write_bytes(b"P6\n2 2\n255\n" + payload)
        out = read_image(path)
        assert out.pixels[0, 0].tolist() == [255, 0, 0]
        assert out.pixels[1, 1].tolist() == [9, 9, 9]

    def test_gray_roundtrip(self, tmp_path):
        path = tmp_path / "img.pgm"
        values = np.arange(12, dtype=np.float64).reshape(3, 4) * 20
        write_image(path, GrayImage(values))
        out = read_image(path)
        assert isinstance(out, GrayImage)
        assert np.array_equal(out.values, values)

    def test_comments_and_whitespace_in_header(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5 # magic\n# a comment line\n 2 \t2 # dims\n255\n" + bytes([1, 2, 3, 4]))
        out = read_image(path)
        assert out.values.tolist() == [[1, 2], [3, 4]]


class TestImageErrors:
    def test_ascii_formats_rejected(self, tmp_path):
        path = tmp_path / "img.ppm"
        path.write_bytes(b"P3\n1 1\n255\n255 0 0\n")
        with pytest.raises(FormatError, match="P5/P6"):
            read_image(path)

    def test_wide_maxval_rejected(self, tmp_path):
        path = tmp_path / "img.ppm"
        path.write_bytes(b"P6\n1 1\n65535\n" + b"\x00" * 6)
        with pytest.raises(FormatError, match="maxval"):
            read_image(path)

    def test_payload_length_checked(self, tmp_path):
        path = tmp_path / "img.ppm"
        path.write_bytes(b"P6\n2 2\n255\n" + b"\x00" * 11)
        with pytest.raises(FormatError, match="payload"):
            read_image(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n1 1\n255\n" + b"\x00\x00")
        with pytest.raises(FormatError, match="payload"):
            read_image(path)


class TestMasks:
    def test_mask_maps_to_255_and_0(self, tmp_path):
        grid = TokenGrid(1, 2, 4)
        path = tmp_path / "mask.pgm"
        write_mask(path, BinaryMask(np.array([True, False]), grid))
        raw = path.read_bytes()
        assert raw.endswith(bytes([255, 0]))
        back = read_mask(path, grid)
        assert back.bits.tolist() == [True, False]

    def test_mask_grid_mismatch(self, tmp_path):
        grid = TokenGrid(1, 2, 4)
        path = tmp_path / "mask.pgm"
        write_mask(path, BinaryMask(np.array([True, False]), grid))
        with pytest.raises(FormatError):
            read_mask(path, TokenGrid(2, 2, 4))
