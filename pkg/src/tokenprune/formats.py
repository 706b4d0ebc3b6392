"""On-disk formats: IAPT tensor dumps and binary netpbm images.

IAPT layout (all integers little-endian):
    bytes 0..3   magic "IAPT"
    bytes 4..5   version, u16, must be 1
    bytes 6..7   ndim, u16, must be >= 1
    then         ndim x u32 dims, every dim > 0
    then         product(dims) x float32 payload, row-major

Images are binary netpbm only: P6 (RGB, maxval 255) and P5 (grayscale,
maxval 255). ASCII variants are rejected. Masks map true -> 255, false -> 0.
Round-trips are bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import BinaryMask, TokenGrid
from .errors import DataError, FormatError
from .geometry import GrayImage, RgbImage

TENSOR_MAGIC = b"IAPT"
TENSOR_VERSION = 1


def write_tensor(path: str | Path, tensor: np.ndarray) -> None:
    """Serialize an array as float32; see the module docstring for the layout."""
    arr = np.ascontiguousarray(np.asarray(tensor), dtype="<f4")
    if arr.size == 0:
        raise DataError("cannot write an empty tensor")
    if arr.ndim < 1:
        arr = arr.reshape(1)
    header = TENSOR_MAGIC + struct.pack("<HH", TENSOR_VERSION, arr.ndim)
    dims = struct.pack(f"<{arr.ndim}I", *arr.shape)
    Path(path).write_bytes(header + dims + arr.tobytes(order="C"))


def read_tensor(path: str | Path) -> np.ndarray:
    """Parse an IAPT file into a float32 array."""
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise FormatError(f"truncated header in {path}", offset=len(data))
    if data[0:4] != TENSOR_MAGIC:
        raise FormatError(f"bad magic {data[0:4]!r} in {path}", offset=0)
    version, ndim = struct.unpack_from("<HH", data, 4)
    if version != TENSOR_VERSION:
        raise FormatError(f"unsupported version {version} in {path}", offset=4)
    if ndim < 1:
        raise FormatError(f"ndim must be at least 1 in {path}", offset=6)
    dims_end = 8 + 4 * ndim
    if len(data) < dims_end:
        raise FormatError(f"truncated dims in {path}", offset=len(data))
    dims = struct.unpack_from(f"<{ndim}I", data, 8)
    for i, dim in enumerate(dims):
        if dim == 0:
            raise FormatError(f"zero dimension in {path}", offset=8 + 4 * i)
    count = 1
    for dim in dims:
        count *= dim
    expected = dims_end + 4 * count
    if len(data) != expected:
        raise FormatError(
            f"payload length mismatch in {path}: expected {expected} bytes, "
            f"got {len(data)}",
            offset=dims_end,
        )
    flat = np.frombuffer(data, dtype="<f4", count=count, offset=dims_end)
    return flat.reshape(dims).copy()


def _skip_header_whitespace(data: bytes, pos: int) -> int:
    while pos < len(data):
        byte = data[pos]
        if byte in b" \t\r\n\x0b\x0c":
            pos += 1
        elif byte == ord("#"):
            while pos < len(data) and data[pos] != ord("\n"):
                pos += 1
        else:
            break
    return pos


def _read_header_int(data: bytes, pos: int, what: str, path) -> tuple[int, int]:
    pos = _skip_header_whitespace(data, pos)
    start = pos
    while pos < len(data) and data[pos] in b"0123456789":
        pos += 1
    if pos == start:
        raise FormatError(f"expected {what} in {path}", offset=start)
    return int(data[start:pos]), pos


def read_image(path: str | Path) -> RgbImage | GrayImage:
    """Parse a binary netpbm file: P6 -> RgbImage, P5 -> GrayImage."""
    data = Path(path).read_bytes()
    if len(data) < 2:
        raise FormatError(f"truncated image file {path}", offset=len(data))
    magic = data[0:2]
    if magic not in (b"P5", b"P6"):
        raise FormatError(
            f"unsupported magic {magic!r} in {path}: only binary P5/P6 are accepted",
            offset=0,
        )
    channels = 3 if magic == b"P6" else 1
    width, pos = _read_header_int(data, 2, "width", path)
    height, pos = _read_header_int(data, pos, "height", path)
    maxval_at = _skip_header_whitespace(data, pos)
    maxval, pos = _read_header_int(data, pos, "maxval", path)
    if width == 0 or height == 0:
        raise FormatError(f"zero image dimension in {path}", offset=2)
    if maxval != 255:
        raise FormatError(f"maxval must be 255 in {path}, got {maxval}", offset=maxval_at)
    if pos >= len(data) or data[pos] not in b" \t\r\n":
        raise FormatError(f"expected single whitespace before pixel data in {path}", offset=pos)
    pos += 1
    expected = width * height * channels
    if len(data) - pos != expected:
        raise FormatError(
            f"pixel payload mismatch in {path}: expected {expected} bytes, "
            f"got {len(data) - pos}",
            offset=pos,
        )
    raw = np.frombuffer(data, dtype=np.uint8, count=expected, offset=pos)
    if channels == 3:
        return RgbImage(raw.reshape(height, width, 3).copy())
    return GrayImage(raw.reshape(height, width).astype(np.float64))


def write_image(path: str | Path, image: RgbImage | GrayImage) -> None:
    """Write P6 for RGB, P5 for grayscale (values rounded and clipped to 8 bits)."""
    if isinstance(image, RgbImage):
        header = f"P6\n{image.width} {image.height}\n255\n".encode()
        Path(path).write_bytes(header + image.pixels.tobytes(order="C"))
        return
    if isinstance(image, GrayImage):
        header = f"P5\n{image.width} {image.height}\n255\n".encode()
        clipped = np.clip(np.rint(image.values), 0, 255).astype(np.uint8)
        Path(path).write_bytes(header + clipped.tobytes(order="C"))
        return
    raise DataError(f"cannot write object of type {type(image).__name__} as an image")


def write_mask(path: str | Path, mask: BinaryMask) -> None:
    """P5 mask image at grid resolution: true -> 255, false -> 0."""
    grid = mask.grid
    values = np.where(mask.bits.reshape(grid.rows, grid.cols), 255, 0)
    write_image(path, GrayImage(values.astype(np.float64)))


def read_mask(path: str | Path, grid: TokenGrid) -> BinaryMask:
    """Read a P5 mask written by write_mask; values > 127 count as true."""
    image = read_image(path)
    if not isinstance(image, GrayImage):
        raise FormatError(f"mask file {path} must be a P5 grayscale image", offset=0)
    if image.height != grid.rows or image.width != grid.cols:
        raise FormatError(
            f"mask {image.height}x{image.width} does not match grid "
            f"{grid.rows}x{grid.cols}"
        )
    return BinaryMask((image.values > 127).reshape(-1), grid)
