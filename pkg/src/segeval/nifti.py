"""Single-file NIfTI-1 reader and writer.

Only the fields this toolkit needs are interpreted:

    offset  type  field
    0       i     sizeof_hdr   (must be 348)
    40      8h    dim          (dim[0] = rank, dim[1..] = extents)
    70      h     datatype     (2 uint8, 4 int16, 8 int32, 16 float32)
    72      h     bitpix
    76      8f    pixdim       (pixdim[1..3] = mm spacing)
    108     f     vox_offset
    112     f     scl_slope
    116     f     scl_inter
    344     4s    magic        ("n+1\\0" single file, "ni1\\0" .hdr/.img pair)

Byte order is inferred by trial: dim[0] must land in 1..7.  Gzip input
is detected from the 0x1F 0x8B leading bytes regardless of extension.
Orientation (qform/sform) is read past but deliberately ignored: all
geometry downstream is voxel index times spacing.  Two-file .hdr/.img
pairs and NIfTI-2 are out of scope.
"""

from __future__ import annotations

import gzip
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    HeaderSizeMismatch,
    IoFailure,
    MalformedHeader,
    RescaledLabels,
    TruncatedData,
    UnsupportedDatatype,
    UnsupportedDimension,
)
from .grid import Volume

HEADER_SIZE = 348
VOX_OFFSET = 352  # header + 4-byte extender, what this writer always emits

MAGIC_SINGLE = b"n+1\x00"
MAGIC_PAIR = b"ni1\x00"

_CODE_TO_DTYPE = {2: np.uint8, 4: np.int16, 8: np.int32, 16: np.float32}
_DTYPE_TO_CODE = {np.dtype(d): c for c, d in _CODE_TO_DTYPE.items()}
_GZIP_MAGIC = b"\x1f\x8b"


def _read_bytes(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if raw[:2] == _GZIP_MAGIC:
        try:
            raw = gzip.decompress(raw)
        except (EOFError, gzip.BadGzipFile, zlib.error) as exc:
            raise TruncatedData(f"{path}: gzip stream is corrupt: {exc}") from exc
    return raw


def _infer_byte_order(header: bytes) -> str:
    for order in ("<", ">"):
        (dim0,) = struct.unpack_from(order + "h", header, 40)
        if 1 <= dim0 <= 7:
            return order
    raise MalformedHeader("dim[0] not in 1..7 under either byte order")


def read_nifti(path) -> Volume:
    """Parse a .nii or .nii.gz file into a :class:`Volume`."""
    raw = _read_bytes(path)
    if len(raw) < HEADER_SIZE:
        raise TruncatedData(
            f"{path}: file holds {len(raw)} bytes, header needs {HEADER_SIZE}"
        )

    magic = raw[344:348]
    if magic == MAGIC_PAIR:
        raise BadMagic(f"{path}: two-file NIfTI-1 (.hdr/.img pairs) is unsupported")
    if magic != MAGIC_SINGLE:
        raise BadMagic(f"{path}: magic {magic!r} is not a NIfTI-1 signature")

    order = _infer_byte_order(raw)
    (sizeof_hdr,) = struct.unpack_from(order + "i", raw, 0)
    if sizeof_hdr != HEADER_SIZE:
        raise HeaderSizeMismatch(f"{path}: sizeof_hdr = {sizeof_hdr}, expected {HEADER_SIZE}")

    dim = struct.unpack_from(order + "8h", raw, 40)
    datatype, bitpix = struct.unpack_from(order + "2h", raw, 70)
    pixdim = struct.unpack_from(order + "8f", raw, 76)
    (vox_offset_f,) = struct.unpack_from(order + "f", raw, 108)
    scl_slope, scl_inter = struct.unpack_from(order + "2f", raw, 112)

    rank = dim[0]
    for axis in range(1, rank + 1):
        if dim[axis] < 1:
            raise MalformedHeader(f"{path}: dim[{axis}] = {dim[axis]} must be >= 1")
    # trailing axes are squeezed; anything beyond 3D must be singleton
    for axis in range(4, rank + 1):
        if dim[axis] != 1:
            raise UnsupportedDimension(
                f"{path}: axis {axis} has extent {dim[axis]}; only 3D data is supported"
            )
    dims = tuple(dim[axis] if axis <= rank else 1 for axis in (1, 2, 3))

    spacing = []
    for axis in (1, 2, 3):
        s = float(pixdim[axis]) if axis <= rank else 1.0
        if not np.isfinite(s) or s <= 0.0:
            raise MalformedHeader(f"{path}: pixdim[{axis}] = {s!r} must be finite and > 0")
        spacing.append(s)

    try:
        base = _CODE_TO_DTYPE[datatype]
    except KeyError:
        raise UnsupportedDatatype(f"{path}: datatype code {datatype} is unsupported") from None
    dtype = np.dtype(base)
    if bitpix != dtype.itemsize * 8:
        raise MalformedHeader(
            f"{path}: bitpix {bitpix} does not match datatype code {datatype}"
        )

    nontrivial_scale = scl_slope not in (0.0, 1.0) or scl_inter != 0.0
    if nontrivial_scale and dtype.kind in "iu":
        raise RescaledLabels(
            f"{path}: integer labels carry scl_slope={scl_slope!r}, "
            f"scl_inter={scl_inter!r}; rescaled label maps are rejected"
        )

    vox_offset = int(vox_offset_f)
    if vox_offset != vox_offset_f or vox_offset < HEADER_SIZE:
        raise MalformedHeader(f"{path}: vox_offset {vox_offset_f!r} is invalid")

    n_items = dims[0] * dims[1] * dims[2]
    n_bytes = n_items * dtype.itemsize
    payload = raw[vox_offset : vox_offset + n_bytes]
    if len(payload) < n_bytes:
        raise TruncatedData(
            f"{path}: payload holds {len(payload)} bytes, {n_bytes} required"
        )

    arr = np.frombuffer(payload, dtype=dtype.newbyteorder(order))
    arr = np.ascontiguousarray(arr, dtype=dtype)  # native byte order
    if nontrivial_scale:
        arr = (arr * np.float32(scl_slope) + np.float32(scl_inter)).astype(np.float32)
    return Volume(dims, tuple(spacing), arr.reshape(dims, order="F"))


def write_nifti(volume: Volume, path) -> None:
    """Emit a little-endian single-file NIfTI-1 (.nii, or .nii.gz by extension)."""
    header = bytearray(HEADER_SIZE)
    nx, ny, nz = volume.dims
    sx, sy, sz = volume.spacing
    code = _DTYPE_TO_CODE[volume.data.dtype]

    struct.pack_into("<i", header, 0, HEADER_SIZE)
    struct.pack_into("<8h", header, 40, 3, nx, ny, nz, 1, 1, 1, 1)
    struct.pack_into("<2h", header, 70, code, volume.data.dtype.itemsize * 8)
    struct.pack_into("<8f", header, 76, 1.0, sx, sy, sz, 0.0, 0.0, 0.0, 0.0)
    struct.pack_into("<f", header, 108, float(VOX_OFFSET))
    struct.pack_into("<2f", header, 112, 1.0, 0.0)
    struct.pack_into("<b", header, 123, 2)  # xyzt_units: millimetres
    header[344:348] = MAGIC_SINGLE

    le = volume.data.astype(volume.data.dtype.newbyteorder("<"), copy=False)
    blob = bytes(header) + b"\x00" * (VOX_OFFSET - HEADER_SIZE) + le.tobytes(order="F")

    try:
        if str(path).endswith(".gz"):
            with open(path, "wb") as fh:
                # fixed mtime keeps identical volumes byte-identical on disk
                with gzip.GzipFile(fileobj=fh, mode="wb", mtime=0) as gz:
                    gz.write(blob)
        else:
            with open(path, "wb") as fh:
                fh.write(blob)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
