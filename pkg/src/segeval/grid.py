"""Voxel-grid value types: volumes, binary masks, and label selectors.

All geometry is voxel index times per-axis spacing in millimetres;
orientation metadata plays no role.  Arrays use index order (x, y, z)
with x fastest on disk.  Instances are treated as immutable after
construction and are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    GridMismatch,
    SelectorTypeMismatch,
    SpacingMismatch,
    UnsupportedDatatype,
)

SUPPORTED_DTYPES = (np.uint8, np.int16, np.int32, np.float32)

# relative tolerance for per-axis spacing agreement between two grids
SPACING_RTOL = 1e-5


def _as_dims(dims) -> tuple[int, int, int]:
    nx, ny, nz = (int(d) for d in dims)
    if min(nx, ny, nz) < 1:
        raise ValueError(f"dims must be positive, got {(nx, ny, nz)}")
    return nx, ny, nz


def _as_spacing(spacing) -> tuple[float, float, float]:
    sx, sy, sz = (float(s) for s in spacing)
    for s in (sx, sy, sz):
        if not np.isfinite(s) or s <= 0.0:
            raise ValueError(f"spacing must be finite and positive, got {(sx, sy, sz)}")
    return sx, sy, sz


def _shape_array(arr: np.ndarray, dims: tuple[int, int, int]) -> np.ndarray:
    if arr.ndim == 1 and arr.size == dims[0] * dims[1] * dims[2]:
        # flat payloads are in x-fastest order
        return arr.reshape(dims, order="F")
    if arr.shape != dims:
        raise ValueError(f"data shape {arr.shape} does not match dims {dims}")
    return arr


@dataclass(eq=False)
class Volume:
    """Dense scalar grid with voxel dimensions and mm spacing."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    data: np.ndarray

    def __post_init__(self):
        self.dims = _as_dims(self.dims)
        self.spacing = _as_spacing(self.spacing)
        arr = np.asarray(self.data)
        if arr.dtype not in [np.dtype(t) for t in SUPPORTED_DTYPES]:
            raise UnsupportedDatatype(f"unsupported volume dtype {arr.dtype}")
        self.data = _shape_array(arr, self.dims)

    def __eq__(self, other) -> bool:
        """Equal when dims, dtype, and payload match and spacing agrees to 1e-6."""
        if not isinstance(other, Volume):
            return NotImplemented
        return (
            self.dims == other.dims
            and self.data.dtype == other.data.dtype
            and all(
                abs(a - b) <= 1e-6 * max(abs(a), abs(b))
                for a, b in zip(self.spacing, other.spacing)
            )
            and bool(np.array_equal(self.data, other.data))
        )


@dataclass(eq=False)
class Mask:
    """Binary occupancy grid sharing a volume's geometry."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    occupancy: np.ndarray

    def __post_init__(self):
        self.dims = _as_dims(self.dims)
        self.spacing = _as_spacing(self.spacing)
        arr = np.asarray(self.occupancy)
        if arr.dtype != np.bool_:
            raise ValueError(f"occupancy must be boolean, got {arr.dtype}")
        self.occupancy = _shape_array(arr, self.dims)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.occupancy))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mask):
            return NotImplemented
        return (
            self.dims == other.dims
            and self.spacing == other.spacing
            and bool(np.array_equal(self.occupancy, other.occupancy))
        )


@dataclass(frozen=True)
class LabelSelector:
    """How a binary mask is carved out of a scalar volume.

    ``exact_label`` keeps voxels equal to an integer label and is only
    valid on integer volumes; ``threshold`` keeps voxels >= a minimum
    and works on any datatype.
    """

    kind: str
    value: float

    @staticmethod
    def exact_label(value: int) -> "LabelSelector":
        return LabelSelector("exact_label", int(value))

    @staticmethod
    def threshold(minimum: float) -> "LabelSelector":
        return LabelSelector("threshold", float(minimum))

    def describe(self) -> str:
        if self.kind == "exact_label":
            return f"label == {int(self.value)}"
        return f"value >= {self.value:g}"


def extract_mask(volume: Volume, selector: LabelSelector) -> Mask:
    """Derive a binary mask from a volume; geometry is copied."""
    if selector.kind == "exact_label":
        if volume.data.dtype.kind not in "iu":
            raise SelectorTypeMismatch(
                f"exact-label selector requires integer data, volume is {volume.data.dtype}"
            )
        occ = volume.data == int(selector.value)
    elif selector.kind == "threshold":
        occ = volume.data >= selector.value
    else:
        raise ValueError(f"unknown selector kind {selector.kind!r}")
    return Mask(volume.dims, volume.spacing, occ)


def check_grid_compat(a, b) -> None:
    """Require equal dims and per-axis spacing within relative 1e-5.

    Accepts any pair of objects with ``dims`` and ``spacing`` attributes
    (volumes or masks).
    """
    if a.dims != b.dims:
        raise GridMismatch(f"grid dimensions differ: {a.dims} vs {b.dims}")
    for axis, (sa, sb) in enumerate(zip(a.spacing, b.spacing)):
        if abs(sa - sb) > SPACING_RTOL * max(abs(sa), abs(sb)):
            raise SpacingMismatch(
                f"axis {axis} spacing differs beyond tolerance: {sa!r} vs {sb!r}"
            )


def mask_to_volume(mask: Mask) -> Volume:
    """Pack a mask as a uint8 volume (0 background, 1 foreground)."""
    return Volume(mask.dims, mask.spacing, mask.occupancy.astype(np.uint8))
