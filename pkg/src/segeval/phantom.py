"""Synthetic masks with analytically known geometry, plus volumetry.

Generators are deterministic given their arguments.  ``flip_noise``
draws from NumPy's PCG64 generator seeded through SeedSequence; the
uniform draws follow C-order raster scan of the grid, so a given
(mask, rate, seed) always produces the same output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import BothEmpty, OutOfBounds
from .grid import Mask


@dataclass(frozen=True)
class BallKernel:
    """Euclidean ball in isotropic index space: offsets with ||o||2 <= radius."""

    radius_vox: float
    offsets: np.ndarray  # (n, 3) ints; contains the origin, symmetric under negation

    @property
    def cube(self) -> np.ndarray:
        """Structuring element as a centered boolean cube."""
        r = int(math.floor(self.radius_vox))
        side = 2 * r + 1
        cube = np.zeros((side, side, side), dtype=bool)
        cube[self.offsets[:, 0] + r, self.offsets[:, 1] + r, self.offsets[:, 2] + r] = True
        return cube


def ball_kernel(radius_vox: float) -> BallKernel:
    if radius_vox < 0:
        raise ValueError(f"radius must be >= 0, got {radius_vox}")
    r = int(math.floor(radius_vox))
    axis = np.arange(-r, r + 1)
    ii, jj, kk = np.meshgrid(axis, axis, axis, indexing="ij")
    keep = ii * ii + jj * jj + kk * kk <= radius_vox * radius_vox
    offsets = np.stack([ii[keep], jj[keep], kk[keep]], axis=1)
    return BallKernel(float(radius_vox), offsets)


def gen_box(dims, spacing, lo, hi) -> Mask:
    """Mask that is true exactly on the closed index box [lo, hi]."""
    nx, ny, nz = (int(d) for d in dims)
    lo = tuple(int(v) for v in lo)
    hi = tuple(int(v) for v in hi)
    for axis, (l, h, n) in enumerate(zip(lo, hi, (nx, ny, nz))):
        if not 0 <= l <= h < n:
            raise OutOfBounds(
                f"box corner range [{l}, {h}] does not fit axis {axis} of extent {n}"
            )
    occ = np.zeros((nx, ny, nz), dtype=bool)
    occ[lo[0] : hi[0] + 1, lo[1] : hi[1] + 1, lo[2] : hi[2] + 1] = True
    return Mask((nx, ny, nz), spacing, occ)


def gen_ellipsoid(dims, spacing, center, radii_mm) -> Mask:
    """Ellipsoid in physical coordinates around a (float) voxel-index center."""
    nx, ny, nz = (int(d) for d in dims)
    cx, cy, cz = (float(c) for c in center)
    rx, ry, rz = (float(r) for r in radii_mm)
    if min(rx, ry, rz) <= 0:
        raise ValueError(f"radii must be positive, got {(rx, ry, rz)}")
    for axis, (c, n) in enumerate(zip((cx, cy, cz), (nx, ny, nz))):
        if not 0.0 <= c <= n - 1.0:
            raise OutOfBounds(f"center coordinate {c} outside axis {axis} of extent {n}")
    sx, sy, sz = (float(s) for s in spacing)
    ii, jj, kk = np.ogrid[0:nx, 0:ny, 0:nz]
    q = (
        ((ii - cx) * sx / rx) ** 2
        + ((jj - cy) * sy / ry) ** 2
        + ((kk - cz) * sz / rz) ** 2
    )
    return Mask((nx, ny, nz), spacing, q <= 1.0)


def translate(mask: Mask, offset) -> Mask:
    """Shift by whole voxels; voxels leaving the grid are dropped."""
    out = np.zeros_like(mask.occupancy)
    src = []
    dst = []
    for d, n in zip((int(v) for v in offset), mask.dims):
        if abs(d) >= n:
            return Mask(mask.dims, mask.spacing, out)
        if d >= 0:
            src.append(slice(0, n - d))
            dst.append(slice(d, n))
        else:
            src.append(slice(-d, n))
            dst.append(slice(0, n + d))
    out[tuple(dst)] = mask.occupancy[tuple(src)]
    return Mask(mask.dims, mask.spacing, out)


def dilate_ball(mask: Mask, radius_vox: float) -> Mask:
    """Minkowski sum with a Euclidean ball kernel, clipped at the grid."""
    kernel = ball_kernel(radius_vox)
    if kernel.offsets.shape[0] == 1:
        return Mask(mask.dims, mask.spacing, mask.occupancy.copy())
    occ = ndimage.binary_dilation(mask.occupancy, structure=kernel.cube)
    return Mask(mask.dims, mask.spacing, occ)


def flip_noise(mask: Mask, rate: float, seed: int) -> Mask:
    """Invert each voxel independently with the given probability."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    rng = np.random.default_rng(seed)
    flips = rng.random(mask.dims) < rate
    return Mask(mask.dims, mask.spacing, mask.occupancy ^ flips)


def volume_mm3(mask: Mask) -> float:
    sx, sy, sz = mask.spacing
    return mask.count * sx * sy * sz


def asymmetry_index(vol_left: float, vol_right: float) -> float:
    """Percent left-right asymmetry: 200 (L - R) / (L + R), in [-200, 200]."""
    total = vol_left + vol_right
    if total <= 0.0:
        raise BothEmpty("asymmetry undefined: both volumes are zero")
    return 200.0 * (vol_left - vol_right) / total
