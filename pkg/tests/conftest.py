"""Shared fixtures and independent oracles.

Every oracle here recomputes its quantity along a different route than
the library (explicit loops, pairwise distance matrices, quadrature, or
full enumeration) so the two sides can disagree.
"""

import math
import struct

import numpy as np
import pytest
from scipy import integrate
from scipy.spatial.distance import cdist

from segeval import Mask, Volume, gen_ellipsoid, mask_to_volume, write_nifti
from segeval.cli import main as cli_main


# ---------------------------------------------------------------- masks


def random_blob_mask(rng, dims, spacing=(1.0, 1.0, 1.0), noise_rate=0.0):
    """Union of 1-3 random ellipsoids, optionally roughened with flips."""
    dims = tuple(int(d) for d in dims)
    occ = np.zeros(dims, dtype=bool)
    sx, sy, sz = spacing
    ii, jj, kk = np.ogrid[0 : dims[0], 0 : dims[1], 0 : dims[2]]
    for _ in range(int(rng.integers(1, 4))):
        cx, cy, cz = (rng.uniform(1.0, max(1.5, d - 2.0)) for d in dims)
        rx, ry, rz = (rng.uniform(1.5, max(2.0, d / 3.0)) for d in dims)
        occ |= (
            ((ii - cx) * sx / rx) ** 2
            + ((jj - cy) * sy / ry) ** 2
            + ((kk - cz) * sz / rz) ** 2
        ) <= 1.0
    if noise_rate > 0.0:
        occ ^= rng.random(dims) < noise_rate
    if not occ.any():
        occ[dims[0] // 2, dims[1] // 2, dims[2] // 2] = True
    return Mask(dims, spacing, occ)


def plate_mask(dims, spacing):
    """Plates of thickness 1 at every odd z index, spanning all of x, y."""
    occ = np.zeros(dims, dtype=bool)
    for z in range(1, dims[2], 2):
        occ[:, :, z] = True
    return Mask(dims, spacing, occ)


# ------------------------------------------------------------- overlap


def naive_confusion(ref_occ, test_occ):
    """Confusion tallies by an explicit scan over every voxel."""
    tp = fp = fn = tn = 0
    for a, b in zip(ref_occ.ravel().tolist(), test_occ.ravel().tolist()):
        if a and b:
            tp += 1
        elif b:
            fp += 1
        elif a:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def naive_dice(ref_occ, test_occ):
    tp, fp, fn, _ = naive_confusion(ref_occ, test_occ)
    return 2.0 * tp / (2.0 * tp + fp + fn)


# ------------------------------------------------------------ surfaces


def naive_boundary(occ):
    """Loop-based 6-connectivity boundary; grid border is background."""
    nx, ny, nz = occ.shape
    out = np.zeros_like(occ)
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if not occ[i, j, k]:
                    continue
                for di, dj, dk in (
                    (1, 0, 0),
                    (-1, 0, 0),
                    (0, 1, 0),
                    (0, -1, 0),
                    (0, 0, 1),
                    (0, 0, -1),
                ):
                    a, b, c = i + di, j + dj, k + dk
                    if not (0 <= a < nx and 0 <= b < ny and 0 <= c < nz):
                        out[i, j, k] = True
                        break
                    if not occ[a, b, c]:
                        out[i, j, k] = True
                        break
    return out


def brute_force_distance_field(seed_occ, spacing):
    """Min over sites of the pairwise Euclidean distance, at every voxel."""
    dims = seed_occ.shape
    scale = np.asarray(spacing, dtype=np.float64)
    sites = np.argwhere(seed_occ).astype(np.float64) * scale
    voxels = (
        np.indices(dims).reshape(3, -1).T.astype(np.float64) * scale
    )
    out = np.empty(voxels.shape[0], dtype=np.float64)
    step = 4096
    for start in range(0, voxels.shape[0], step):
        stop = min(start + step, voxels.shape[0])
        out[start:stop] = cdist(voxels[start:stop], sites).min(axis=1)
    return out.reshape(dims)


def brute_force_hausdorff(ref_occ, test_occ, spacing):
    """O(n^2) pairwise max-of-directed-min over boundary voxel centres."""
    scale = np.asarray(spacing, dtype=np.float64)
    pa = np.argwhere(naive_boundary(ref_occ)).astype(np.float64) * scale
    pb = np.argwhere(naive_boundary(test_occ)).astype(np.float64) * scale
    d = cdist(pa, pb)
    return max(d.min(axis=1).max(), d.min(axis=0).max())


# ----------------------------------------------------------- statistics


def naive_midranks(values):
    values = list(values)
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return np.array(ranks)


def wilcoxon_enumeration_p(diffs):
    """Literal enumeration of all 2^n sign assignments over the midranks."""
    d = np.asarray(diffs, dtype=np.float64)
    d = d[d != 0.0]
    n = d.size
    ranks = naive_midranks(np.abs(d))
    w_obs = ranks[d > 0].sum()
    center = ranks.sum() / 2.0
    patterns = (np.arange(2**n)[:, None] >> np.arange(n)) & 1
    w_all = patterns @ ranks
    return float(np.mean(np.abs(w_all - center) >= abs(w_obs - center)))


def t_p_quadrature(t, df):
    """Two-sided t tail probability by numerical integration of the density."""
    c = math.exp(math.lgamma((df + 1) / 2.0) - math.lgamma(df / 2.0)) / math.sqrt(
        df * math.pi
    )

    def pdf(s):
        return c * (1.0 + s * s / df) ** (-(df + 1) / 2.0)

    tail, _ = integrate.quad(pdf, abs(t), np.inf)
    return 2.0 * tail


# ----------------------------------------------------------- NIfTI twin


def write_nifti_big_endian(volume, path):
    """Big-endian twin writer used only to exercise byte-order handling."""
    code = {"uint8": 2, "int16": 4, "int32": 8, "float32": 16}[volume.data.dtype.name]
    header = bytearray(348)
    struct.pack_into(">i", header, 0, 348)
    struct.pack_into(">8h", header, 40, 3, *volume.dims, 1, 1, 1, 1)
    struct.pack_into(">2h", header, 70, code, volume.data.dtype.itemsize * 8)
    struct.pack_into(">8f", header, 76, 1.0, *volume.spacing, 0.0, 0.0, 0.0, 0.0)
    struct.pack_into(">f", header, 108, 352.0)
    struct.pack_into(">2f", header, 112, 1.0, 0.0)
    header[344:348] = b"n+1\x00"
    payload = volume.data.astype(volume.data.dtype.newbyteorder(">")).tobytes(order="F")
    with open(path, "wb") as fh:
        fh.write(bytes(header) + b"\x00" * 4 + payload)


# ------------------------------------------------------------- cohorts


def build_plate_cohort(root, n_cases, noise_rate=0.005):
    """Synthetic cohort: plate-stack references with two derived methods.

    methodA flips a small fraction of voxels; methodB is translated by
    2 voxels and dilated by 1.  The plate geometry puts every grid voxel
    within one voxel of the reference surface, so the scattered flips
    stay metrically local, while the dilation welds the plates into a
    solid block whose interior surfaces vanish.  The two degradations
    therefore pull every metric in opposite directions.
    """
    root.mkdir(parents=True, exist_ok=True)
    lines = ["case_id,role,path"]
    rng = np.random.default_rng(20_16)
    for case in range(n_cases):
        nx = int(rng.choice([29, 31, 33]))
        ny = int(rng.choice([29, 31, 33]))
        lam = 1.0 + 0.01 * case
        ref = plate_mask((nx, ny, 31), (lam, lam, lam))
        case_id = f"case{case:03d}"
        ref_path = root / f"{case_id}_ref.nii.gz"
        write_nifti(mask_to_volume(ref), ref_path)
        a_path = root / f"{case_id}_a.nii.gz"
        b_path = root / f"{case_id}_b.nii.gz"
        assert (
            cli_main(
                [
                    "phantom",
                    "derive",
                    "--input",
                    str(ref_path),
                    "--noise",
                    str(noise_rate),
                    "--seed",
                    str(case),
                    "--out",
                    str(a_path),
                ]
            )
            == 0
        )
        assert (
            cli_main(
                [
                    "phantom",
                    "derive",
                    "--input",
                    str(ref_path),
                    "--translate",
                    "2",
                    "0",
                    "0",
                    "--dilate",
                    "1",
                    "--out",
                    str(b_path),
                ]
            )
            == 0
        )
        lines.append(f"{case_id},reference,{ref_path.name}")
        lines.append(f"{case_id},method:methodA,{a_path.name}")
        lines.append(f"{case_id},method:methodB,{b_path.name}")
    manifest = root / "manifest.csv"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


@pytest.fixture()
def sphere_mask():
    return gen_ellipsoid((32, 32, 32), (1.0, 1.0, 1.0), (16, 16, 16), (8.0, 8.0, 8.0))
