"""Voxel-overlap metrics between a reference mask and a test mask.

The reference is the manual delineation; precision is TP / (TP + FP)
under that convention.  A pair of empty masks is an error rather than
a perfect score: an empty delineation signals an upstream failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BothEmpty
from .grid import Mask, check_grid_compat


@dataclass(frozen=True)
class ConfusionCounts:
    """Voxel tallies for one (reference, test) pair; tp+fp+fn+tn = grid size."""

    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class OverlapMetrics:
    dice: float
    jaccard: float
    precision: float
    recall: float
    volume_similarity: float
    # 0/0 precision or recall is reported as 0 with a note instead of failing
    warnings: tuple[str, ...] = field(default=())


def confusion_counts(ref: Mask, test: Mask) -> ConfusionCounts:
    check_grid_compat(ref, test)
    a = ref.occupancy
    b = test.occupancy
    tp = int(np.count_nonzero(a & b))
    fp = int(np.count_nonzero(~a & b))
    fn = int(np.count_nonzero(a & ~b))
    tn = a.size - tp - fp - fn
    return ConfusionCounts(tp, fp, fn, tn)


def overlap_metrics(c: ConfusionCounts) -> OverlapMetrics:
    tp, fp, fn = c.tp, c.fp, c.fn
    union = tp + fp + fn
    if union == 0:
        raise BothEmpty("both masks are empty; overlap metrics undefined")

    warnings = []
    dice = 2.0 * tp / (2.0 * tp + fp + fn)
    jaccard = tp / union
    if tp + fp == 0:
        precision = 0.0
        warnings.append("precision undefined (tp + fp = 0); reported as 0")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        warnings.append("recall undefined (tp + fn = 0); reported as 0")
    else:
        recall = tp / (tp + fn)
    volume_similarity = 1.0 - abs(fp - fn) / (2.0 * tp + fp + fn)
    return OverlapMetrics(dice, jaccard, precision, recall, volume_similarity, tuple(warnings))
