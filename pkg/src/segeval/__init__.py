"""segeval: overlap and surface-distance evaluation for 3D segmentation masks.

The library compares automated segmentations against a manual reference
on a shared voxel grid: voxel-overlap metrics (Dice, Jaccard, precision,
recall, volume similarity), surface-distance metrics in millimetres
(Hausdorff, HD95, mean, RMS) built on an exact anisotropic Euclidean
distance transform, volumetry with a left-right asymmetry index, and
cohort-level method comparison with paired t and Wilcoxon signed-rank
tests reported as percent differences with p-values.  Synthetic phantom
generators provide test data with analytically known geometry.
"""

__version__ = "0.1.0"

from .errors import (
    AllZeroDifferences,
    BadMagic,
    BothEmpty,
    DegenerateVariance,
    DuplicateRecord,
    EmptyDistances,
    EmptyMask,
    EmptySurface,
    FormatError,
    GridMismatch,
    HeaderSizeMismatch,
    IoFailure,
    LengthMismatch,
    MalformedHeader,
    ManifestError,
    NoPairedCases,
    OutOfBounds,
    RescaledLabels,
    SegevalError,
    SelectorTypeMismatch,
    SpacingMismatch,
    TooFewCases,
    TooFewDelineations,
    TruncatedData,
    UnsupportedDatatype,
    UnsupportedDimension,
    ValidationError,
    ZeroBaseline,
)
from .grid import (
    LabelSelector,
    Mask,
    Volume,
    check_grid_compat,
    extract_mask,
    mask_to_volume,
)
from .nifti import read_nifti, write_nifti
from .overlap import ConfusionCounts, OverlapMetrics, confusion_counts, overlap_metrics
from .phantom import (
    BallKernel,
    asymmetry_index,
    ball_kernel,
    dilate_ball,
    flip_noise,
    gen_box,
    gen_ellipsoid,
    translate,
    volume_mm3,
)
from .reporting import evaluate_pair
from .stats import (
    ComparisonRow,
    MetricRecord,
    TestResult,
    VariabilityReport,
    cohort_compare,
    paired_t,
    percent_difference,
    rater_variability,
    wilcoxon_signed_rank,
)
from .surface import (
    DistanceField,
    DistanceSummary,
    SurfaceSet,
    boundary,
    distance_metrics,
    edt,
    surface_distances,
)

__all__ = [
    "__version__",
    # grid types and I/O
    "Volume",
    "Mask",
    "LabelSelector",
    "read_nifti",
    "write_nifti",
    "extract_mask",
    "check_grid_compat",
    "mask_to_volume",
    # phantoms and volumetry
    "BallKernel",
    "ball_kernel",
    "gen_box",
    "gen_ellipsoid",
    "translate",
    "dilate_ball",
    "flip_noise",
    "volume_mm3",
    "asymmetry_index",
    # overlap
    "ConfusionCounts",
    "OverlapMetrics",
    "confusion_counts",
    "overlap_metrics",
    # surfaces and distances
    "SurfaceSet",
    "DistanceField",
    "DistanceSummary",
    "boundary",
    "edt",
    "surface_distances",
    "distance_metrics",
    # statistics
    "MetricRecord",
    "TestResult",
    "ComparisonRow",
    "VariabilityReport",
    "paired_t",
    "wilcoxon_signed_rank",
    "percent_difference",
    "cohort_compare",
    "rater_variability",
    # pair evaluation
    "evaluate_pair",
    # errors
    "SegevalError",
    "ValidationError",
    "FormatError",
    "BadMagic",
    "HeaderSizeMismatch",
    "MalformedHeader",
    "UnsupportedDatatype",
    "UnsupportedDimension",
    "TruncatedData",
    "RescaledLabels",
    "IoFailure",
    "SelectorTypeMismatch",
    "GridMismatch",
    "SpacingMismatch",
    "OutOfBounds",
    "EmptyMask",
    "EmptySurface",
    "EmptyDistances",
    "BothEmpty",
    "LengthMismatch",
    "TooFewCases",
    "DegenerateVariance",
    "AllZeroDifferences",
    "ZeroBaseline",
    "NoPairedCases",
    "DuplicateRecord",
    "TooFewDelineations",
    "ManifestError",
]
