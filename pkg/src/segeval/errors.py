"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad inputs,
incompatible geometry, or degenerate data (the CLI maps these to exit
code 2), and :class:`FormatError` for file-format violations and I/O
failures (exit code 3).
"""


class SegevalError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SegevalError):
    """Invalid inputs, geometry, or degenerate data."""


class FormatError(SegevalError):
    """File-format violations and I/O failures."""


# file parsing / writing

class BadMagic(FormatError):
    """File does not carry a supported NIfTI-1 magic string."""


class HeaderSizeMismatch(FormatError):
    """Header's sizeof_hdr field is not 348."""


class MalformedHeader(FormatError):
    """Header fields are internally inconsistent."""


class UnsupportedDatatype(FormatError):
    """Voxel datatype outside uint8 / int16 / int32 / float32."""


class UnsupportedDimension(FormatError):
    """More than three non-singleton axes."""


class TruncatedData(FormatError):
    """File is shorter than the header or payload requires."""


class RescaledLabels(FormatError):
    """Integer label data carries a nontrivial scl_slope / scl_inter."""


class IoFailure(FormatError):
    """Underlying filesystem operation failed."""


# grids and selectors

class SelectorTypeMismatch(ValidationError):
    """Label selector applied to a non-integer volume."""


class GridMismatch(ValidationError):
    """Two grids have different voxel dimensions."""


class SpacingMismatch(ValidationError):
    """Two grids disagree on voxel spacing beyond tolerance."""


class OutOfBounds(ValidationError):
    """Requested geometry does not fit inside the grid."""


# degenerate metric inputs

class EmptyMask(ValidationError):
    """Operation requires a non-empty mask."""


class EmptySurface(ValidationError):
    """Distance transform requires at least one surface voxel."""


class EmptyDistances(ValidationError):
    """Distance summary requires non-empty samples."""


class BothEmpty(ValidationError):
    """Both inputs are empty, so the quantity is undefined."""


# statistics

class LengthMismatch(ValidationError):
    """Paired samples have different lengths."""


class TooFewCases(ValidationError):
    """Fewer than two paired cases."""


class DegenerateVariance(ValidationError):
    """All paired differences are identical; t statistic undefined."""


class AllZeroDifferences(ValidationError):
    """Every paired difference is zero; signed-rank test undefined."""


class ZeroBaseline(ValidationError):
    """Percent difference against a zero baseline mean."""


class NoPairedCases(ValidationError):
    """The two methods share no case for any metric."""


class DuplicateRecord(ValidationError):
    """(case_id, method, metric) occurs more than once in a table."""


class TooFewDelineations(ValidationError):
    """Variability analysis needs at least two qualifying delineations."""


class ManifestError(ValidationError):
    """Cohort manifest is empty or structurally invalid."""
