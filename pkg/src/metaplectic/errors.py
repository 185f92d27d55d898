"""Exception taxonomy shared by all modules."""


class FmtError(Exception):
    """Base class for every error raised by this package."""


class ShapeMismatch(FmtError):
    """Matrix blocks are not square or do not share one dimension."""


class NotSymplectic(FmtError):
    """A block constraint residual exceeded its tolerance."""


class SingularB(FmtError):
    """|det B| is below the floor; the integral kernel needs B inverted."""


class DegenerateCase(FmtError):
    """A specialization parameter makes the B block singular."""


class BadParams(FmtError):
    """Constructor parameters are malformed or inconsistent."""


class Fault(FmtError):
    """An internal retry budget was exhausted."""


class GridMismatch(FmtError):
    """Binary operation on signals living on different grids."""


class DimMismatch(FmtError):
    """Signal, matrix and output grid dimensions disagree."""


class OffGrid(FmtError):
    """Requested point does not coincide with any grid point."""


class BadBounds(FmtError):
    """Box bounds with lo >= hi on some axis."""


class ZeroReference(FmtError):
    """SNR requested against an identically zero reference."""


class ConstructionFailed(FmtError):
    """A constructed fixture failed its own self-check."""


class FormatError(FmtError):
    """File does not follow the FMTSIG01 or matrix JSON layout."""
