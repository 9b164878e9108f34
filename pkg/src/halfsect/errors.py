"""Exception types shared across the package.

The CLI maps these onto process exit codes: input problems exit 2,
numerical failures exit 3, degenerate-frame saturation exits 4.
"""


class InputError(ValueError):
    """Bad user-supplied data: files, parameters, malformed records."""


class DegenerateFrameError(ValueError):
    """A section frame whose hemisphere split is numerically undefined."""


class DegenerateSaturationError(RuntimeError):
    """Too large a fraction of requested frames had to be skipped."""


class NumericalError(RuntimeError):
    """A numerical stage failed its internal quality check."""
