"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2, data
problems exit 3, and an estimation-failure rate above the configured
threshold exits 4.
"""


class EtmvolError(Exception):
    """Base class for all package errors."""


class ConfigurationError(EtmvolError):
    """Invalid configuration value or unknown option."""


class DataError(EtmvolError):
    """Base class for problems with input data."""


class CoverageError(DataError):
    """A requested date falls outside the coverage of a reference series."""


class DataGapError(DataError):
    """A month inside the sample span has no observations."""


class DomainError(DataError):
    """An input value violates a domain requirement (e.g. nonpositive price)."""


class AlignmentError(DataError):
    """Two series that must share an index do not line up."""


class DegeneracyError(DataError):
    """An input is degenerate for the requested statistic (e.g. zero variance)."""


class ValidityError(DataError):
    """A structurally invalid input, such as non-monotone quantiles."""


class EstimationError(EtmvolError):
    """Estimation failed in a way that cannot be flagged and skipped."""
