"""Shared exception base for the agewatch package.

Every error raised on a data or validation path derives from
:class:`AgewatchError`, so callers (and the CLI) can distinguish bad input
from programmer errors.
"""


class AgewatchError(Exception):
    """Base class for all agewatch data and validation errors."""
