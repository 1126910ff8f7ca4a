"""Exception types shared across the package.

The CLI maps these onto process exit codes: bad input data is exit 2,
a refused work budget is exit 4. Usage errors (exit 1) come straight
from argparse and verification failures (exit 3) are reported, not
raised.
"""


class BnpruneError(Exception):
    """Base class for package errors."""


class DataError(BnpruneError):
    """Input data is unusable: wrong shape, missing values, bad arity."""


class ParseError(DataError):
    """A file could not be parsed; carries file context in the message."""


class CacheFormatError(DataError):
    """A score-cache file is malformed or truncated."""


class BudgetError(BnpruneError):
    """Requested exhaustive work exceeds the configured budget."""
