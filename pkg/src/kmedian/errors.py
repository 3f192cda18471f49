"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: InputError -> 2, BudgetExceededError -> 3.
Failed verification checks are reported, not raised.
"""


class KMedianError(Exception):
    """Base class for all package errors."""


class InputError(KMedianError, ValueError):
    """Invalid ids, parameters, or malformed input files."""


class DomainError(KMedianError, ValueError):
    """Operation undefined for the given state (e.g. cost of an empty set)."""


class InstanceFormatError(InputError):
    """Instance JSON rejected; the message names the offending field."""


class BudgetExceededError(KMedianError, RuntimeError):
    """Exact oracle or densification refused because the instance is too big."""
