"""Exception taxonomy: input errors exit 2 at the CLI, invariant failures exit 3."""


class PrimelabError(Exception):
    """Base class for all package errors."""


class InputError(PrimelabError):
    """Invalid argument or precondition violation supplied by the caller."""


class DegenerateBlockError(InputError):
    """Window too short for the requested modulus (block length N = 0)."""


class ResourceError(InputError):
    """A computation exceeded its configured budget."""


class InvariantError(PrimelabError):
    """An internal identity or contract that should always hold was violated."""
