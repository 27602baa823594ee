"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible or invalid dimensions."""


class ParameterError(ValueError):
    """A scalar parameter is outside its admissible range."""


class StructureError(ValueError):
    """A matrix lacks required structure (Hermitian, PSD, doubly stochastic, ...)."""


class PreconditionError(ValueError):
    """An operation's precondition on its operands is violated."""


class ParseError(ValueError):
    """A channel file cannot be parsed or fails its declared invariants."""


class SolverError(RuntimeError):
    """The SDP solver did not reach an optimal certificate."""
