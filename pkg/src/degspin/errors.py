"""Exception types raised across the package."""


class DegSpinError(Exception):
    """Base class for all errors raised by degspin."""


class InvalidElementError(DegSpinError, ValueError):
    """A group element does not satisfy its defining constraints."""


class StructuralError(DegSpinError):
    """A bracket or decomposition left the algebra it should stay in."""


class InvalidInputError(DegSpinError, ValueError):
    """Newton-Cartan input data violates a precondition."""


class IllConditionedError(InvalidInputError):
    pass


class InconsistentInputsError(InvalidInputError):
    pass


class DegenerateComplementError(InvalidInputError):
    """Gram-Schmidt on ker(tau) hit a vanishing pivot."""


class InsufficientSamplesError(DegSpinError):
    """A finite-difference stencil does not fit inside the sampled grid."""


class NotSo103ValuedError(StructuralError):
    """Frame connection coefficients do not assemble into so(1,0,3)."""


class BoundaryError(DegSpinError):
    """A spinor-field stencil reached past the grid edge."""


class InvalidMassError(DegSpinError, ValueError):
    pass


class IntegratorFailureError(DegSpinError):
    pass


class ConfigError(DegSpinError):
    """Malformed manifold configuration.

    ``path`` is the dotted field path (``samples.g[3]``) and ``line`` the
    1-based source line when known.
    """

    def __init__(self, message, path="", line=None):
        self.path = path
        self.line = line
        where = path or "<root>"
        if line is not None:
            where = f"{where} (line {line})"
        super().__init__(f"{where}: {message}")
