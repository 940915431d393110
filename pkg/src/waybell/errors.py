"""Exception hierarchy shared by every waybell module."""


class WaybellError(ValueError):
    """Base class for numeric-domain and model errors."""


class DomainError(WaybellError):
    """An angle lies outside the interval an operation is defined on."""


class ParameterError(WaybellError):
    """A model parameter (usually a spread of angular momentum) is invalid."""


class UnsupportedStateError(WaybellError):
    pass


class DimensionError(WaybellError):
    pass


class NonHermitianError(WaybellError):
    pass


class DegenerateBandError(WaybellError):
    """The exclusion band would swallow the whole hidden-variable interval."""


class ModelInconsistencyError(WaybellError):
    pass


class BracketError(WaybellError):
    """A root-finding bracket does not contain a sign change."""


class AllRejectedError(WaybellError):
    pass
