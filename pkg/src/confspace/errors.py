"""Exception hierarchy shared by every module."""


class ConfSpaceError(Exception):
    """Base class for all errors raised by confspace."""


class InputError(ConfSpaceError, ValueError):
    """Malformed input: dimension mismatch, bad spec, unknown names."""


class DegenerateInputError(ConfSpaceError, ValueError):
    """Input lies in the degenerate set where a map is undefined."""


class UnsupportedError(ConfSpaceError):
    """The requested combination is outside what is implemented."""


class SamplingError(ConfSpaceError):
    """Rejection sampling exhausted its budget."""


class BoundaryError(ConfSpaceError, ValueError):
    """A point falls in an excluded set (within tolerance)."""


class MeshError(ConfSpaceError):
    """A sampled path is too coarse for unambiguous continuation."""


class ClassificationError(ConfSpaceError):
    """A lifted endpoint is not an exact basis element."""


class DisconnectedGraphError(ConfSpaceError):
    def __init__(self, components: int):
        super().__init__(f"graph is disconnected ({components} components)")
        self.components = components
