"""Exception types raised across dixlab."""


class DixlabError(Exception):
    pass


class NotHermitian(DixlabError, ValueError):
    pass


class NotNormal(DixlabError, ValueError):
    pass


class NoConvergence(DixlabError, RuntimeError):
    pass


class EmptyRegion(DixlabError, ValueError):
    pass


class ShapeMismatch(DixlabError, ValueError):
    pass


class NotInY(DixlabError, ValueError):
    pass


class NotSquareZero(DixlabError, ValueError):
    pass


class DimensionOne(DixlabError, ValueError):
    pass


class NotSelfadjoint(DixlabError, ValueError):
    pass


class BadPin(DixlabError, ValueError):
    pass


class InfeasibleAtAnyStep(DixlabError, ValueError):
    pass


class UnsupportedBase(DixlabError, ValueError):
    pass


class NotDensity(DixlabError, ValueError):
    pass


class UnknownFixture(DixlabError, KeyError):
    pass


class BadParams(DixlabError, ValueError):
    pass


class SchemaError(DixlabError, ValueError):
    """Invalid algebra-spec document; ``path`` is a JSON pointer."""

    def __init__(self, message, path=""):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path


class RenderError(DixlabError, ValueError):
    pass
