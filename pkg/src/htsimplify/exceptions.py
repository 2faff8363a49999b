"""Exception types raised across the package."""


class HTSimplifyError(Exception):
    """Base class for all package errors."""


class InvalidPolyline(HTSimplifyError, ValueError):
    pass


class DegenerateVertex(HTSimplifyError, ValueError):
    pass


class CollinearOverlap(HTSimplifyError):
    """Two segments overlap along a shared line instead of crossing at a point."""

    def __init__(self, s1, s2):
        super().__init__(f"collinear overlap between {s1} and {s2}")
        self.segments = (s1, s2)


class IterationTooLarge(HTSimplifyError, ValueError):
    pass


class LevelOutOfRange(HTSimplifyError, ValueError):
    pass


class EmptyInput(HTSimplifyError, ValueError):
    pass


class NegativeValue(HTSimplifyError, ValueError):
    pass


class RulerTooLarge(HTSimplifyError, ValueError):
    pass


class RulerNotPositive(HTSimplifyError, ValueError):
    pass


class InsufficientSamples(HTSimplifyError, ValueError):
    pass


class TooFewVertices(HTSimplifyError, ValueError):
    pass


class RatioUndefined(HTSimplifyError, ValueError):
    pass


class NonPositiveTolerance(HTSimplifyError, ValueError):
    pass


class NonPositiveThreshold(HTSimplifyError, ValueError):
    pass


class TargetOutOfRange(HTSimplifyError, ValueError):
    pass


class ParseError(HTSimplifyError, ValueError):
    """Malformed input file.

    ``line`` and ``column`` are 1-based when known; ``where`` names the
    offending element (a JSON path, a WKT record) when no text position
    applies.
    """

    def __init__(self, message, line=None, column=None, where=None, path=None):
        self.message = message
        self.line = line
        self.column = column
        self.where = where
        self.path = path
        super().__init__(self._format())

    def _format(self):
        loc = []
        if self.path:
            loc.append(str(self.path))
        if self.line is not None:
            loc.append(f"line {self.line}")
        if self.column is not None:
            loc.append(f"column {self.column}")
        if self.where:
            loc.append(self.where)
        prefix = ", ".join(loc)
        return f"{prefix}: {self.message}" if prefix else self.message


class UnsupportedGeometry(ParseError):
    pass


class WriteFailure(HTSimplifyError, OSError):
    pass
