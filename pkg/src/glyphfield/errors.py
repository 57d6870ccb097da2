class GlyphFieldError(Exception):
    """Base class for all errors raised by this package."""


class SvgError(GlyphFieldError, ValueError):
    pass


class UnsupportedCommand(SvgError):
    pass


class OpenContour(SvgError):
    pass


class EmptyPath(SvgError):
    pass


class DegenerateBox(GlyphFieldError, ValueError):
    pass


class ZeroTangent(GlyphFieldError, ArithmeticError):
    pass


class ShapeMismatch(GlyphFieldError, ValueError):
    pass


class EmptyInput(GlyphFieldError, ValueError):
    pass


class NoInterior(GlyphFieldError, ValueError):
    pass


class DivergenceDetected(GlyphFieldError, FloatingPointError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class FormatError(GlyphFieldError, ValueError):
    """A serialized SDF1/SDC1/PFD1/PGM file is malformed."""


class ParallelTangents(GlyphFieldError, ArithmeticError):
    pass


class NonManifoldBoundary(GlyphFieldError, RuntimeError):
    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump


class StitchFailure(NonManifoldBoundary):
    pass
