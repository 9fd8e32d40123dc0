"""Exception hierarchy shared by all modules."""


class SGDICPError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(SGDICPError, ValueError):
    pass


class DegenerateGeometryError(SGDICPError, ValueError):
    pass


class DivergedError(SGDICPError, ArithmeticError):
    pass


class NoCorrespondencesError(SGDICPError, ValueError):
    pass


class RegistrationFailedError(SGDICPError, RuntimeError):
    pass


class ParseError(SGDICPError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFormatError(SGDICPError, ValueError):
    pass


class EmptyCloudError(SGDICPError, ValueError):
    pass
