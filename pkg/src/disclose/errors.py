"""Exception types shared across the pipeline."""


class DiscloseError(Exception):
    """Base error carrying a machine-readable code.

    Subclasses only select which CLI exit code the error maps to.
    """

    exit_code = 2

    def __init__(self, code, message=""):
        self.code = code
        self.message = message or code
        super().__init__(f"{code}: {self.message}" if message else code)


class ValidationError(DiscloseError):
    """Bad configuration, arguments, or precondition on user input."""

    exit_code = 1


class InputFileError(DiscloseError):
    """A file that should be readable is missing or unreadable."""

    exit_code = 3
