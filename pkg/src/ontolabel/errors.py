"""Exception types shared across the package."""


class OntolabelError(Exception):
    """Base class for all package errors."""


class FormatError(OntolabelError):
    """Malformed input file. Carries a line number when one is known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownClassError(OntolabelError):
    """A class id was used that the ontology does not contain."""


class DimensionMismatchError(OntolabelError):
    """Feature vector dimension does not match the model."""


class EmptyTrainingSetError(OntolabelError):
    """Training was requested on an empty labeled set."""


class DivergenceError(OntolabelError):
    """Training loss became non-finite or blew up."""

    def __init__(self, message, epoch):
        super().__init__(f"epoch {epoch}: {message}")
        self.epoch = epoch


class NoSupervisionError(OntolabelError):
    """No text description matched any lexicon term, so there is nothing
    to bootstrap from."""
