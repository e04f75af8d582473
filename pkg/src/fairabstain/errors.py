class FairAbstainError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(FairAbstainError):
    pass


class ParseError(FairAbstainError):
    def __init__(self, row, message):
        self.row = row
        super().__init__(f"row {row}: {message}")


class EmptyInputError(FairAbstainError):
    pass


class DomainError(FairAbstainError, ValueError):
    pass


class TrainingDivergenceError(FairAbstainError):
    def __init__(self, epoch, loss):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}")


class OracleRefusal(FairAbstainError):
    """Raised when an exhaustive search is asked to handle too many samples."""


class SolverError(FairAbstainError):
    pass
