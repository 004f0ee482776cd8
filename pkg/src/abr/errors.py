"""Exception hierarchy shared by all engine modules."""


class EngineError(Exception):
    """Base class for every error raised by the engine."""


class UnknownTable(EngineError):
    pass


class UnknownColumn(EngineError):
    pass


class DuplicateTable(EngineError):
    pass


class DatabaseSealed(EngineError):
    """Mutation attempted on a sealed database."""


class DatabaseNotSealed(EngineError):
    """Read attempted before the database was sealed."""


class OpenBuilder(EngineError):
    """seal() called while a table builder is still unfinished."""


class TypeMismatch(EngineError):
    pass


class RowOutOfRange(EngineError):
    pass


class EmptyProjection(EngineError):
    """Query defines no output columns."""


class UnsupportedShape(EngineError):
    """Query does not fit any of the four supported plan classes."""


class EmptyAggregate(EngineError):
    """AVG requested over zero qualifying rows."""


class MalformedDate(EngineError):
    pass


class MalformedPlan(EngineError):
    """Plan descriptor JSON does not match the expected shape."""


class FieldCountMismatch(EngineError):
    def __init__(self, line_no: int, expected: int, got: int):
        super().__init__(
            f"line {line_no}: expected {expected} fields, got {got}"
        )
        self.line_no = line_no


class ConversionError(EngineError):
    def __init__(self, line_no: int, column: str, detail: str):
        super().__init__(f"line {line_no}, column {column}: {detail}")
        self.line_no = line_no
        self.column = column


class UnknownQuery(EngineError):
    pass
