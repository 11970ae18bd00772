"""Exception hierarchy.

The CLI maps these onto exit codes: ``DataError`` -> 2,
``InvariantViolation`` -> 3. Anything else escaping a command is a bug.
"""


class EventIRError(Exception):
    pass


class DataError(EventIRError):
    """Input files or records that cannot be accepted."""


class MalformedRecordError(DataError):
    def __init__(self, path, line_no: int, reason: str):
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{self.path}:{line_no}: {reason}")


class DuplicateIdError(DataError):
    def __init__(self, kind: str, record_id: str):
        self.kind = kind
        self.record_id = record_id
        super().__init__(f"duplicate {kind} id {record_id!r}")


class DanglingReferenceError(DataError):
    def __init__(self, source_id: str, missing_id: str):
        self.source_id = source_id
        self.missing_id = missing_id
        super().__init__(f"{source_id!r} references unknown article {missing_id!r}")


class EmptyRelevantSetError(DataError):
    def __init__(self, query_id: str):
        self.query_id = query_id
        super().__init__(f"query {query_id!r} has an empty relevant image set")


class ConfigError(DataError):
    pass


class UnknownIdError(DataError, KeyError):
    def __init__(self, kind: str, record_id: str):
        self.kind = kind
        self.record_id = record_id
        DataError.__init__(self, f"unknown {kind} id {record_id!r}")

    def __str__(self) -> str:
        return self.args[0]


class EmbeddingFormatError(DataError):
    """Base class for EVEC read failures."""


class BadMagicError(EmbeddingFormatError):
    pass


class VersionMismatchError(EmbeddingFormatError):
    pass


class TruncatedFileError(EmbeddingFormatError):
    pass


class ZeroVectorError(EmbeddingFormatError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"zero-norm vector for id {record_id!r}")


class DimensionMismatchError(EmbeddingFormatError):
    pass


class IndexFormatError(DataError):
    pass


class InvariantViolation(EventIRError):
    """An internal consistency check failed."""
