"""Exception hierarchy and the CLI exit-code policy."""
from pathlib import Path

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PIPELINE = 2
EXIT_STATISTICS = 3


class LapaError(Exception):
    exit_code = EXIT_USAGE


class ConfigError(LapaError, ValueError):
    pass


class CatalogError(LapaError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.line = line
        self.column = column


class OpNoteParseError(LapaError, ValueError):
    def __init__(self, path: Path | str, line: int, message: str) -> None:
        super().__init__(f"{path}:{line}: {message}")
        self.path = Path(path)
        self.line = line


class PsychometricsError(LapaError, ValueError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None) -> None:
        parts = [p for p in (f"row {row}" if row is not None else "", f"column {column!r}" if column else "") if p]
        location = f" ({', '.join(parts)})" if parts else ""
        super().__init__(f"{message}{location}")
        self.row = row
        self.column = column


class JoinError(LapaError, ValueError):
    def __init__(self, notes_only: list[str], psychometrics_only: list[str]) -> None:
        super().__init__(
            "Unmatched participant ids: "
            f"notes without psychometrics={sorted(notes_only)} | "
            f"psychometrics without notes={sorted(psychometrics_only)}"
        )
        self.notes_only = sorted(notes_only)
        self.psychometrics_only = sorted(psychometrics_only)


class MetricsFileError(LapaError, ValueError):
    def __init__(self, path: Path | str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = Path(path)


class BackendError(LapaError):
    """Transport failure talking to a model backend, after retries."""


class CacheMissError(BackendError):
    def __init__(self, key: str) -> None:
        super().__init__(f"No cached response for request {key}")
        self.key = key


class SchemaValidationError(LapaError):
    """Model output failed schema validation after the repair round-trip."""


class PipelineError(LapaError):
    exit_code = EXIT_PIPELINE


class StatisticsError(LapaError, ValueError):
    exit_code = EXIT_STATISTICS


class DegenerateInputError(StatisticsError):
    pass


class InsufficientDataError(StatisticsError):
    pass


class SingularDesignError(StatisticsError):
    def __init__(self, column: str) -> None:
        super().__init__(f"Design matrix is rank deficient at column {column!r}")
        self.column = column


def exit_code_for(error: LapaError) -> int:
    return error.exit_code
