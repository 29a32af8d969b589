from typing import Any, Optional

from src.utils import bold


class GdbnException(Exception):
    pass


class ValidationException(GdbnException):
    pass


class DataFormatException(GdbnException):
    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        location = ""
        if path is not None:
            location += f" in {bold(path)}"
        if line is not None:
            location += f" on line {bold(line)}"
        self.message = f"Malformed input{location}: {message}"
        super().__init__(self.message)


class DegenerateMatrixException(GdbnException):
    def __init__(self, name: str, detail: Any):
        self.message = f"The matrix {bold(name)} is numerically degenerate ({detail})."
        super().__init__(self.message)


class ScoreDomainException(GdbnException):
    pass


class EnumerationCapException(GdbnException):
    def __init__(self, n: int, cap: int):
        self.message = (
            f"Refusing to enumerate an equivalence class over {bold(n)} static nodes; "
            f"the configured cap is {bold(cap)}."
        )
        super().__init__(self.message)


class ChainFailureException(GdbnException):
    def __init__(self, fold: int, cause: Exception):
        self.fold = fold
        self.message = f"The chain for held-out fold {bold(fold)} failed:\n{cause}"
        super().__init__(self.message)
