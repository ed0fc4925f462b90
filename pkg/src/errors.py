# src/errors.py

"""
Exception hierarchy for idsim.
Library code raises these; main.py turns them into process exit codes.
"""

from typing import List, Optional


class IdSimError(Exception):
    """Base class for every error idsim reports to the user."""
    exit_code: int = 2


# --- Usage errors (exit 1) ---

class UsageError(IdSimError):
    """Bad invocation: wrong arguments or a missing input directory."""
    exit_code = 1


class RootPathMissingError(UsageError):
    def __init__(self, root_path: str):
        super().__init__(f"Root path '{root_path}' does not exist or is not a directory.")
        self.root_path = root_path


class UnsupportedConfidenceError(UsageError):
    def __init__(self, confidence: float, supported: List[float]):
        levels = ", ".join(f"{level:.2f}" for level in supported)
        super().__init__(f"Unsupported confidence level {confidence}; use one of {levels}.")
        self.confidence = confidence


# --- Input/data errors (exit 2) ---

class DataError(IdSimError):
    """Input data is malformed or inconsistent."""
    exit_code = 2


class ConfigError(DataError):
    pass


class DictionaryError(DataError):
    pass


class RegistryError(DataError):
    pass


class RegistryCycleError(RegistryError):
    def __init__(self, cycle: List[str]):
        super().__init__(f"Type registry contains a supertype cycle: {' -> '.join(cycle)}")
        self.cycle = cycle


class SourceParseError(DataError):
    """A single source file could not be parsed. Scans count these, they never abort."""

    def __init__(self, file_path: str, reason: str):
        super().__init__(f"{file_path}: {reason}")
        self.file_path = file_path
        self.reason = reason


class ParseFailureThresholdError(DataError):
    def __init__(self, files_failed: int, files_total: int, threshold: float):
        super().__init__(
            f"{files_failed} of {files_total} files failed to parse, above the "
            f"{threshold:.0%} threshold. Is the root pointing at a Java source tree?"
        )
        self.files_failed = files_failed
        self.files_total = files_total


class _LineError(DataError):
    kind: str = "file"

    def __init__(self, path: str, line_number: int, reason: str):
        super().__init__(f"Malformed {self.kind} '{path}' at line {line_number}: {reason}")
        self.path = path
        self.line_number = line_number


class MalformedInventoryError(_LineError):
    kind = "inventory"


class MalformedLabelsError(_LineError):
    kind = "labels file"


class DanglingReferenceError(DataError):
    def __init__(self, record_id: str, label_category: Optional[str] = None):
        detail = f" (label '{label_category}')" if label_category else ""
        super().__init__(f"Label references unknown identifier record '{record_id}'{detail}.")
        self.record_id = record_id


# --- I/O errors (exit 3) ---

class OutputError(IdSimError):
    """Reading or writing a file failed at the operating-system level."""
    exit_code = 3

    def __init__(self, path: str, cause: OSError):
        super().__init__(f"I/O error on '{path}': {cause.strerror or cause}")
        self.path = path
        self.cause = cause
