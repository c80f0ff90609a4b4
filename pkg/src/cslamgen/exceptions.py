"""
Custom exceptions for cslamgen.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

PathLike = Union[str, Path]


class CSLAMGenError(Exception):
    """Base exception for cslamgen."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        return self.message


class ConfigurationError(CSLAMGenError):
    """Raised when a generation config cannot be read or is out of range."""

    def __init__(
        self,
        message: str,
        config_key: Optional[str] = None,
        violations: Optional[List[str]] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, details=details)
        self.config_key = config_key
        self.violations = list(violations or [])

    def __str__(self) -> str:
        base_msg = super().__str__()
        if self.config_key:
            base_msg = f"{base_msg} (Config: {self.config_key})"
        if self.violations:
            base_msg = f"{base_msg}: " + "; ".join(self.violations)
        return base_msg


class DatasetIOError(CSLAMGenError):
    """Raised when a dataset file or directory cannot be written or read."""

    def __init__(
        self,
        message: str,
        path: Optional[PathLike] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, details=details)
        self.path = Path(path) if path is not None else None

    def __str__(self) -> str:
        base_msg = super().__str__()
        if self.path is not None:
            return f"{base_msg} (Path: {self.path})"
        return base_msg


class MissingFileError(DatasetIOError):
    """Raised when a file required by the multi-g2o layout is absent."""

    def __init__(self, path: PathLike, details: Optional[Dict[str, Any]] = None):
        super().__init__(f"Missing required file '{Path(path).name}'", path=path, details=details)


class ParseError(CSLAMGenError):
    """Raised when a dataset file does not follow its line grammar."""

    def __init__(
        self,
        message: str,
        path: Optional[PathLike] = None,
        line_number: Optional[int] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, details=details)
        self.path = Path(path) if path is not None else None
        self.line_number = line_number

    def __str__(self) -> str:
        base_msg = super().__str__()
        if self.path is not None and self.line_number is not None:
            return f"{self.path}:{self.line_number}: {base_msg}"
        if self.path is not None:
            return f"{self.path}: {base_msg}"
        return base_msg


class TokenCountError(ParseError):
    """Raised when a line has the wrong number of tokens for its record type."""

    def __init__(
        self,
        record: str,
        expected: int,
        found: int,
        path: Optional[PathLike] = None,
        line_number: Optional[int] = None,
    ):
        super().__init__(
            f"{record} line has {found} tokens, expected {expected}",
            path=path,
            line_number=line_number,
            details={"record": record, "expected": expected, "found": found},
        )
        self.expected = expected
        self.found = found


class NonNumericFieldError(ParseError):
    """Raised when a token that must be numeric is not."""

    def __init__(
        self,
        token: str,
        path: Optional[PathLike] = None,
        line_number: Optional[int] = None,
    ):
        super().__init__(
            f"non-numeric field '{token}'",
            path=path,
            line_number=line_number,
            details={"token": token},
        )
        self.token = token


class LayoutError(ParseError):
    """Raised when a multi-g2o tree is structurally inconsistent."""


class NumericalError(CSLAMGenError):
    """Raised when a covariance or information matrix is not usable."""
