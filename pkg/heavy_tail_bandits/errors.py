"""Exceptions raised by heavy-tail-bandits."""

from typing import Any, Dict, Optional


class BanditError(Exception):
    """Base error. `code` is the machine-readable name shown by the CLI."""

    code = "bandit_error"

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.code, "message": str(self)}


class PreconditionError(BanditError, ValueError):
    """An operation was called with inputs outside its domain."""

    code = "precondition_violated"


class UnsupportedOperationError(BanditError):
    """The operation is not defined for the given object."""

    code = "unsupported_operation"


class ConfigError(BanditError):
    """A run config failed validation. `key` is the dotted path of the offending entry."""

    code = "config_invalid"

    def __init__(self, key: Optional[str], message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["key"] = self.key
        return data


class OutputError(BanditError):
    """A result file could not be written."""

    code = "output_unwritable"


class ReportError(BanditError):
    """A report did not match the report schema. `key` is the path of the offending entry."""

    code = "report_invalid"

    def __init__(self, key: Optional[str], message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["key"] = self.key
        return data
