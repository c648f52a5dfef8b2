"""Exception hierarchy shared by the simulation core and the CLI."""
from __future__ import annotations

from typing import Optional


class HerdflowError(Exception):
    """Base class for all Herdflow errors."""


class ConfigError(HerdflowError, ValueError):
    """Invalid run configuration; carries the offending line when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.reason = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


class GridMismatchError(HerdflowError, ValueError):
    """Two fields that must share a grid do not."""


class DomainTooSmallError(HerdflowError, ValueError):
    """The computational domain cannot hold the initial datum with margin."""


class CflViolationError(HerdflowError, ValueError):
    """Time step above the stability limit of the explicit scheme."""


class SimulationAbort(HerdflowError, RuntimeError):
    """A run stopped before t_end (margin violation, nonfinite state)."""

    def __init__(self, message: str, time: float, state: Optional[dict] = None):
        self.time = time
        self.state = state or {}
        super().__init__(f"t={time:.6g}: {message}")


class OutputError(HerdflowError):
    """Writing or reading a result file failed."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"{path}: {reason}")
