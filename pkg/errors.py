"""
Exceptions for the crowd monitor toolkit
Library code raises these; only the command line turns them into exit codes.
"""

from dataclasses import dataclass
from typing import List, Optional


class CrowdMonitorError(Exception):
    """Base class for every toolkit error"""


class InvalidFocalSetError(CrowdMonitorError, ValueError):
    """Focal set is not allowed for the requested construction"""


class RangeError(CrowdMonitorError, ValueError):
    """Numeric parameter outside its admissible interval"""


class FrameMismatchError(CrowdMonitorError, ValueError):
    """Mass functions defined on different frames were mixed"""


class ArityError(CrowdMonitorError, ValueError):
    """An operation received an empty collection"""


class CapacityError(CrowdMonitorError, ValueError):
    """A frame would exceed the supported number of elements"""


class UndefinedTransformError(CrowdMonitorError, ValueError):
    """Transform is undefined for the given mass function (all mass on the empty set)"""


class InvalidMassError(CrowdMonitorError, ValueError):
    """Masses do not form a valid mass function"""


class MissingReferenceError(CrowdMonitorError):
    """A required reference (reference time, decision, ...) is absent"""

    def __init__(self, message: str, reference: Optional[str] = None):
        super().__init__(message)
        self.reference = reference


class EmptyGroupError(CrowdMonitorError):
    """A contributor-group filter selected nobody"""

    def __init__(self, group: str):
        super().__init__(f"Group '{group}' contains no contributor")
        self.group = group


@dataclass(frozen=True)
class RowError:
    """One problem found in one input row (row 1 is the header)"""

    row: int
    message: str

    def __str__(self) -> str:
        return f"row {self.row}: {self.message}"


class ValidationError(CrowdMonitorError, ValueError):
    """
    Input data or configuration failed validation

    Carries every row-level problem found, so a whole file can be
    reported at once.
    """

    def __init__(
        self,
        message: str,
        row_errors: Optional[List[RowError]] = None,
        field: Optional[str] = None,
        path: Optional[str] = None,
    ):
        self.row_errors = list(row_errors or [])
        self.field = field
        self.path = path
        details = "; ".join(str(e) for e in self.row_errors[:20])
        if len(self.row_errors) > 20:
            details += f"; ... and {len(self.row_errors) - 20} more"
        full = message if not details else f"{message}: {details}"
        super().__init__(full)


class ConfigParseError(ValidationError):
    """Configuration file is not well-formed"""

    def __init__(self, message: str, line: int, path: Optional[str] = None):
        self.line = line
        super().__init__(f"{path or '<config>'}:{line}: {message}", path=path)
