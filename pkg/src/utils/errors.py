"""
Exception hierarchy shared by all heritage-sense services.

Errors under InputValidationError are caused by bad inputs (configs, files,
arguments) and map to CLI exit status 1. Everything else is a runtime
failure and maps to exit status 2.
"""

from typing import Optional


class HeritageSenseError(Exception):
    """Base class for every error raised by heritage-sense"""


class InputValidationError(HeritageSenseError):
    """An input (config, file, argument) does not satisfy its contract"""


class ConfigError(InputValidationError):
    pass


# sensor-sim

class OutOfRangeVoltage(InputValidationError, ValueError):
    pass


class OutOfRangeLpo(InputValidationError, ValueError):
    pass


class MissingTraceData(HeritageSenseError):
    """A trace-replay scenario has no row covering the requested time"""


# cloud-hub

class ParseRejected(HeritageSenseError):
    """The hub could not parse a telemetry payload"""


# telemetry-store

class StorageError(HeritageSenseError):
    """A store operation failed; a simulation run aborts on it"""


class DuplicateSample(StorageError):
    pass


class ForeignKeyViolation(StorageError):
    pass


class UnknownDevice(StorageError):
    pass


# pipeline

class ConservationViolation(HeritageSenseError):
    """Ledger counts broke a conservation law during a run"""


# microclimate-analysis

class MisalignedWindow(InputValidationError):
    pass


class UndefinedRate(InputValidationError):
    pass


class OvercountDetected(InputValidationError):
    """More samples than expected, which signals duplicate delivery"""


class EmptySeries(InputValidationError):
    pass


class AlignmentError(InputValidationError):
    pass


class MixedCollectors(InputValidationError):
    """Records of several collectors share timestamps; one collector has to be chosen"""


class InsufficientContext(InputValidationError):
    """
    The series does not cover the ±half-window margin around the analysis period.

    missing_before_ms / missing_after_ms hold how much context is lacking on each side.
    """

    def __init__(self, message: str, missing_before_ms: int = 0, missing_after_ms: int = 0):
        super().__init__(message)
        self.missing_before_ms = missing_before_ms
        self.missing_after_ms = missing_after_ms


# csv-interop

class SchemaMismatch(InputValidationError):
    pass


class PartitionInconsistent(InputValidationError):
    pass


class FieldTypeError(InputValidationError, TypeError):
    """A numeric CSV field is not an integer"""

    def __init__(self, message: str, column: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.column = column
        self.line = line
