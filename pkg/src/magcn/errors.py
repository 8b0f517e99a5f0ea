"""Exception types shared across the package."""


class MagcnError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(MagcnError, ValueError):
    """Operand shapes are incompatible for the requested operation."""


class AlignmentError(MagcnError, ValueError):
    """Modality sequences that must share a length do not."""


class ConfigError(MagcnError, ValueError):
    """A configuration value violates a structural constraint."""


class ContractError(MagcnError, RuntimeError):
    """An operation precondition was violated."""


class NumericError(MagcnError, ArithmeticError):
    """Non-finite values where finite ones are required."""


class DatasetFormatError(MagcnError, ValueError):
    """A dataset file record could not be parsed or validated."""


class TrainingDivergedError(MagcnError, RuntimeError):
    """The training loss became non-finite."""
