"""Exception hierarchy for the gridstylo package.

Errors split into two broad families so the CLI can map them to exit
codes: ``ConfigError`` for bad run configuration, ``DataError`` for
problems with input files or datasets. Numeric-core errors subclass the
base directly.
"""


class GridStyloError(Exception):
    """Base class for all package errors."""


class ConfigError(GridStyloError):
    """Invalid run configuration (CLI exit code 2)."""


class DataError(GridStyloError):
    """Invalid or unusable input data (CLI exit code 3)."""


# corpus
class EmptyDocument(DataError):
    pass


class EmptyGroup(DataError):
    pass


class MissingFile(DataError):
    pass


class SchemaViolation(DataError):
    pass


class DuplicateId(DataError):
    pass


# grid
class MissingRelations(DataError):
    pass


# featurize
class InsufficientContext(DataError):
    pass


class MissingEduSequence(DataError):
    pass


# tensor
class IndexOutOfRange(GridStyloError):
    pass


class SequenceTooShort(GridStyloError):
    pass


class EmptyMap(GridStyloError):
    pass


class ShapeMismatch(GridStyloError):
    pass


# models / svm
class DimensionMismatch(GridStyloError):
    pass


class DegenerateDataset(DataError):
    pass


class NonFiniteLoss(GridStyloError):
    pass


class CorruptCheckpoint(DataError):
    pass


# harness
class TooFewDocuments(DataError):
    pass


class EmptyMatrix(GridStyloError):
    pass


class UnknownToken(ConfigError):
    pass


# synth
class InvalidDistribution(ConfigError):
    pass
