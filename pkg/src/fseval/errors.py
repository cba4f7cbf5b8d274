"""Typed error hierarchy. Exit-code mapping lives in the CLI: data errors
exit 2, config errors exit 3, numeric errors exit 4."""


class EngineError(Exception):
    pass


class DataError(EngineError):
    pass


class ConfigError(EngineError):
    pass


class NumericError(EngineError):
    pass


# --- data / file format ---

class BadMagic(DataError):
    pass


class VersionMismatch(DataError):
    pass


class TruncatedFile(DataError):
    pass


class LabelOutOfRange(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class ParseError(DataError):
    pass


class RaggedRow(DataError):
    pass


class IoFailure(DataError):
    pass


class EmptyClass(DataError):
    pass


class AllZeroAttention(DataError):
    pass


class UnnormalizedDistribution(DataError):
    pass


# --- configuration / shape ---

class NotEnoughClasses(ConfigError):
    pass


class NotEnoughSamplesInClass(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class BatchTooSmall(ConfigError):
    pass


class LengthMismatch(ConfigError):
    pass


class InvalidConfig(ConfigError):
    pass


# --- numerics ---

class NonFiniteCost(NumericError):
    pass


class ZeroRow(NumericError):
    pass
