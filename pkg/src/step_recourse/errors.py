"""Exception types shared across the package."""


class RecourseError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(RecourseError):
    """Schema definition or schema/data mismatch problem."""


class DatasetError(RecourseError):
    """Dataset ingestion or validation problem."""


class ModelError(RecourseError):
    """Model training or serialization problem."""


class ZeroDirectionError(RecourseError):
    """A step was requested along a zero direction (no recourse from this cluster)."""


class ConfigError(RecourseError):
    """Invalid experiment or service configuration."""
