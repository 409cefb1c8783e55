"""Exception hierarchy.

Configuration problems derive from :class:`ConfigError` (a ``ValueError``),
file problems from :class:`DatasetIOError` (an ``OSError``). The CLI maps the
two families to distinct exit codes.
"""


class ManipSimError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(ManipSimError, ValueError):
    """Invalid tables, ranges or run settings."""


class DimensionError(ConfigError):
    pass


class InvalidLinkType(ConfigError):
    pass


class NonFiniteValue(ConfigError):
    pass


class InvalidRange(ConfigError):
    pass


class MissingInputs(ConfigError):
    pass


class MissingJointValue(ConfigError):
    pass


class InconsistentPlan(ManipSimError):
    """Sensor samples do not line up with the compiled chain."""


class DatasetIOError(ManipSimError, OSError):
    pass


class DatasetFormatError(DatasetIOError):
    """File exists but its content cannot be parsed."""


class FormatVersionMismatch(DatasetFormatError):
    pass
