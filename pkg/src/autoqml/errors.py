"""Exception hierarchy shared by all autoqml modules."""


class AutoQMLError(Exception):
    """Base class for every error raised by autoqml."""


# quantum core
class UnknownFamily(AutoQMLError, ValueError):
    pass


class QubitCountOutOfRange(AutoQMLError, ValueError):
    pass


class ParamLengthMismatch(AutoQMLError, ValueError):
    pass


class NonPositiveStd(AutoQMLError, ValueError):
    pass


class DegenerateRange(AutoQMLError, ValueError):
    pass


class SingleQubit(AutoQMLError, ValueError):
    pass


# training
class NonFiniteInput(AutoQMLError, ValueError):
    pass


class LengthMismatch(AutoQMLError, ValueError):
    pass


class BinMismatch(AutoQMLError, ValueError):
    pass


# metrics
class NotNormalized(AutoQMLError, ValueError):
    pass


class EmptySample(AutoQMLError, ValueError):
    pass


class MixedSpecs(AutoQMLError, ValueError):
    pass


class EmptyInput(AutoQMLError, ValueError):
    pass


# data
class EmptyFile(AutoQMLError, ValueError):
    pass


class MalformedRow(AutoQMLError, ValueError):
    def __init__(self, line: int, text: str = ""):
        self.line = line
        super().__init__(f"malformed row at line {line}: {text!r}")


class NonFiniteValue(AutoQMLError, ValueError):
    def __init__(self, line: int, text: str = ""):
        self.line = line
        super().__init__(f"non-finite value at line {line}: {text!r}")


class DegenerateData(AutoQMLError, ValueError):
    pass


# configuration
class ConfigError(AutoQMLError):
    pass


class ConfigSyntaxError(ConfigError):
    def __init__(self, msg: str, position: int, lineno: int, colno: int):
        self.msg = msg
        self.position = position
        self.lineno = lineno
        self.colno = colno
        super().__init__(f"{msg} at line {lineno} column {colno} (char {position})")


class MissingField(ConfigError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing required field {name!r}")


class InvalidValue(ConfigError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"invalid value for {field!r}: {reason}")


# orchestration
class PipelineError(AutoQMLError):
    pass


class KeyExistsError(PipelineError):
    """Raised when a write-once store key is written a second time."""


class TriggerTimeout(PipelineError, TimeoutError):
    pass


class NoSuccessfulRuns(PipelineError):
    pass


class UnknownVisualization(PipelineError, ValueError):
    pass
