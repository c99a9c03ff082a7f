"""Exception types raised by the social learning laboratory."""


class SocialLearningError(Exception):
    """Base class for every error raised by this package."""


class InvalidBelief(SocialLearningError):
    """A probability vector could not be turned into a belief."""


class DimensionMismatch(SocialLearningError):
    """Two objects disagree on a state, action or observation cardinality."""


class ZeroLikelihood(SocialLearningError):
    """An observation has probability zero under the current prior."""

    def __init__(self, observation: int):
        self.observation = observation
        super().__init__(f"Observation {observation} has zero probability under the prior")


class ImpossibleAction(SocialLearningError):
    """An observed action has probability zero under the public belief."""

    def __init__(self, action: int):
        self.action = action
        super().__init__(f"Action {action} has zero probability under the public belief")


class NonConvergence(SocialLearningError):
    """An iterative solver did not reach its tolerance."""


class EmptyData(SocialLearningError):
    """A training routine was handed no data."""


class ConfigError(SocialLearningError):
    """An experiment configuration is invalid or references missing files."""


class SensorError(SocialLearningError):
    """The language-model sensor produced no usable observation."""


class NoJsonFound(SensorError):
    """The response holds no balanced JSON object."""


class MissingField(SensorError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Sensor response is missing field '{name}'")


class NonBooleanValue(SensorError):
    def __init__(self, name: str, value: object = None):
        self.name = name
        self.value = value
        super().__init__(f"Sensor field '{name}' is not a boolean: {value!r}")


class TransportError(SensorError):
    """The endpoint could not be reached or returned an error status."""


class RateLimited(SensorError):
    """The endpoint kept answering with a rate-limit status."""


class ParseFailedAfterRetries(SensorError):
    def __init__(self, attempts: int, last_error: Exception):
        self.attempts = attempts
        self.last_error = last_error
        super().__init__(f"No parsable sensor response after {attempts} attempts: {last_error}")


class CacheMiss(SensorError):
    """Cached sensor mode was asked about a comment it has never seen."""


class DatasetError(SocialLearningError):
    """A comment dataset could not be read."""


class MalformedRow(DatasetError):
    def __init__(self, line: int, reason: str):
        self.line = line
        super().__init__(f"Malformed row at line {line}: {reason}")


class MissingColumn(DatasetError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Dataset is missing column '{name}'")


class InsufficientData(DatasetError):
    def __init__(self, user_class: int, have: int, need: int):
        self.user_class = user_class
        self.have = have
        self.need = need
        super().__init__(f"User class {user_class} has {have} comments, {need} needed")
