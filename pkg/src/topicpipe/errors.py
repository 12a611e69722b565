"""Exception types shared across the pipeline."""


class TopicPipeError(Exception):
    """Base class for all topicpipe errors."""


class EmptyVocabulary(TopicPipeError):
    """No term survived vocabulary construction."""


class FormatError(TopicPipeError):
    """A serialized artifact does not match its declared format."""


class ConvergenceError(TopicPipeError):
    """An eigensolver failed to meet its residual bound."""


class RankError(TopicPipeError):
    """Fewer usable components than requested."""


class EmptyClass(TopicPipeError):
    """A cluster has no term mass to build a topic from."""


class DegenerateTopic(TopicPipeError):
    """A topic has too few scorable terms for a coherence metric."""


class ConfigError(TopicPipeError):
    """A pipeline configuration is invalid or references missing inputs."""


class StageError(TopicPipeError):
    """Failure inside a pipeline stage, tagged with the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
