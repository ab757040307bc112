"""Pipeline exceptions and the exit codes the CLI maps them to."""


class PipelineError(Exception):
    """Base class for every failure the CLI reports to the user."""

    exit_code = 1

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage = stage


class InputError(PipelineError):
    """Malformed input, bad configuration, or a violated precondition."""

    exit_code = 1


class MissingArtifactError(InputError):
    """A stage was run before the stage that produces its input."""

    def __init__(self, path: str, required_stage: str, stage: str | None = None):
        super().__init__(
            f"missing artifact {path}; run the '{required_stage}' stage first",
            stage=stage,
        )
        self.path = path
        self.required_stage = required_stage


class NumericalError(PipelineError):
    exit_code = 2


class FactorizationDivergedError(NumericalError):
    pass


class MetricError(NumericalError):
    """A metric is undefined for the given inputs (e.g. no seed evidence)."""


class InstanceTooLargeError(PipelineError):
    """An exact solver was asked to enumerate more than it is allowed to."""

    exit_code = 3
