"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration or architecture.

    ``field`` carries the dotted path of the offending config entry when known.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class UsageError(ValueError):
    """An API was called with arguments that violate its preconditions."""


class TrainingDivergenceError(RuntimeError):
    """Raised when a training step produces a non-finite loss or gradient."""

    def __init__(self, message: str, agent_id: int | None = None, episode: int | None = None):
        self.agent_id = agent_id
        self.episode = episode
        where = []
        if agent_id is not None:
            where.append(f"agent {agent_id}")
        if episode is not None:
            where.append(f"episode {episode}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
