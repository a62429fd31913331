class DuneEdgesError(Exception):
    """
    Base for every error this package raises on purpose.
    ``exit_code`` is what the command line returns for it.
    """

    exit_code = 4


class ConfigError(DuneEdgesError, ValueError):
    exit_code = 2


class ImageIOError(DuneEdgesError, OSError):
    exit_code = 3


class NumericError(DuneEdgesError, ValueError):
    exit_code = 4


class StageError(DuneEdgesError):
    """
    A pipeline stage failed. The message is prefixed with the stage
    name and the exit code is taken from the underlying error.
    """

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        if isinstance(cause, DuneEdgesError):
            self.exit_code = cause.exit_code
        super().__init__('%s: %s' % (stage, cause))
