"""Exception hierarchy shared by all werboot modules."""


class WerbootError(Exception):
    """Base class for every error raised by werboot."""


class DataError(WerbootError, ValueError):
    """Invalid or inconsistent evaluation input."""


class ParseError(DataError):
    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        self.message = message
        where = ""
        if path is not None:
            where = f"{path}:{lineno}: " if lineno is not None else f"{path}: "
        super().__init__(f"{where}{message}")


class DuplicateUttId(DataError):
    pass


class MissingUtterance(DataError):
    pass


class EmptyBlock(DataError):
    pass


class EmptyDataset(DataError):
    pass


class EmptyReference(DataError):
    """An utterance has a zero-length reference."""


class ConfigError(WerbootError, ValueError):
    """Invalid configuration (bootstrap, synthetic generator, study, block rule)."""


class StatisticError(WerbootError, ArithmeticError):
    """A statistical precondition does not hold for the given data."""


class ZeroReferenceLength(StatisticError):
    pass


class ZeroBaselineWer(StatisticError):
    pass


class EmptySamples(StatisticError):
    pass


class InsufficientSamples(StatisticError):
    pass


class InsufficientBlocks(StatisticError):
    pass
