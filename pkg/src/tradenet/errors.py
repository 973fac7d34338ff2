class TradenetError(Exception):
    """Base class for all model/domain errors."""


class DataLoadError(TradenetError):
    """Raised when an input file cannot be parsed into a valid dataset."""
