"""Exception types raised by the library."""


class ScenarioTooDenseError(ValueError):
    """Expected point count is too large to represent or simulate."""


class NonIntegrableAtpfError(ArithmeticError):
    """The first-moment integral of an ATPF does not converge."""


class TruncationImpossibleError(ValueError):
    """No event-window radius below the hard cap meets the error budget."""


class DegenerateSeriesError(ValueError):
    """A rate series has zero sample variance."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
