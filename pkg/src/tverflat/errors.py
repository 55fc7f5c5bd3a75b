"""Exception hierarchy."""


class TverflatError(Exception):
    """Base class for all errors raised by this package."""


class RankDeficient(TverflatError):
    """Input vectors do not span a subspace of the requested dimension."""


class DimensionMismatch(TverflatError, ValueError):
    pass


class IllConditioned(TverflatError):
    """A float computation is numerically ambiguous; perturb and retry."""


class InvalidInstance(TverflatError, ValueError):
    pass


class DegenerateSpec(TverflatError, ValueError):
    pass


class BudgetExceeded(TverflatError):
    pass


class MalformedCertificate(TverflatError):
    """Certificate fails structural checks.

    ``problems`` maps a field path (e.g. ``"weights[1][0]"``) to a message.
    """

    def __init__(self, problems):
        self.problems = dict(problems)
        lines = [f"{k}: {v}" for k, v in self.problems.items()]
        super().__init__("malformed certificate: " + "; ".join(lines))
