"""Exception hierarchy shared by every module."""


class JCSearchError(Exception):
    """Base class for all errors raised by :mod:`jcsearch`."""


class InvalidConfiguration(JCSearchError, ValueError):
    pass


class InvalidIndex(JCSearchError, IndexError):
    pass


class InvalidState(JCSearchError, ValueError):
    pass


class NormViolation(JCSearchError, ArithmeticError):
    """Integrated state drifted further from unit norm than the budget allows."""

    def __init__(self, time, drift, budget):
        self.time = float(time)
        self.drift = float(drift)
        self.budget = float(budget)
        super().__init__(
            f"norm drift {drift:.3e} exceeds budget {budget:.1e} at t = {time:.6g}"
        )


class OracleTooLarge(JCSearchError, ValueError):
    pass


class NumericalFailure(JCSearchError, ArithmeticError):
    pass


class NoPeak(JCSearchError):
    """No sample of the probability series rises above the peak threshold."""


class ScalingFailure(JCSearchError):
    def __init__(self, failed, points=()):
        self.failed = list(failed)
        self.points = list(points)
        super().__init__(f"no resonant peak for N in {self.failed}")
