"""Exception hierarchy shared by every einlab module."""


class EinlabError(Exception):
    """Base class for all library errors."""


class DomainError(EinlabError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class EvaluationError(EinlabError, ArithmeticError):
    """A metric function or derivative evaluated to a non-finite number."""


class StepError(EinlabError, ValueError):
    pass


class NoHorizon(EinlabError):
    """V(r) stays positive on (0, inf): the family has no horizon."""


class BelowExtremal(EinlabError):
    """k = -1 and the mass lies below the extremal value m_-(n)."""


class QuadratureError(EinlabError, ArithmeticError):
    pass


class IllConditioned(EinlabError, ArithmeticError):
    """A least-squares design matrix exceeds the configured condition bound."""


class DegenerateFit(EinlabError, ArithmeticError):
    """The fitted quantity vanishes identically (e.g. exact hyperbolic space)."""


class FitError(EinlabError, ArithmeticError):
    pass


class ConfigError(EinlabError, ValueError):
    pass
