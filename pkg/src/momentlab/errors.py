"""Exception hierarchy shared by every momentlab module."""


class MomentlabError(Exception):
    pass


class DepthExhausted(MomentlabError):
    """No admissible group element was found below the complexity cap."""


class PrecisionExhausted(MomentlabError):
    """An enclosure could not separate a quantity from zero within the cap."""


class MixedDescriptors(MomentlabError):
    pass


class TooShort(MomentlabError, ValueError):
    pass


class OutOfRange(MomentlabError, IndexError):
    pass


class NotInterior(MomentlabError, ValueError):
    pass


class NotAMomentVector(MomentlabError, ValueError):
    pass


class DepthCapExceeded(MomentlabError):
    """Cylinder refinement went past the configured depth cap."""


class RecurrenceError(MomentlabError, AssertionError):
    """A Pascal table failed g(n+1,k) + g(n+1,k+1) == g(n,k)."""


class SpecError(MomentlabError, ValueError):
    """A measure, group or sequence string could not be parsed."""
