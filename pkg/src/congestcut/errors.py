class CongestCutError(Exception):
    """Base class for every error raised by this package."""


class InvalidGraph(CongestCutError, ValueError):
    pass


class InvalidCut(CongestCutError, ValueError):
    pass


class InvalidProbability(CongestCutError, ValueError):
    pass


class InvalidParameter(CongestCutError, ValueError):
    pass


class InvalidParams(InvalidParameter):
    """Generator parameters that violate a construction's preconditions."""


class InvalidPromise(InvalidParameter):
    """Set-disjointness inputs that intersect in more than one element."""


class SizeLimit(CongestCutError, ValueError):
    pass


class UnknownPrimitive(CongestCutError, KeyError):
    pass


class NoCutFound(CongestCutError, RuntimeError):
    pass


class RoundCapExceeded(CongestCutError, RuntimeError):
    pass


class BudgetViolation(CongestCutError, RuntimeError):
    def __init__(self, edge, round, bits, allowed):
        self.edge = edge
        self.round = round
        self.bits = bits
        self.allowed = allowed
        super().__init__(
            f"edge {edge}: {bits} bits sent in round {round}, budget is {allowed}"
        )
