from __future__ import annotations


class CdTradeoffError(ValueError):
    """Base class for every input or domain problem raised by the library."""


class DomainError(CdTradeoffError):
    pass


class NormalizationError(CdTradeoffError):
    pass


class ShapeMismatchError(CdTradeoffError):
    pass


class UnknownVariableError(CdTradeoffError):
    pass


class ZeroProbabilityError(CdTradeoffError):
    pass


class UnreachablePairError(ZeroProbabilityError):
    def __init__(self, k: int, x: int, z: int) -> None:
        super().__init__(f"pair (x={x}, z={z}) has zero probability; posterior for receiver {k} undefined")
        self.k = k
        self.x = x
        self.z = z


class SchemaError(CdTradeoffError):
    pass


class SearchSpaceError(CdTradeoffError):
    pass


class RegimeError(DomainError):
    pass
