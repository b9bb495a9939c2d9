"""Exception hierarchy shared by every module of the package."""


class CFinslerError(Exception):
    """Base class; the CLI maps every subclass to exit status 1."""

    kind = "error"

    def record(self) -> dict:
        return {"kind": self.kind, "type": type(self).__name__, "message": str(self)}


class DomainViolation(CFinslerError):
    kind = "domain"


class JetDomainError(DomainViolation):
    """A non-smooth primitive (sqrt, log, division) was hit at its singular locus."""


class UnsupportedOrder(CFinslerError):
    kind = "order"


class MissingIndex(CFinslerError):
    kind = "index"


class NotPositiveDefinite(CFinslerError):
    kind = "numerical"


class DegenerateSample(CFinslerError):
    kind = "numerical"


class PreconditionViolation(CFinslerError):
    kind = "precondition"


class NonRealFactor(CFinslerError):
    kind = "numerical"


class DSLSyntaxError(CFinslerError):
    kind = "syntax"

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column

    def record(self) -> dict:
        rec = super().record()
        rec.update(line=self.line, column=self.column)
        return rec


class UnknownSymbol(DSLSyntaxError):
    pass


class HomogeneityWarning(UserWarning):
    pass
