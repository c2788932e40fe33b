from typing import Iterable, Optional


class CompMdpError(Exception):
    """Base error; `detail` is what the CLI prints, `exit_code` what it returns."""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# Size guards
class SizeExceeded(CompMdpError):
    pass


class BudgetExceeded(CompMdpError):
    pass


# Structural errors
class DanglingState(CompMdpError):
    pass


class Mismatch(CompMdpError):
    pass


class NotASubprocess(CompMdpError):
    pass


class NotIndependent(CompMdpError):
    pass


class NonCommuting(CompMdpError):
    pass


class RewardClash(CompMdpError):
    pass


class PreconditionFailed(CompMdpError):
    pass


# Symmetry
class NotAutomorphism(CompMdpError):
    pass


class InconsistentOrbit(CompMdpError):
    pass


class NotInvariant(CompMdpError):
    pass


# Zig-zag diagrams
class IndexOutOfRange(CompMdpError):
    pass


class EmptiedBridge(CompMdpError):
    pass


# Solver
class SolverDiverged(CompMdpError):
    pass


class MaxIterExceeded(CompMdpError):
    pass


# Worlds
class OutOfBounds(CompMdpError):
    pass


class RegionOnObstacle(CompMdpError):
    pass


class DuplicateRegion(CompMdpError):
    pass


class EmptyOverlap(CompMdpError):
    pass


# Documents and expressions
class DocumentSyntaxError(CompMdpError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class SemanticError(CompMdpError):
    def __init__(self, detail: str, issues: Optional[Iterable[str]] = None):
        self.issues = list(issues or [])
        if self.issues:
            detail = detail + ": " + "; ".join(self.issues)
        super().__init__(detail)


class UnboundName(CompMdpError):
    pass
