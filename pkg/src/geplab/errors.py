"""Model-level errors carrying machine-readable reason codes."""

from __future__ import annotations


class ModelError(ValueError):
    reason = "error"


class GaplessError(ModelError):
    reason = "gapless"


class NoEdgePairError(ModelError):
    reason = "no-edge-pair"


class EdgeSelectionError(ModelError):
    reason = "ambiguous-edge-pair"

    def __init__(self, message: str, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class ExceptionalLineError(ModelError):
    reason = "exceptional-line"


class UnderflowGuardError(ModelError):
    reason = "underflow"


class NoRootError(ModelError):
    reason = "no-root"


class MonotonicityError(ModelError):
    reason = "non-monotone"

    def __init__(self, message: str, samples=()):
        super().__init__(message)
        self.samples = tuple(samples)


def reason_code(exc: BaseException) -> str:
    code = getattr(exc, "reason", None)
    if code:
        return code
    name = type(exc).__name__
    return {
        "ScalarHamiltonianError": "scalar-hamiltonian",
        "AtGEPError": "at-gep",
        "ConvergenceError": "no-convergence",
    }.get(name, "error")
