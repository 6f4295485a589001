from typing import List


class StochQAOAError(Exception):
    """Base class of all the errors raised by stochqaoa."""


class InvalidInstanceError(StochQAOAError, ValueError):
    """Raised when an instance violates one or more model invariants.

    Args:
        issues: list of "<path>: <message>" strings, one per violation.
    """

    def __init__(self, issues: List[str]):
        self.issues = list(issues)
        super().__init__("invalid instance:\n  " + "\n  ".join(self.issues))


class InstanceParseError(StochQAOAError, ValueError):
    """Raised when an instance or experiment file cannot be parsed."""


class ScenarioExplosionError(StochQAOAError):
    """Raised when the joint scenario set exceeds the configured cap."""


class SearchSpaceError(StochQAOAError):
    """Raised when the first-stage search box exceeds the configured cap."""


class EncodingError(StochQAOAError):
    """Raised when a QUBO cannot be split into scenario-free couplings."""


class SimulatorError(StochQAOAError, ValueError):
    """Raised for invalid statevector operations (cap, indices, register state)."""


class OptimizerDivergenceError(StochQAOAError):
    """Raised when the objective returns a non-finite value."""
