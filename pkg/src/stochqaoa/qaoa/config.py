import enum
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Mapping

import yaml

from stochqaoa.errors import InstanceParseError

InitStrategy = enum.Enum('InitStrategy', ['annealing_ramp', 'random', 'constant'])
Optimizer = enum.Enum('Optimizer', ['nelder_mead', 'spsa', 'cobyla'])
EvalMode = enum.Enum('EvalMode', ['exact', 'sampled'])

SOLVER_LIBS = ("scipy", "pygmo")


def to_member(enum_cls, value):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls[str(value).replace("-", "_").lower()]
    except KeyError:
        names = ", ".join(m.name for m in enum_cls)
        raise ValueError(f"unknown {enum_cls.__name__} {value!r} (one of {names})")


@dataclass(frozen=True)
class QaoaConfig:
    """Settings of a stochastic QAOA run.

    Args:
        layers: circuit depth p (>= 1).
        init_strategy: initial angle schedule.
        optimizer: gradient-free optimizer.
        eval_mode: exact expectation or shot-based estimate.
        shots: shots per objective evaluation in sampled mode.
        max_evaluations: objective evaluation budget.
        seed: seed of the initial angles, the Nelder-Mead simplex, the shots and
            SPSA.
        penalty: weight of the energy-balance penalty.
        gamma_max: final gamma of the annealing ramp.
        beta_max: initial beta scale of the annealing ramp; its sign is opposite to
            gamma_max for the ramp to descend in energy under RX(2 beta) mixers.
        tol: convergence tolerance of the optimizer.
        solver_lib: optimizer backend, "scipy" or "pygmo".
    """
    layers: int = 1
    init_strategy: InitStrategy = InitStrategy.annealing_ramp
    optimizer: Optimizer = Optimizer.nelder_mead
    eval_mode: EvalMode = EvalMode.exact
    shots: int = 4096
    max_evaluations: int = 1000
    seed: int = 0
    penalty: float = 1.
    gamma_max: float = 1.
    beta_max: float = -0.5
    tol: float = 1e-6
    solver_lib: str = "scipy"

    def __post_init__(self):
        object.__setattr__(self, "init_strategy",
                           to_member(InitStrategy, self.init_strategy))
        object.__setattr__(self, "optimizer", to_member(Optimizer, self.optimizer))
        object.__setattr__(self, "eval_mode", to_member(EvalMode, self.eval_mode))
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1, got "
                             f"{self.max_evaluations}")
        if not self.penalty > 0:
            raise ValueError(f"penalty must be > 0, got {self.penalty}")
        if not self.tol >= 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")
        if self.solver_lib not in SOLVER_LIBS:
            raise ValueError(f"unknown solver library {self.solver_lib!r}")

    def with_updates(self, **changes) -> "QaoaConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        for k in ("init_strategy", "optimizer", "eval_mode"):
            d[k] = d[k].name
        return d


def config_from_dict(data: Mapping[str, Any],
                     base: QaoaConfig | None = None) -> QaoaConfig:
    """Overrides the fields of a base configuration with a mapping."""
    names = {f.name for f in fields(QaoaConfig)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise InstanceParseError(f"unknown configuration keys: {', '.join(unknown)}")
    try:
        return replace(base or QaoaConfig(), **dict(data))
    except (TypeError, ValueError) as e:
        raise InstanceParseError(f"invalid configuration: {e}") from e


def load_config(path: str, base: QaoaConfig | None = None) -> QaoaConfig:
    try:
        with open(path) as f:
            data = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise InstanceParseError(f"{path}: {e}") from e
    if not isinstance(data, Mapping):
        raise InstanceParseError(f"{path}: expected a mapping of settings")
    return config_from_dict(data, base)
