import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from typeguard import check_type

from stochqaoa.errors import InvalidInstanceError, ScenarioExplosionError

_logger = logging.getLogger(__name__)

# default cap on the size of the joint scenario set
MAX_SCENARIOS = 10**6

PROB_TOL = 1e-12


@dataclass(frozen=True)
class Prices:
    """Tariffs of the first stage (EV trade) and of the intra-day recourse.

    Args:
        ev_price: price per energy unit traded with the EVs (first stage).
        intraday_buy: price per energy unit bought intra-day.
        intraday_sell: price per energy unit sold intra-day.
    """
    ev_price: float = 0.25
    intraday_buy: float = 0.4
    intraday_sell: float = 0.1


@dataclass(frozen=True)
class FirstStageVar:
    """Binary-encoded integer first-stage variable j_t = offset + sum_k 2^k b_k.

    Args:
        bit_width: number of bits of the encoding.
        offset: value encoded by the all-zero bitstring.
    """
    bit_width: int
    offset: int = 0

    @property
    def j_min(self) -> int:
        return self.offset

    @property
    def j_max(self) -> int:
        return self.offset + 2**self.bit_width - 1

    def values(self) -> range:
        """All the representable values, in increasing order."""
        return range(self.j_min, self.j_max + 1)


@dataclass(frozen=True)
class ScenarioDistribution:
    """Discrete distribution of the PV surplus p_t at one timestep.

    Args:
        support: (value, probability) pairs.
        offset: value stored by the all-zero state of the scenario register.
        bit_width: width of the scenario register; 0 selects the minimal width
            able to hold every support value.
    """
    support: Tuple[Tuple[int, float], ...]
    offset: int = 0
    bit_width: int = 0

    def __post_init__(self):
        # accept any sequence of pairs (or a mapping) but store a tuple of tuples
        support = self.support
        if isinstance(support, dict):
            support = support.items()
        object.__setattr__(self, "support",
                           tuple((int(v), float(p)) for v, p in support))

    @classmethod
    def from_mapping(cls, dist: Dict[int, float], offset: int = 0,
                     bit_width: int = 0) -> "ScenarioDistribution":
        return cls(tuple(sorted(dist.items())), offset=offset, bit_width=bit_width)

    @property
    def values(self) -> npt.NDArray:
        return np.array([v for v, _ in self.support], dtype=np.int64)

    @property
    def probabilities(self) -> npt.NDArray:
        return np.array([p for _, p in self.support], dtype=np.float64)

    @property
    def register_bits(self) -> int:
        """Number of qubits of the scenario register."""
        if self.bit_width > 0:
            return self.bit_width
        highest = max((v - self.offset for v, _ in self.support), default=0)
        return max(1, int(highest).bit_length())

    def register_probabilities(self) -> Dict[int, float]:
        """Probabilities keyed by register basis index (value - offset)."""
        return {v - self.offset: p for v, p in self.support}


@dataclass(frozen=True)
class InstanceSpec:
    """Two-stage EV charging instance with per-timestep PV scenarios.

    Args:
        horizon: number of timesteps T.
        prices: first-stage and recourse tariffs.
        j_vars: encodings of the first-stage variables, one per timestep.
        p_dists: PV surplus distributions, one per timestep.
        recourse_bit_width: number of bits of each of buy_t and sell_t.
    """
    horizon: int
    prices: Prices
    j_vars: Tuple[FirstStageVar, ...]
    p_dists: Tuple[ScenarioDistribution, ...]
    recourse_bit_width: int
    name: str = field(default="instance", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "j_vars", tuple(self.j_vars))
        object.__setattr__(self, "p_dists", tuple(self.p_dists))


def validate(instance: InstanceSpec) -> List[str]:
    """Collects every violated invariant of an instance.

    Args:
        instance: the instance to check.
    Returns:
        list of "<path>: <message>" strings; an empty list means the instance is
        valid.
    """
    issues = []
    prices = instance.prices
    for name in ("ev_price", "intraday_buy", "intraday_sell"):
        value = getattr(prices, name)
        if not math.isfinite(value) or value < 0:
            issues.append(f"prices.{name}: must be a finite nonnegative number, "
                          f"got {value}")
    if not (prices.intraday_sell < prices.ev_price < prices.intraday_buy):
        issues.append(
            f"prices: price ordering intraday_sell < ev_price < intraday_buy "
            f"violated ({prices.intraday_sell}, {prices.ev_price}, "
            f"{prices.intraday_buy})")

    if instance.horizon < 1:
        issues.append(f"horizon: must be >= 1, got {instance.horizon}")
    if len(instance.j_vars) != instance.horizon:
        issues.append(f"j_vars: expected {instance.horizon} entries, "
                      f"got {len(instance.j_vars)}")
    if len(instance.p_dists) != instance.horizon:
        issues.append(f"p_dists: expected {instance.horizon} entries, "
                      f"got {len(instance.p_dists)}")

    for t, var in enumerate(instance.j_vars):
        if var.bit_width < 0:
            issues.append(f"j_vars[{t}].bit_width: must be >= 0, got {var.bit_width}")

    for t, dist in enumerate(instance.p_dists):
        path = f"p_dists[{t}]"
        if len(dist.support) == 0:
            issues.append(f"{path}.support: empty support")
            continue
        values = [v for v, _ in dist.support]
        if len(set(values)) != len(values):
            issues.append(f"{path}.support: duplicated values {values}")
        for v, p in dist.support:
            if not (0. < p <= 1.):
                issues.append(f"{path}.support: probability of {v} not in (0, 1], "
                              f"got {p}")
        total = math.fsum(p for _, p in dist.support)
        if abs(total - 1.) > PROB_TOL:
            issues.append(f"{path}.support: probabilities sum {total:.12g}, "
                          f"expected 1")
        if dist.bit_width < 0:
            issues.append(f"{path}.bit_width: must be >= 0, got {dist.bit_width}")
        lowest = min(values) - dist.offset
        highest = max(values) - dist.offset
        if lowest < 0 or highest >= 2**dist.register_bits:
            issues.append(f"{path}: values {sorted(values)} not representable with "
                          f"{dist.register_bits} bits and offset {dist.offset}")

    if instance.recourse_bit_width < 0:
        issues.append(f"recourse_bit_width: must be >= 0, "
                      f"got {instance.recourse_bit_width}")
    else:
        capacity = 2**instance.recourse_bit_width - 1
        for t, (var, dist) in enumerate(zip(instance.j_vars, instance.p_dists)):
            if len(dist.support) == 0:
                continue
            values = [v for v, _ in dist.support]
            imbalance = max(abs(var.j_max - min(values)), abs(var.j_min - max(values)))
            if imbalance > capacity:
                issues.append(
                    f"recourse_bit_width: {instance.recourse_bit_width} bits cannot "
                    f"represent the imbalance {imbalance} at timestep {t}")
    return issues


def ensure_valid(instance: InstanceSpec) -> None:
    """Raises InvalidInstanceError listing all the violations, if any."""
    issues = validate(instance)
    if issues:
        raise InvalidInstanceError(issues)


def expected_scenario(dist: ScenarioDistribution) -> float:
    """Mean of a scenario distribution.

    Args:
        dist: a valid distribution.
    Returns:
        sum of value*probability over the support.
    """
    return float(np.dot(dist.values.astype(np.float64), dist.probabilities))


def joint_scenarios(instance: InstanceSpec, max_scenarios: int = MAX_SCENARIOS
                    ) -> List[Tuple[Tuple[int, ...], float]]:
    """Enumerates the product measure of the per-timestep distributions.

    Args:
        instance: a valid instance.
        max_scenarios: cap on the number of joint scenarios.
    Returns:
        list of (p-vector, probability) pairs in lexicographic order of the
        per-timestep supports.
    """
    check_type(max_scenarios, int)
    size = math.prod(len(d.support) for d in instance.p_dists)
    if size > max_scenarios:
        raise ScenarioExplosionError(
            f"scenario explosion: {size} joint scenarios exceed the cap "
            f"{max_scenarios}")
    scenarios = []
    for combo in itertools.product(*(d.support for d in instance.p_dists)):
        p_vec = tuple(v for v, _ in combo)
        prob = math.prod(p for _, p in combo)
        scenarios.append((p_vec, prob))
    return scenarios


def scenario_arrays(instance: InstanceSpec, max_scenarios: int = MAX_SCENARIOS
                    ) -> Tuple[npt.NDArray, npt.NDArray]:
    """Joint scenarios as a (num_scenarios, T) integer matrix and a probability
    vector."""
    scenarios = joint_scenarios(instance, max_scenarios)
    p_mat = np.array([p for p, _ in scenarios], dtype=np.int64).reshape(
        len(scenarios), instance.horizon)
    probs = np.array([w for _, w in scenarios], dtype=np.float64)
    return p_mat, probs


def first_stage_box(instance: InstanceSpec) -> Sequence[range]:
    """Ranges of feasible values of each first-stage variable."""
    return [var.values() for var in instance.j_vars]


def reference_instance() -> InstanceSpec:
    """One-timestep instance with prices 0.25/0.4/0.1, two bits per variable and
    PV surplus distribution {1: 0.2, 2: 0.5, 3: 0.3}."""
    return InstanceSpec(horizon=1, prices=Prices(0.25, 0.4, 0.1),
                        j_vars=(FirstStageVar(bit_width=2, offset=0),),
                        p_dists=(ScenarioDistribution.from_mapping(
                            {1: 0.2, 2: 0.5, 3: 0.3}),),
                        recourse_bit_width=2, name="reference-instance")
