import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Tuple

import numpy as np
import numpy.typing as npt

from stochqaoa.errors import SearchSpaceError
from stochqaoa.model import instance as inst
from stochqaoa.oracle import recourse as rc

_logger = logging.getLogger(__name__)

# default cap on the number of first-stage plans enumerated
MAX_SEARCH_SPACE = 2**24

# absolute tolerance used when comparing currency values
COST_TOL = 1e-9


@dataclass(frozen=True)
class SolutionReport:
    """Classical benchmark values of a two-stage instance.

    Attributes:
        hn_j: here-and-now optimal first-stage plan.
        hn_value: expected cost of hn_j (the optimum z).
        ws_value: wait-and-see value (expected cost under perfect foresight).
        ev_j: optimal plan of the expected-value (mean scenario) problem.
        eev_value: expected cost of implementing ev_j.
        evpi: expected value of perfect information, hn_value - ws_value.
        vss: value of the stochastic solution, eev_value - hn_value.
    """
    hn_j: Tuple[int, ...]
    hn_value: float
    ws_value: float
    ev_j: Tuple[int, ...]
    eev_value: float
    evpi: float
    vss: float

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["hn_j"] = list(self.hn_j)
        d["ev_j"] = list(self.ev_j)
        return d

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _check_search_space(instance: inst.InstanceSpec, max_search_space: int) -> None:
    size = math.prod(2**var.bit_width for var in instance.j_vars)
    if size > max_search_space:
        raise SearchSpaceError(f"first-stage search space of {size} plans exceeds "
                               f"the cap {max_search_space}")


def _box_argmin(instance: inst.InstanceSpec,
                tables: List[npt.NDArray]) -> Tuple[Tuple[int, ...], float]:
    """Exhaustive argmin of a separable objective over the first-stage box.

    Plans are enumerated in lexicographic order, so the first plan within COST_TOL
    of the minimum is the lexicographically smallest optimum.
    """
    total = tables[0]
    for table in tables[1:]:
        total = np.add.outer(total, table)
    flat = np.ravel(total)
    best = flat.min()
    idx = int(np.flatnonzero(flat <= best + COST_TOL)[0])
    offsets = np.unravel_index(idx, total.shape)
    j = tuple(int(var.j_min + k) for var, k in zip(instance.j_vars, offsets))
    return j, float(flat[idx])


def solve_here_and_now(instance: inst.InstanceSpec,
                       max_search_space: int = MAX_SEARCH_SPACE
                       ) -> Tuple[Tuple[int, ...], float]:
    """Exhaustive minimization of the expected cost over the first-stage box.

    Args:
        instance: the instance.
        max_search_space: cap on the number of enumerated plans.
    Returns:
        the optimal plan j* (lexicographically smallest among ties) and z*.
    """
    inst.ensure_valid(instance)
    _check_search_space(instance, max_search_space)
    j, z = _box_argmin(instance, rc.marginal_cost_table(instance))
    _logger.info("here-and-now optimum j=%s z=%.6f", j, z)
    return j, z


def solve_wait_and_see(instance: inst.InstanceSpec,
                       max_search_space: int = MAX_SEARCH_SPACE) -> float:
    """Probability-weighted optimum under perfect foresight of every scenario.

    The per-scenario optimum separates over timesteps, so its expectation is the
    sum over t of E_{p_t}[min_{j_t} cost_t(j_t, p_t)].
    """
    inst.ensure_valid(instance)
    _check_search_space(instance, max_search_space)
    value = 0.
    for var, dist in zip(instance.j_vars, instance.p_dists):
        j = np.arange(var.j_min, var.j_max + 1, dtype=np.float64)[:, None]
        costs = rc.timestep_cost(j, dist.values[None, :], instance.prices)
        value += float(np.dot(dist.probabilities, costs.min(axis=0)))
    return value


def _nearest_support_value(dist: inst.ScenarioDistribution, mean: float) -> float:
    values = np.sort(dist.values)
    # ties go to the smaller value
    return float(values[np.argmin(np.abs(values - mean))])


def solve_expected_value(instance: inst.InstanceSpec, round_mean: bool = False,
                         max_search_space: int = MAX_SEARCH_SPACE
                         ) -> Tuple[Tuple[int, ...], float]:
    """Solves the mean-scenario problem and prices its plan under uncertainty.

    Args:
        instance: the instance.
        round_mean: if True the mean surplus of each timestep is rounded to the
            nearest support value, otherwise the real-valued mean is used.
        max_search_space: cap on the number of enumerated plans.
    Returns:
        the expected-value plan j_EV and its expected cost EEV.
    """
    inst.ensure_valid(instance)
    _check_search_space(instance, max_search_space)
    tables = []
    for var, dist in zip(instance.j_vars, instance.p_dists):
        mean = inst.expected_scenario(dist)
        if round_mean:
            mean = _nearest_support_value(dist, mean)
        j = np.arange(var.j_min, var.j_max + 1, dtype=np.float64)
        tables.append(rc.timestep_cost(j, mean, instance.prices))
    j_ev, _ = _box_argmin(instance, tables)
    marginal = rc.marginal_cost_table(instance)
    eev = float(sum(table[j - var.j_min]
                    for table, j, var in zip(marginal, j_ev, instance.j_vars)))
    return j_ev, eev


def benchmark_report(instance: inst.InstanceSpec, round_mean: bool = False,
                     max_search_space: int = MAX_SEARCH_SPACE) -> SolutionReport:
    """Computes the here-and-now, wait-and-see and expected-value benchmarks."""
    hn_j, hn = solve_here_and_now(instance, max_search_space)
    ws = solve_wait_and_see(instance, max_search_space)
    ev_j, eev = solve_expected_value(instance, round_mean, max_search_space)
    # the orderings ws <= hn <= eev hold exactly; clip rounding noise
    report = SolutionReport(hn_j=hn_j, hn_value=hn, ws_value=ws, ev_j=ev_j,
                            eev_value=eev, evpi=max(hn - ws, 0.),
                            vss=max(eev - hn, 0.))
    _logger.info("benchmarks: hn=%.6f ws=%.6f eev=%.6f", hn, ws, eev)
    return report
