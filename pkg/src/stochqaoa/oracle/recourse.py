from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
import numpy.typing as npt

from stochqaoa.model import instance as inst


@dataclass(frozen=True)
class RecourseSplit:
    """Intra-day correction of one timestep: energy bought and sold.

    Args:
        buy: energy bought intra-day (>= 0).
        sell: energy sold intra-day (>= 0).
    """
    buy: int
    sell: int

    def balances(self, j: float, p: float) -> bool:
        """Whether j - buy + sell = p holds."""
        return j - self.buy + self.sell == p

    def is_complementary(self) -> bool:
        return self.buy * self.sell == 0


def recourse_split(j: int, p: int) -> RecourseSplit:
    """Cost-minimal recourse for a first-stage decision j and PV surplus p.

    Since buying is more expensive than selling, the optimal split never trades in
    both directions: the shortfall is bought, the excess is sold.

    Args:
        j: first-stage energy traded with the EVs.
        p: realized PV surplus.
    Returns:
        the split (max(j-p, 0), max(p-j, 0)).
    """
    return RecourseSplit(buy=max(j - p, 0), sell=max(p - j, 0))


def timestep_cost(j: npt.ArrayLike, p: npt.ArrayLike,
                  prices: inst.Prices) -> npt.NDArray:
    """Element-wise first-stage plus optimal recourse cost of single timesteps
    (broadcasting over j and p)."""
    j = np.asarray(j, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    buy = np.maximum(j - p, 0.)
    sell = np.maximum(p - j, 0.)
    return -prices.ev_price*j + prices.intraday_buy*buy - prices.intraday_sell*sell


def scenario_cost(j_vec: Sequence[float], p_vec: Sequence[float],
                  prices: inst.Prices) -> float:
    """Total cost of a first-stage plan under one scenario.

    Args:
        j_vec: first-stage decisions, one per timestep.
        p_vec: realized PV surplus, one per timestep.
        prices: tariffs.
    Returns:
        sum over t of -ev*j_t + buy*max(j_t-p_t, 0) - sell*max(p_t-j_t, 0).
    """
    if len(j_vec) != len(p_vec):
        raise ValueError(f"j_vec and p_vec lengths differ "
                         f"({len(j_vec)} != {len(p_vec)})")
    return float(np.sum(timestep_cost(j_vec, p_vec, prices)))


def expected_cost(j_vec: Sequence[int], instance: inst.InstanceSpec,
                  max_scenarios: int = inst.MAX_SCENARIOS) -> float:
    """Here-and-now objective z(j) = E_p[scenario_cost(j, p)].

    Args:
        j_vec: first-stage decisions, one per timestep, within bounds.
        instance: the instance.
        max_scenarios: cap forwarded to `joint_scenarios`.
    Returns:
        the probability-weighted sum of scenario costs.
    """
    if len(j_vec) != instance.horizon:
        raise ValueError(f"j_vec has {len(j_vec)} entries, expected "
                         f"{instance.horizon}")
    for t, (j, var) in enumerate(zip(j_vec, instance.j_vars)):
        if not var.j_min <= j <= var.j_max:
            raise ValueError(f"j_vec[{t}] = {j} outside [{var.j_min}, {var.j_max}]")
    p_mat, probs = inst.scenario_arrays(instance, max_scenarios)
    j = np.asarray(j_vec, dtype=np.float64)[None, :]
    costs = np.sum(timestep_cost(j, p_mat, instance.prices), axis=1)
    return float(np.dot(probs, costs))


def marginal_cost_table(instance: inst.InstanceSpec) -> List[npt.NDArray]:
    """Expected cost of every feasible j_t, timestep by timestep.

    Because the joint measure is a product of independent marginals, the
    expected total cost of a plan is the sum of the entries selected by its
    components.

    Returns:
        list (one entry per timestep) of arrays indexed by j_t - j_min.
    """
    tables = []
    for var, dist in zip(instance.j_vars, instance.p_dists):
        j = np.arange(var.j_min, var.j_max + 1, dtype=np.float64)[:, None]
        costs = timestep_cost(j, dist.values[None, :], instance.prices)
        tables.append(costs @ dist.probabilities)
    return tables
