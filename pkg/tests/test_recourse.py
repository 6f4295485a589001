import itertools

import numpy as np
import pytest

from stochqaoa.model import instance as inst
from stochqaoa.oracle import recourse as rc


def brute_force_expected_cost(j_vec, instance):
    """Enumerates scenarios and every balancing (buy, sell) pair of each timestep.
    """
    prices = instance.prices
    total = 0.
    for p_vec, prob in inst.joint_scenarios(instance):
        cost = 0.
        for j, p in zip(j_vec, p_vec):
            best = np.inf
            for buy in range(0, 16):
                for sell in range(0, 16):
                    if j - buy + sell == p:
                        best = min(best, -prices.ev_price*j
                                   + prices.intraday_buy*buy
                                   - prices.intraday_sell*sell)
            cost += best
        total += prob*cost
    return total


@pytest.mark.parametrize("j, z", [(0, -0.21), (1, -0.36), (2, -0.45), (3, -0.39)])
def test_expected_cost_reference_instance(j, z):
    instance = inst.reference_instance()
    assert abs(rc.expected_cost((j,), instance) - z) < 1e-9
    assert abs(brute_force_expected_cost((j,), instance) - z) < 1e-9


def test_recourse_split():
    split = rc.recourse_split(3, 1)
    assert split == rc.RecourseSplit(buy=2, sell=0)
    assert split.balances(3, 1)
    assert split.is_complementary()
    assert rc.recourse_split(1, 3) == rc.RecourseSplit(buy=0, sell=2)
    assert rc.recourse_split(2, 2) == rc.RecourseSplit(buy=0, sell=0)


def test_recourse_split_exhaustive():
    for j in range(-64, 65):
        for p in range(-64, 65):
            split = rc.recourse_split(j, p)
            assert split.buy >= 0 and split.sell >= 0
            assert split.balances(j, p)
            assert split.is_complementary()


def test_scenario_cost_is_cheapest_recourse():
    prices = inst.Prices()
    for j in range(8):
        for p in range(8):
            cheapest = min(-prices.ev_price*j + prices.intraday_buy*buy
                           - prices.intraday_sell*sell
                           for buy in range(16) for sell in range(16)
                           if j - buy + sell == p)
            assert abs(rc.scenario_cost([j], [p], prices) - cheapest) < 1e-12


def test_scenario_cost():
    prices = inst.Prices()
    assert np.isclose(rc.scenario_cost([2], [1], prices), -0.5 + 0.4)
    assert np.isclose(rc.scenario_cost([2, 0], [3, 2], prices),
                      -0.5 - 0.1 - 0.2)
    with pytest.raises(ValueError):
        rc.scenario_cost([1, 2], [1], prices)


def test_expected_cost_matches_brute_force():
    np.random.seed(42)
    for _ in range(20):
        horizon = np.random.randint(1, 3)
        dists = []
        for _ in range(horizon):
            values = np.random.choice(np.arange(0, 4), size=np.random.randint(1, 4),
                                      replace=False)
            probs = np.random.dirichlet(np.ones(len(values)))
            probs[-1] = 1. - probs[:-1].sum()
            dists.append(inst.ScenarioDistribution.from_mapping(
                dict(zip(values.tolist(), probs.tolist()))))
        instance = inst.InstanceSpec(horizon, inst.Prices(),
                                     tuple(inst.FirstStageVar(2)
                                           for _ in range(horizon)),
                                     tuple(dists), 2)
        for j_vec in itertools.product(*inst.first_stage_box(instance)):
            assert abs(rc.expected_cost(j_vec, instance)
                       - brute_force_expected_cost(j_vec, instance)) < 1e-9


def test_expected_cost_out_of_bounds():
    with pytest.raises(ValueError):
        rc.expected_cost((4,), inst.reference_instance())

    two_steps = inst.InstanceSpec(2, inst.Prices(),
                                  (inst.FirstStageVar(2), inst.FirstStageVar(2)),
                                  inst.reference_instance().p_dists*2, 2)
    assert inst.validate(two_steps) == []
    with pytest.raises(ValueError):
        rc.expected_cost((2,), two_steps)
    with pytest.raises(ValueError):
        rc.expected_cost((2, 2, 2), two_steps)


def test_marginal_cost_table():
    instance = inst.reference_instance()
    table, = rc.marginal_cost_table(instance)
    assert np.allclose(table, [-0.21, -0.36, -0.45, -0.39])
