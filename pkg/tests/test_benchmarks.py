import itertools
import json

import numpy as np
import pytest

from stochqaoa.errors import InvalidInstanceError, SearchSpaceError
from stochqaoa.model import instance as inst
from stochqaoa.oracle import benchmarks as bm
from stochqaoa.oracle import recourse as rc


def random_instance(rng):
    horizon = int(rng.integers(1, 4))
    ev = rng.uniform(0.15, 0.35)
    prices = inst.Prices(ev, ev + rng.uniform(0.01, 0.3), rng.uniform(0., ev - 0.01))
    j_vars, dists = [], []
    for _ in range(horizon):
        j_vars.append(inst.FirstStageVar(int(rng.integers(1, 3))))
        values = rng.choice(np.arange(0, 4), size=int(rng.integers(1, 4)),
                            replace=False)
        probs = rng.dirichlet(np.ones(len(values)))
        probs[-1] = 1. - probs[:-1].sum()
        dists.append(inst.ScenarioDistribution.from_mapping(
            dict(zip(values.tolist(), probs.tolist()))))
    return inst.InstanceSpec(horizon, prices, tuple(j_vars), tuple(dists), 2)


def test_reference_report():
    report = bm.benchmark_report(inst.reference_instance())
    assert report.hn_j == (2,)
    assert abs(report.hn_value + 0.45) < 1e-9
    assert abs(report.ws_value + 0.525) < 1e-9
    assert report.ev_j == (2,)
    assert abs(report.eev_value + 0.45) < 1e-9
    assert abs(report.evpi - 0.075) < 1e-9
    assert abs(report.vss) < 1e-9

    d = json.loads(report.to_json())
    assert set(d) == {"hn_j", "hn_value", "ws_value", "ev_j", "eev_value", "evpi",
                      "vss"}
    assert d["hn_j"] == [2]


def test_point_mass_has_no_value_of_information():
    instance = inst.InstanceSpec(1, inst.Prices(), (inst.FirstStageVar(2),),
                                 (inst.ScenarioDistribution.from_mapping({2: 1.}),),
                                 2)
    report = bm.benchmark_report(instance)
    assert report.hn_j == (2,)
    assert abs(report.evpi) < 1e-12
    assert abs(report.vss) < 1e-12


def test_orderings_random_instances():
    rng = np.random.default_rng(42)
    for _ in range(100):
        instance = random_instance(rng)
        inst.ensure_valid(instance)
        hn_j, hn = bm.solve_here_and_now(instance)
        ws = bm.solve_wait_and_see(instance)
        _, eev = bm.solve_expected_value(instance)
        assert ws <= hn + bm.COST_TOL
        assert hn <= eev + bm.COST_TOL

        # exhaustive check of the here-and-now optimum against expected_cost
        values = {j: rc.expected_cost(j, instance)
                  for j in itertools.product(*inst.first_stage_box(instance))}
        assert abs(min(values.values()) - hn) < 1e-9
        assert abs(values[hn_j] - hn) < 1e-9


def test_expected_value_rounding():
    # mean 2.1 rounds to the support value 2
    instance = inst.reference_instance()
    j_ev, eev = bm.solve_expected_value(instance, round_mean=True)
    assert j_ev == (2,)
    assert abs(eev + 0.45) < 1e-9


def test_invalid_instance_rejected():
    # ev price equal to the buy price breaks the price ordering
    instance = inst.InstanceSpec(1, inst.Prices(0.2, 0.2, 0.1),
                                 (inst.FirstStageVar(1),),
                                 (inst.ScenarioDistribution.from_mapping({0: 1.}),),
                                 1)
    with pytest.raises(InvalidInstanceError):
        bm.solve_here_and_now(instance)


def test_search_space_cap():
    with pytest.raises(SearchSpaceError):
        bm.solve_here_and_now(inst.reference_instance(), max_search_space=3)
