import itertools
import logging

import numpy as np
import pytest

from stochqaoa.encoding import layout as lay
from stochqaoa.encoding import qubo as qb
from stochqaoa.model import instance as inst
from stochqaoa.oracle import recourse as rc


def test_energy_matches_definition():
    instance = inst.reference_instance()
    layout = lay.build_layout(instance)
    qubo = qb.build_qubo(instance, penalty=2.)
    prices = instance.prices
    for j, buy, sell, p in itertools.product(range(4), range(4), range(4),
                                             (1, 2, 3)):
        energy = qb.qubo_energy(qubo, layout, instance,
                                lay.Decoded((j,), (buy,), (sell,), (p,)))
        expected = (-prices.ev_price*j + prices.intraday_buy*buy
                    - prices.intraday_sell*sell + 2.*(j - buy + sell - p)**2)
        assert abs(energy - expected) < 1e-12


def test_feasible_complementary_match_oracle():
    instance = inst.reference_instance()
    layout = lay.build_layout(instance)
    qubo = qb.build_qubo(instance)
    for j, p in itertools.product(range(4), (1, 2, 3)):
        split = rc.recourse_split(j, p)
        energy = qb.qubo_energy(qubo, layout, instance,
                                lay.Decoded((j,), (split.buy,), (split.sell,),
                                            (p,)))
        assert energy == pytest.approx(rc.scenario_cost([j], [p], instance.prices),
                                       abs=1e-12)


def test_assignment_forms():
    instance = inst.reference_instance()
    layout = lay.build_layout(instance)
    qubo = qb.build_qubo(instance)
    bits = lay.encode((2,), (1,), (0,), (1,), layout, instance)
    index = sum(b << k for k, b in enumerate(bits))
    e_bits = qb.qubo_energy(qubo, layout, instance, bits)
    e_index = qb.qubo_energy(qubo, layout, instance, index)
    assert e_bits == e_index
    # override of the scenario carried by the bitstring
    e_p3 = qb.qubo_energy(qubo, layout, instance, bits, p=(3,))
    assert abs(e_p3 - (-0.5 + 0.4 + 1.*(2 - 1 - 3)**2)) < 1e-12


def test_penalty_dominance(caplog):
    instance = inst.reference_instance()
    layout = lay.build_layout(instance)
    assert qb.penalty_dominates(qb.build_qubo(instance, 1., check=False), layout,
                                instance)
    with caplog.at_level(logging.WARNING):
        qubo = qb.build_qubo(instance, penalty=0.01)
    assert not qb.penalty_dominates(qubo, layout, instance)
    assert "too small" in caplog.text

    with pytest.raises(ValueError):
        qb.build_qubo(instance, penalty=0.)


def test_structure():
    instance = inst.reference_instance()
    qubo = qb.build_qubo(instance)
    a = qubo.arrays
    assert a["linear"].shape == (6,)
    assert np.allclose(np.tril(a["quadratic"]), 0.)
    # one x*p term per decision bit, weight -2*lambda*w
    assert np.allclose(a["scenario_linear"], [[-2., -4., 2., 4., -2., -4.]])
    assert np.allclose(a["p_quadratic"], [1.])
    for key, _ in qubo.iter_terms():
        assert len(key) <= 2
    assert "p0*x0" in qubo.describe()
