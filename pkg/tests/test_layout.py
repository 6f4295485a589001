import itertools

import numpy as np
import pytest

from stochqaoa.encoding import layout as lay
from stochqaoa.model import instance as inst


def two_step_instance():
    return inst.InstanceSpec(
        2, inst.Prices(), (inst.FirstStageVar(2, 1), inst.FirstStageVar(1)),
        (inst.ScenarioDistribution.from_mapping({1: 0.5, 2: 0.5}),
         inst.ScenarioDistribution.from_mapping({3: 1.}, offset=2)), 2)


def test_reference_layout():
    layout = lay.build_layout(inst.reference_instance())
    assert layout.describe() == "8 qubits: j[0..1] buy[2..3] sell[4..5] p[6..7]"
    assert layout.n_d == 6
    assert layout.n_s == 2
    assert list(layout.scenario_qubits()) == [6, 7]


def test_multi_timestep_layout():
    layout = lay.build_layout(two_step_instance())
    assert layout.j_bits == (range(0, 2), range(6, 7))
    assert layout.buy_bits == (range(2, 4), range(7, 9))
    assert layout.sell_bits == (range(4, 6), range(9, 11))
    assert layout.p_bits == (range(11, 13), range(13, 14))
    assert layout.describe().startswith("14 qubits: j0[0..1] buy0[2..3]")


def test_decode():
    instance = inst.reference_instance()
    layout = lay.build_layout(instance)
    # j = 2, buy = 1, sell = 0, p = 1 (LSB first)
    bits = [0, 1, 1, 0, 0, 0, 1, 0]
    assert lay.decode(bits, layout, instance) == lay.Decoded((2,), (1,), (0,), (1,))
    index = sum(b << k for k, b in enumerate(bits))
    assert lay.decode(index, layout, instance) == lay.decode(bits, layout, instance)
    with pytest.raises(ValueError):
        lay.decode([0, 1], layout, instance)


def test_encode_decode_inverse():
    instance = two_step_instance()
    layout = lay.build_layout(instance)
    for j0, j1, b0, s1, p0 in itertools.product(range(1, 5), range(0, 2),
                                                range(4), range(4), (1, 2)):
        bits = lay.encode((j0, j1), (b0, 0), (0, s1), (p0, 3), layout, instance)
        decoded = lay.decode(bits, layout, instance)
        assert decoded == lay.Decoded((j0, j1), (b0, 0), (0, s1), (p0, 3))
    with pytest.raises(ValueError):
        lay.encode((5, 0), (0, 0), (0, 0), (1, 3), layout, instance)


def test_bit_table():
    table = lay.bit_table(3)
    assert table.shape == (8, 3)
    assert np.all(table[5] == [1, 0, 1])
    assert np.all(lay.register_values(table, range(1, 3)) == np.arange(8) >> 1)
