import numpy as np
import pytest

from stochqaoa.encoding import ising as isg
from stochqaoa.encoding import layout as lay
from stochqaoa.model import instance as inst
from stochqaoa.qaoa import circuit as cir
from stochqaoa.qaoa.config import QaoaConfig
from stochqaoa.qaoa.runner import StochasticQaoa
from stochqaoa.sim import statevector as sv


@pytest.fixture()
def qaoa(setup_test):
    return StochasticQaoa(inst.reference_instance(), QaoaConfig())


def random_state(n, rng):
    psi = rng.normal(size=2**n) + 1j*rng.normal(size=2**n)
    return sv.from_amplitudes(psi/np.linalg.norm(psi))


def test_gate_counts(qaoa):
    gates = qaoa.circuit([0.3, 0.7])
    assert cir.gate_counts(gates) == {"ae": 1, "h": 6, "rz": 6, "rzz": 15,
                                      "crz": 12, "rx": 6}
    assert gates[0].name == "ae"
    assert gates[0].qubits == (6, 7)
    assert gates[0].probs == (0., 0.2, 0.5, 0.3)
    # angles of the first layer
    rx = [g for g in gates if g.name == "rx"]
    assert all(g.angle == pytest.approx(1.4) for g in rx)
    crz = [g for g in gates if g.name == "crz"]
    assert {g.qubits[0] for g in crz} == {6, 7}

    two_layers = qaoa.circuit([0.1, 0.2, 0.3, 0.4])
    assert cir.gate_counts(two_layers)["crz"] == 24

    with pytest.raises(ValueError):
        cir.build_circuit(qaoa.model, qaoa.layout, qaoa.instance, [0.1], [])
    with pytest.raises(ValueError):
        cir.build_circuit(qaoa.model, qaoa.layout, qaoa.instance, [], [])
    with pytest.raises(ValueError):
        qaoa.split([0.1, 0.2, 0.3])


def test_phase_generator_is_energy(qaoa):
    generator = cir.phase_generator(
        cir.phase_layer(qaoa.model, qaoa.layout, qaoa.instance, 1.), 8)
    expected = (qaoa.cost - qaoa.model.constant0
                - qaoa.model.scenario_constant(qaoa.p_values))
    assert np.max(np.abs(generator - expected)) < 1e-9

    with pytest.raises(ValueError):
        cir.phase_generator([cir.Gate("h", (0,))], 8)


def test_phase_layer_equals_diagonal_phase(qaoa):
    rng = np.random.default_rng(42)
    shifted = qaoa.cost - qaoa.model.scenario_constant(qaoa.p_values)
    for _ in range(50):
        gamma = float(rng.uniform(-np.pi, np.pi))
        state = random_state(8, rng)
        gates = cir.phase_layer(qaoa.model, qaoa.layout, qaoa.instance, gamma)
        a = np.asarray(cir.run_circuit(state, gates).amplitudes)
        b = np.asarray(sv.apply_diagonal_phase(state, gamma, shifted).amplitudes)
        # align the global phase
        overlap = np.vdot(a, b)
        a = a*overlap/abs(overlap)
        assert np.max(np.abs(a - b)) < 1e-9


def ising_energy(model, layout, instance):
    """Scenario-dependent part of the Ising energy of every basis state."""
    bits = lay.bit_table(layout.n_qubits)
    s = 1. - 2.*bits[:, :model.num_spins]
    p = np.stack([d.offset + lay.register_values(bits, r)
                  for d, r in zip(instance.p_dists, layout.p_bits)], axis=1)
    coupling = np.zeros((model.num_spins, model.num_spins))
    for (i, j), v in model.couplings.items():
        coupling[i, j] = v
    return (-0.5*np.einsum("zi,ij,zj->z", s, coupling, s)
            - np.sum(model.fields(p)*s, axis=1))


def test_phase_layer_random_ising(setup_test):
    # offsets on both the decisions and the scenario registers
    instance = inst.InstanceSpec(
        horizon=2, prices=inst.Prices(),
        j_vars=(inst.FirstStageVar(1, offset=2), inst.FirstStageVar(1, offset=1)),
        p_dists=(inst.ScenarioDistribution.from_mapping({3: 0.5, 4: 0.5}, offset=3),
                 inst.ScenarioDistribution.from_mapping({1: 0.3, 2: 0.7},
                                                        offset=1)),
        recourse_bit_width=2)
    assert inst.validate(instance) == []
    layout = lay.build_layout(instance)
    n, T = layout.n_d, instance.horizon
    rng = np.random.default_rng(3)
    for _ in range(10):
        couplings = {}
        for i in range(n):
            for j in range(i + 1, n):
                if rng.uniform() < 0.7:
                    couplings[(i, j)] = couplings[(j, i)] = float(rng.normal())
        model = isg.SplitIsing(num_spins=n, couplings=couplings,
                               h0=rng.normal(size=n),
                               scenario_coupling=rng.normal(size=(T, n)),
                               constant0=float(rng.normal()),
                               p_linear=rng.normal(size=T),
                               p_quadratic=rng.normal(size=T))
        energy = ising_energy(model, layout, instance)
        generator = cir.phase_generator(
            cir.phase_layer(model, layout, instance, 1.), layout.n_qubits)
        assert np.max(np.abs(generator - energy)) < 1e-9

        gamma = float(rng.uniform(-np.pi, np.pi))
        state = random_state(layout.n_qubits, rng)
        gates = cir.phase_layer(model, layout, instance, gamma)
        a = np.asarray(cir.run_circuit(state, gates).amplitudes)
        b = np.asarray(sv.apply_diagonal_phase(state, gamma, energy).amplitudes)
        overlap = np.vdot(a, b)
        a = a*overlap/abs(overlap)
        assert np.max(np.abs(a - b)) < 1e-9

@pytest.mark.parametrize("method", ["assign", "rotations"])
def test_compiled_ansatz_matches_gates(qaoa, method):
    rng = np.random.default_rng(0)
    for layers in (1, 2, 3):
        gammas = rng.uniform(0., np.pi, layers)
        betas = rng.uniform(0., np.pi, layers)
        gates = cir.build_circuit(qaoa.model, qaoa.layout, qaoa.instance, gammas,
                                  betas)
        by_gate = np.asarray(cir.run_circuit(sv.init(8), gates, method).amplitudes)
        compiled = np.asarray(qaoa.ansatz(gammas, betas))
        assert np.max(np.abs(by_gate - compiled)) < 1e-10
        assert abs(np.sum(np.abs(compiled)**2) - 1.) < 1e-10


def test_zero_angles(qaoa):
    state = qaoa.final_state([0., 0.])
    assert np.allclose(sv.marginal(state, qaoa.layout.scenario_qubits()),
                       [0., 0.2, 0.5, 0.3], atol=1e-12)
    assert np.allclose(sv.marginal(state, qaoa.layout.decision_qubits()),
                       np.full(64, 1/64), atol=1e-12)
