"""Gate-level construction of the stochastic QAOA circuit.

The circuit amplitude-encodes every scenario register, puts the decision register
in uniform superposition and then alternates, for each layer k,
    RZ(-2 gamma_k h_i) on every decision qubit,
    RZZ(-2 gamma_k J_ij) on every coupled pair,
    CRZ(-2 gamma_k c_ti 2^m) from bit m of scenario register t to decision qubit i,
    RX(2 beta_k) on every decision qubit,
where h_i already includes the scenario offsets. With RZ(a) = exp(-i a Z/2) a layer
equals exp(-i gamma_k (E(z) - const(p))) up to a global phase, E being the QUBO
energy of basis state z and const(p) the part of it depending on the scenario only.
"""
from collections import Counter
from dataclasses import dataclass
from functools import partial
from typing import Dict, List, Sequence, Tuple

import jax.numpy as jnp
import numpy as np
import numpy.typing as npt
from jax import Array, jit, lax

from stochqaoa.encoding import ising as isg
from stochqaoa.encoding import layout as lay
from stochqaoa.model import instance as inst
from stochqaoa.sim import gates as gk
from stochqaoa.sim import statevector as sv


@dataclass(frozen=True)
class Gate:
    """One circuit instruction.

    Args:
        name: "ae", "h", "rz", "rzz", "crz" or "rx".
        qubits: target qubits (control first for "crz"; the register for "ae").
        angle: rotation angle, if any.
        probs: register distribution of an "ae" instruction.
    """
    name: str
    qubits: Tuple[int, ...]
    angle: float | None = None
    probs: Tuple[float, ...] | None = None


def _register_probs(dist: inst.ScenarioDistribution) -> Tuple[float, ...]:
    probs = np.zeros(2**dist.register_bits)
    for v, pr in dist.register_probabilities().items():
        probs[v] = pr
    return tuple(float(x) for x in probs)


def preparation(layout: lay.QubitLayout,
                instance: inst.InstanceSpec) -> List[Gate]:
    """Amplitude encoding of the scenario registers, then H on the decisions."""
    gates = [Gate("ae", tuple(layout.p_bits[t]),
                  probs=_register_probs(instance.p_dists[t]))
             for t in range(layout.horizon) if len(layout.p_bits[t]) > 0]
    gates += [Gate("h", (q,)) for q in layout.decision_qubits()]
    return gates


def effective_fields(model: isg.SplitIsing,
                     instance: inst.InstanceSpec) -> npt.NDArray:
    """h0 plus the contribution of the scenario offsets."""
    offsets = np.array([d.offset for d in instance.p_dists], dtype=np.float64)
    return model.fields(offsets)


def phase_layer(model: isg.SplitIsing, layout: lay.QubitLayout,
                instance: inst.InstanceSpec, gamma: float) -> List[Gate]:
    gates = [Gate("rz", (i,), -2*gamma*h)
             for i, h in enumerate(effective_fields(model, instance))]
    gates += [Gate("rzz", (i, j), -2*gamma*v) for (i, j), v in model.pairs().items()]
    for t, register in enumerate(layout.p_bits):
        for m, control in enumerate(register):
            for i in range(model.num_spins):
                c = model.scenario_coupling[t, i]
                if c != 0.:
                    gates.append(Gate("crz", (control, i), -2*gamma*c*2**m))
    return gates


def mixer_layer(layout: lay.QubitLayout, beta: float) -> List[Gate]:
    return [Gate("rx", (q,), 2*beta) for q in layout.decision_qubits()]


def build_circuit(model: isg.SplitIsing, layout: lay.QubitLayout,
                  instance: inst.InstanceSpec, gammas: Sequence[float],
                  betas: Sequence[float]) -> List[Gate]:
    """Full gate sequence of a p-layer stochastic QAOA circuit.

    Args:
        model: split Ising model of the scenario QUBO.
        layout: qubit layout.
        instance: the instance (scenario distributions and offsets).
        gammas: phase angles, one per layer.
        betas: mixer angles, one per layer.
    Returns:
        the list of gates in application order.
    """
    if len(gammas) != len(betas):
        raise ValueError(f"{len(gammas)} gammas and {len(betas)} betas")
    if len(gammas) < 1:
        raise ValueError("the circuit needs at least one layer")
    gates = preparation(layout, instance)
    for gamma, beta in zip(gammas, betas):
        gates += phase_layer(model, layout, instance, float(gamma))
        gates += mixer_layer(layout, float(beta))
    return gates


def gate_counts(gates: Sequence[Gate]) -> Dict[str, int]:
    return dict(Counter(g.name for g in gates))


def apply_gate(state: sv.StateVector, gate: Gate,
               method: str = "assign") -> sv.StateVector:
    if gate.name == "ae":
        return sv.prepare_amplitudes(state, range(gate.qubits[0], gate.qubits[-1] + 1),
                                     gate.probs, method=method)
    elif gate.name == "h":
        return sv.apply_h(state, *gate.qubits)
    elif gate.name == "rx":
        return sv.apply_rx(state, *gate.qubits, gate.angle)
    elif gate.name == "rz":
        return sv.apply_rz(state, *gate.qubits, gate.angle)
    elif gate.name == "rzz":
        return sv.apply_rzz(state, *gate.qubits, gate.angle)
    elif gate.name == "crz":
        return sv.apply_crz(state, *gate.qubits, gate.angle)
    raise ValueError(f"unknown gate {gate.name!r}")


def run_circuit(state: sv.StateVector, gates: Sequence[Gate],
                method: str = "assign") -> sv.StateVector:
    """Applies a gate sequence one gate at a time."""
    for gate in gates:
        state = apply_gate(state, gate, method)
    return state


def phase_generator(gates: Sequence[Gate], n: int) -> npt.NDArray:
    """Diagonal D such that the product of the given RZ/RZZ/CRZ gates equals
    exp(-i D(z)) on every basis state z."""
    idx = np.arange(2**n)

    def z(q):
        return 1. - 2.*((idx >> q) & 1)

    diag = np.zeros(2**n)
    for g in gates:
        if g.name == "rz":
            diag += g.angle/2*z(g.qubits[0])
        elif g.name == "rzz":
            diag += g.angle/2*z(g.qubits[0])*z(g.qubits[1])
        elif g.name == "crz":
            control, target = g.qubits
            diag += g.angle/2*((idx >> control) & 1)*z(target)
        else:
            raise ValueError(f"{g.name!r} is not a diagonal phase gate")
    return diag


@dataclass(frozen=True)
class CompiledAnsatz:
    """Layer loop of the circuit as a single jit-compiled scan.

    Args:
        initial: amplitudes after the preparation gates.
        generator: unit-gamma phase generator of a layer.
        n: total number of qubits.
        mixed: decision qubits receiving the RX mixer.
    """
    initial: Array
    generator: Array
    n: int
    mixed: Tuple[int, ...]

    def __call__(self, gammas: npt.ArrayLike, betas: npt.ArrayLike) -> Array:
        return _evolve(self.initial, self.generator, jnp.asarray(gammas),
                       jnp.asarray(betas), self.n, self.mixed)


@partial(jit, static_argnums=(4, 5))
def _evolve(initial: Array, generator: Array, gammas: Array, betas: Array, n: int,
            mixed: Tuple[int, ...]) -> Array:
    def layer(amps, angles):
        gamma, beta = angles
        amps = gk.apply_phase(amps, gamma*generator)
        mixer = gk.rx_matrix(2*beta)
        for q in mixed:
            amps = gk.apply_matrix(amps, n, q, mixer)
        return amps, None

    final, _ = lax.scan(layer, initial, (gammas, betas))
    return final


def compile_ansatz(model: isg.SplitIsing, layout: lay.QubitLayout,
                   instance: inst.InstanceSpec,
                   method: str = "assign") -> CompiledAnsatz:
    n = layout.n_qubits
    initial = run_circuit(sv.init(n), preparation(layout, instance), method)
    generator = phase_generator(phase_layer(model, layout, instance, 1.), n)
    return CompiledAnsatz(initial.amplitudes, jnp.asarray(generator), n,
                          tuple(layout.decision_qubits()))
