import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Sequence, Tuple

import jax.numpy as jnp
import numpy as np
import numpy.typing as npt
from jax import Array
from scipy import stats
from typeguard import check_type

import stochqaoa as sq
from stochqaoa.errors import SimulatorError
from stochqaoa.sim import gates

_logger = logging.getLogger(__name__)

# largest register the dense simulator accepts (2^26 complex128 = 1 GiB)
MAX_QUBITS = 26

NORM_TOL = 1e-10

Cost = npt.ArrayLike | Callable[[int], float]


@dataclass(frozen=True)
class StateVector:
    """Dense n-qubit state; bit k of the basis index is qubit k.

    Args:
        amplitudes: array of the 2^n complex amplitudes.
        n: number of qubits.
    """
    amplitudes: Array
    n: int

    def __post_init__(self):
        check_type(self.amplitudes, npt.NDArray | Array)
        if self.amplitudes.shape != (2**self.n,):
            raise SimulatorError(f"{self.amplitudes.shape[0]} amplitudes do not "
                                 f"describe {self.n} qubits")

    @property
    def norm(self) -> float:
        return float(jnp.sqrt(jnp.sum(jnp.abs(self.amplitudes)**2)))


@dataclass(frozen=True)
class ShotCounts:
    """Measurement histogram.

    Args:
        counts: occurrences of every measured basis index.
        n: number of qubits of the measured state.
    """
    counts: Dict[int, int]
    n: int
    shots: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "shots", int(sum(self.counts.values())))

    def bitstrings(self) -> Dict[str, int]:
        """Counts keyed by bitstrings written with qubit 0 as the rightmost char."""
        return {format(z, f"0{self.n}b"): c for z, c in sorted(self.counts.items())}

    def frequencies(self) -> npt.NDArray:
        freq = np.zeros(2**self.n)
        for z, c in self.counts.items():
            freq[z] = c
        return freq/self.shots

    def register_counts(self, qubits: Sequence[int]) -> npt.NDArray:
        """Counts of the values of a register (qubits[k] has weight 2^k)."""
        out = np.zeros(2**len(qubits), dtype=np.int64)
        for z, c in self.counts.items():
            out[sum(((z >> q) & 1) << k for k, q in enumerate(qubits))] += c
        return out


def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.n:
        raise SimulatorError(f"qubit {qubit} out of range for {state.n} qubits")


def _check_pair(state: StateVector, q1: int, q2: int) -> None:
    _check_qubit(state, q1)
    _check_qubit(state, q2)
    if q1 == q2:
        raise SimulatorError(f"two-qubit gate on a single qubit {q1}")


def _cost_vector(state: StateVector, cost: Cost) -> Array:
    if callable(cost):
        cost = [cost(z) for z in range(2**state.n)]
    vec = jnp.asarray(cost, dtype=sq.float_dtype)
    if vec.shape != (2**state.n,):
        raise SimulatorError(f"cost vector of shape {vec.shape} for {state.n} qubits")
    return vec


def init(n: int, max_qubits: int = MAX_QUBITS) -> StateVector:
    """|0...0> on n qubits."""
    if not 1 <= n <= max_qubits:
        raise SimulatorError(f"number of qubits must be in [1, {max_qubits}], "
                             f"got {n}")
    amps = jnp.zeros(2**n, dtype=sq.complex_dtype).at[0].set(1.)
    return StateVector(amps, n)


def from_amplitudes(amplitudes: npt.ArrayLike) -> StateVector:
    amps = jnp.asarray(amplitudes, dtype=sq.complex_dtype)
    n = int(amps.shape[0]).bit_length() - 1
    if amps.ndim != 1 or 2**n != amps.shape[0]:
        raise SimulatorError("number of amplitudes is not a power of 2")
    state = StateVector(amps, n)
    if abs(state.norm - 1.) > NORM_TOL:
        raise SimulatorError(f"state is not normalized (norm {state.norm})")
    return state


def apply_h(state: StateVector, qubit: int) -> StateVector:
    _check_qubit(state, qubit)
    return StateVector(gates.apply_matrix(state.amplitudes, state.n, qubit,
                                          gates.H_MATRIX), state.n)


def apply_rx(state: StateVector, qubit: int, angle: float) -> StateVector:
    _check_qubit(state, qubit)
    return StateVector(gates.apply_matrix(state.amplitudes, state.n, qubit,
                                          gates.rx_matrix(angle)), state.n)


def apply_ry(state: StateVector, qubit: int, angle: float) -> StateVector:
    _check_qubit(state, qubit)
    return StateVector(gates.apply_matrix(state.amplitudes, state.n, qubit,
                                          gates.ry_matrix(angle)), state.n)


def apply_rz(state: StateVector, qubit: int, angle: float) -> StateVector:
    _check_qubit(state, qubit)
    return StateVector(gates.apply_rz(state.amplitudes, state.n, qubit, angle),
                       state.n)


def apply_rzz(state: StateVector, q1: int, q2: int, angle: float) -> StateVector:
    _check_pair(state, q1, q2)
    return StateVector(gates.apply_rzz(state.amplitudes, state.n, q1, q2, angle),
                       state.n)


def apply_crz(state: StateVector, control: int, target: int,
              angle: float) -> StateVector:
    _check_pair(state, control, target)
    return StateVector(gates.apply_crz(state.amplitudes, state.n, control, target,
                                       angle), state.n)


def _register_distribution(probs: Mapping[int, float] | npt.ArrayLike,
                           width: int) -> npt.NDArray:
    size = 2**width
    if isinstance(probs, Mapping):
        dist = np.zeros(size)
        for v, pr in probs.items():
            if not 0 <= int(v) < size:
                raise SimulatorError(f"value {v} does not fit a {width}-qubit "
                                     "register")
            dist[int(v)] += float(pr)
    else:
        dist = np.asarray(probs, dtype=np.float64)
        if dist.ndim != 1 or len(dist) > size:
            raise SimulatorError(f"{len(dist)} probabilities do not fit a "
                                 f"{width}-qubit register")
        dist = np.pad(dist, (0, size - len(dist)))
    if np.any(dist < 0) or abs(dist.sum() - 1.) > 1e-9:
        raise SimulatorError("register probabilities must be nonnegative and sum "
                             f"to 1 (sum {dist.sum()})")
    return dist


def bisection_angles(dist: npt.NDArray) -> Tuple[npt.NDArray, ...]:
    """RY angles preparing sum_v sqrt(dist[v])|v> from |0...0>.

    Returns one angle array per register bit, from the most significant one; the
    array of bit b is indexed by the value of the bits above b.
    """
    width = len(dist).bit_length() - 1
    angles = []
    for b in reversed(range(width)):
        # mass of every prefix (value >> b), split on bit b
        mass = dist.reshape(-1, 2**b).sum(axis=1).reshape(-1, 2)
        angles.append(2*np.arctan2(np.sqrt(mass[:, 1]), np.sqrt(mass[:, 0])))
    return tuple(angles)


def prepare_amplitudes(state: StateVector, qubits: range,
                       probs: Mapping[int, float] | npt.ArrayLike,
                       method: str = "assign") -> StateVector:
    """Amplitude-encodes a distribution on a contiguous register in |0...0>.

    Args:
        state: the state; the register must be |0...0> (hence unentangled).
        qubits: contiguous register, qubits[k] carrying weight 2^k.
        probs: map register value -> probability, or dense probability vector.
        method: "assign" (direct amplitude assignment) or "rotations" (uniformly
            controlled RY by recursive bisection of the mass).
    Returns:
        the state with the register holding sum_v sqrt(Pr(v))|v>.
    """
    width = len(qubits)
    if width == 0:
        return state
    if qubits.step != 1:
        raise SimulatorError("amplitude register must be contiguous")
    _check_qubit(state, qubits.start)
    _check_qubit(state, qubits.stop - 1)
    dist = _register_distribution(probs, width)

    lo, hi = 2**qubits.start, 2**(state.n - qubits.stop)
    psi = state.amplitudes.reshape(hi, 2**width, lo)
    if float(jnp.sum(jnp.abs(psi[:, 1:, :])**2)) > NORM_TOL:
        raise SimulatorError(f"register {qubits.start}..{qubits.stop - 1} "
                             "is not in |0...0>")

    if method == "assign":
        amps = jnp.asarray(np.sqrt(dist), dtype=state.amplitudes.dtype)
        psi = psi[:, :1, :]*amps[None, :, None]
        return StateVector(psi.reshape(-1), state.n)
    elif method == "rotations":
        amps = state.amplitudes
        for level, theta in enumerate(bisection_angles(dist)):
            b = width - 1 - level
            controls = tuple(qubits[b + 1:])
            amps = gates.apply_ucry(amps, state.n, qubits[b], controls,
                                    jnp.asarray(theta))
        return StateVector(amps, state.n)
    else:
        raise SimulatorError(f"unknown amplitude preparation method {method!r}")


def probabilities(state: StateVector) -> Array:
    return gates.probabilities(state.amplitudes)


def marginal(state: StateVector, qubits: Sequence[int]) -> npt.NDArray:
    """Distribution of the value of a register (qubits[k] has weight 2^k)."""
    for q in qubits:
        _check_qubit(state, q)
    idx = np.arange(2**state.n)
    values = np.zeros_like(idx)
    for k, q in enumerate(qubits):
        values += ((idx >> q) & 1) << k
    return np.bincount(values, weights=np.asarray(probabilities(state)),
                       minlength=2**len(qubits))


def expectation_diagonal(state: StateVector, cost: Cost) -> float:
    """Exact sum_z |amp_z|^2 cost(z).

    Args:
        state: the state.
        cost: vector of the 2^n diagonal entries or a function of the basis index.
    """
    return float(jnp.dot(probabilities(state), _cost_vector(state, cost)))


def apply_diagonal_phase(state: StateVector, gamma: float,
                         cost: Cost) -> StateVector:
    """amp_z <- exp(-i gamma cost(z)) amp_z."""
    return StateVector(gates.apply_phase(state.amplitudes,
                                         gamma*_cost_vector(state, cost)), state.n)


def sample(state: StateVector, shots: int,
           seed: int | np.random.Generator | None = None) -> ShotCounts:
    """Draws measurement outcomes from |amp|^2; the state is not collapsed."""
    if shots < 1:
        raise SimulatorError(f"number of shots must be >= 1, got {shots}")
    probs = np.asarray(probabilities(state), dtype=np.float64)
    probs = probs/probs.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs)
    nz = np.flatnonzero(draws)
    _logger.debug("sampled %d shots over %d outcomes", shots, len(nz))
    return ShotCounts({int(z): int(draws[z]) for z in nz}, state.n)


def chi_square_test(counts: ShotCounts | npt.ArrayLike,
                    expected: npt.ArrayLike,
                    qubits: Sequence[int] | None = None) -> float:
    """p-value of Pearson's test of observed counts against probabilities.

    Args:
        counts: histogram or dense vector of counts.
        expected: expected probabilities (same length as the count vector).
        qubits: if given with a histogram, compare the register marginal.
    Returns:
        the p-value; outcomes with zero expected probability must be unobserved.
    """
    if isinstance(counts, ShotCounts):
        observed = (counts.register_counts(qubits) if qubits is not None
                    else np.round(counts.frequencies()*counts.shots))
    else:
        observed = np.asarray(counts, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    if observed.shape != expected.shape:
        raise ValueError(f"{observed.shape} counts against {expected.shape} "
                         "probabilities")
    support = expected > 0
    if np.any(observed[~support] > 0):
        return 0.
    total = observed.sum()
    result = stats.chisquare(observed[support], total*expected[support]/
                             expected[support].sum())
    return float(result.pvalue)


def to_dict(state: StateVector) -> Dict:
    amps = np.asarray(state.amplitudes)
    return {"n": state.n,
            "amplitudes": [[i, float(a.real), float(a.imag)]
                           for i, a in enumerate(amps)]}


def dump_state(state: StateVector, path: str) -> None:
    """Writes (index, re, im) triplets to a JSON file for debugging."""
    with open(path, "w") as f:
        json.dump(to_dict(state), f)
