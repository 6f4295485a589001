from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from stochqaoa.model import instance as inst


@dataclass(frozen=True)
class Decoded:
    """Integer values carried by a full bitstring."""
    j: Tuple[int, ...]
    buy: Tuple[int, ...]
    sell: Tuple[int, ...]
    p: Tuple[int, ...]


@dataclass(frozen=True)
class QubitLayout:
    """Assignment of qubits to the binary digits of every variable.

    The decision register [0, n_d) holds, timestep after timestep, the bits of
    j_t, buy_t and sell_t; the scenario register [n_d, n_d + n_s) holds the
    registers of p_t. Within a variable, bit k has weight 2^k (LSB first).

    Attributes:
        j_bits: per-timestep qubit ranges of j_t.
        buy_bits: per-timestep qubit ranges of buy_t.
        sell_bits: per-timestep qubit ranges of sell_t.
        p_bits: per-timestep qubit ranges of the scenario registers.
        n_d: number of decision qubits.
        n_s: number of scenario qubits.
    """
    j_bits: Tuple[range, ...]
    buy_bits: Tuple[range, ...]
    sell_bits: Tuple[range, ...]
    p_bits: Tuple[range, ...]
    n_d: int
    n_s: int

    @property
    def n_qubits(self) -> int:
        return self.n_d + self.n_s

    @property
    def horizon(self) -> int:
        return len(self.j_bits)

    def decision_qubits(self) -> range:
        return range(self.n_d)

    def scenario_qubits(self) -> range:
        return range(self.n_d, self.n_d + self.n_s)

    def describe(self) -> str:
        """One-line summary, e.g. "8 qubits: j[0..1] buy[2..3] sell[4..5] p[6..7]"."""
        def fmt(name, r):
            if len(r) == 0:
                return f"{name}[]"
            return f"{name}[{r.start}..{r.stop - 1}]"

        parts = []
        suffix = (lambda t: "") if self.horizon == 1 else str
        for t in range(self.horizon):
            parts += [fmt("j" + suffix(t), self.j_bits[t]),
                      fmt("buy" + suffix(t), self.buy_bits[t]),
                      fmt("sell" + suffix(t), self.sell_bits[t])]
        parts += [fmt("p" + suffix(t), self.p_bits[t]) for t in range(self.horizon)]
        return f"{self.n_qubits} qubits: " + " ".join(parts)


def build_layout(instance: inst.InstanceSpec) -> QubitLayout:
    """Lays out the decision and scenario registers of an instance.

    Args:
        instance: a valid instance.
    Returns:
        the qubit layout.
    """
    inst.ensure_valid(instance)
    j_bits, buy_bits, sell_bits, p_bits = [], [], [], []
    pos = 0
    for var in instance.j_vars:
        j_bits.append(range(pos, pos + var.bit_width))
        pos += var.bit_width
        buy_bits.append(range(pos, pos + instance.recourse_bit_width))
        pos += instance.recourse_bit_width
        sell_bits.append(range(pos, pos + instance.recourse_bit_width))
        pos += instance.recourse_bit_width
    n_d = pos
    for dist in instance.p_dists:
        p_bits.append(range(pos, pos + dist.register_bits))
        pos += dist.register_bits
    return QubitLayout(tuple(j_bits), tuple(buy_bits), tuple(sell_bits),
                       tuple(p_bits), n_d=n_d, n_s=pos - n_d)


def _bits_of(bitstring: int | Sequence[int], n: int) -> List[int]:
    if isinstance(bitstring, (int, np.integer)):
        return [(int(bitstring) >> k) & 1 for k in range(n)]
    bits = [int(b) for b in bitstring]
    if len(bits) != n:
        raise ValueError(f"bitstring has {len(bits)} bits, layout has {n} qubits")
    return bits


def _register_value(bits: Sequence[int], qubits: range) -> int:
    return sum(bits[q] << k for k, q in enumerate(qubits))


def decode(bitstring: int | Sequence[int], layout: QubitLayout,
           instance: inst.InstanceSpec) -> Decoded:
    """Integer values of all the variables encoded by a full bitstring.

    Args:
        bitstring: basis-state index (bit k = qubit k) or sequence of bits indexed
            by qubit.
        layout: qubit layout of the instance.
        instance: the instance (for the offsets).
    Returns:
        the decoded j, buy, sell and p vectors.
    """
    bits = _bits_of(bitstring, layout.n_qubits)
    T = layout.horizon
    j = tuple(instance.j_vars[t].offset + _register_value(bits, layout.j_bits[t])
              for t in range(T))
    buy = tuple(_register_value(bits, layout.buy_bits[t]) for t in range(T))
    sell = tuple(_register_value(bits, layout.sell_bits[t]) for t in range(T))
    p = tuple(instance.p_dists[t].offset + _register_value(bits, layout.p_bits[t])
              for t in range(T))
    return Decoded(j, buy, sell, p)


def encode(j: Sequence[int], buy: Sequence[int], sell: Sequence[int],
           p: Sequence[int], layout: QubitLayout,
           instance: inst.InstanceSpec) -> Tuple[int, ...]:
    """Inverse of `decode`: bits (indexed by qubit) of in-range integer values."""
    bits = [0]*layout.n_qubits

    def put(value, qubits, name):
        if not 0 <= value < 2**len(qubits):
            raise ValueError(f"{name} = {value} not representable on "
                             f"{len(qubits)} bits")
        for k, q in enumerate(qubits):
            bits[q] = (value >> k) & 1

    for t in range(layout.horizon):
        put(j[t] - instance.j_vars[t].offset, layout.j_bits[t], f"j[{t}]")
        put(buy[t], layout.buy_bits[t], f"buy[{t}]")
        put(sell[t], layout.sell_bits[t], f"sell[{t}]")
        put(p[t] - instance.p_dists[t].offset, layout.p_bits[t], f"p[{t}]")
    return tuple(bits)


def bit_table(n: int) -> npt.NDArray:
    """Matrix (2^n, n) whose row z holds the bits of the basis index z."""
    idx = np.arange(2**n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(
        np.int8)


def register_values(bits: npt.NDArray, qubits: range) -> npt.NDArray:
    """Vectorized `_register_value` over the rows of a bit table."""
    weights = 2**np.arange(len(qubits), dtype=np.int64)
    return bits[:, list(qubits)].astype(np.int64) @ weights
