import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, NamedTuple, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from stochqaoa.encoding import layout as lay
from stochqaoa.model import instance as inst

_logger = logging.getLogger(__name__)

# default weight of the balance penalty lambda*(j - buy + sell - p)^2
DEFAULT_PENALTY = 1.

# largest decision register enumerated by the build-time penalty check
DOMINANCE_CHECK_MAX_QUBITS = 16


class Var(NamedTuple):
    """Symbol of a QUBO term: a decision bit ("x", qubit) or a PV surplus ("p", t).
    """
    kind: str
    index: int

    def __str__(self) -> str:
        return f"{self.kind}{self.index}"


Term = Tuple[Var, ...]


@dataclass(frozen=True)
class ScenarioQubo:
    """QUBO over the decision bits whose coefficients depend on the PV surplus.

    Terms are products of symbols keyed by sorted tuples of `Var`; the surplus
    p_t is kept symbolic and enters at most linearly in front of a decision bit,
    plus the scenario constants p_t and p_t^2.

    Args:
        num_vars: number of decision bits n_d.
        horizon: number of timesteps T.
        terms: coefficient of every monomial.
        penalty: weight of the balance penalty used to build the terms.
    """
    num_vars: int
    horizon: int
    terms: Dict[Term, float]
    penalty: float = DEFAULT_PENALTY

    def iter_terms(self) -> Iterator[Tuple[Term, float]]:
        """Non-zero terms ordered by degree, then by symbols."""
        for key in sorted(self.terms, key=lambda k: (len(k), k)):
            if self.terms[key] != 0.:
                yield key, self.terms[key]

    def describe(self) -> str:
        lines = []
        for key, coeff in self.iter_terms():
            monomial = "*".join(str(v) for v in key) if key else "1"
            lines.append(f"{coeff:+.12g} {monomial}")
        return "\n".join(lines)

    @cached_property
    def arrays(self) -> Dict[str, npt.NDArray | float]:
        """Dense coefficient arrays: linear (n_d,), upper-triangular quadratic
        (n_d, n_d), scenario_linear (T, n_d), constant, p_linear (T,) and
        p_quadratic (T,)."""
        n, T = self.num_vars, self.horizon
        linear = np.zeros(n)
        quadratic = np.zeros((n, n))
        scenario_linear = np.zeros((T, n))
        p_linear = np.zeros(T)
        p_quadratic = np.zeros(T)
        constant = 0.
        for key, coeff in self.terms.items():
            xs = [v.index for v in key if v.kind == "x"]
            ps = [v.index for v in key if v.kind == "p"]
            if not xs and not ps:
                constant += coeff
            elif len(xs) == 1 and not ps:
                linear[xs[0]] += coeff
            elif len(xs) == 2 and not ps:
                i, k = sorted(xs)
                if i == k:
                    linear[i] += coeff
                else:
                    quadratic[i, k] += coeff
            elif len(xs) == 1 and len(ps) == 1:
                scenario_linear[ps[0], xs[0]] += coeff
            elif not xs and len(ps) == 1:
                p_linear[ps[0]] += coeff
            elif not xs and len(ps) == 2 and ps[0] == ps[1]:
                p_quadratic[ps[0]] += coeff
            else:
                raise ValueError(f"term {key} not representable in a scenario QUBO")
        return {"linear": linear, "quadratic": quadratic,
                "scenario_linear": scenario_linear, "constant": constant,
                "p_linear": p_linear, "p_quadratic": p_quadratic}

    def scenario_constant(self, p: npt.ArrayLike) -> npt.NDArray | float:
        """Part of the energy depending on p only (broadcast over leading axes)."""
        p = np.asarray(p, dtype=np.float64)
        a = self.arrays
        return p @ a["p_linear"] + (p**2) @ a["p_quadratic"]

    def energy(self, x: npt.ArrayLike, p: npt.ArrayLike) -> npt.NDArray | float:
        """QUBO energy of decision bits x (n_d,) or (N, n_d) under surplus p (T,) or
        (N, T)."""
        x = np.asarray(x, dtype=np.float64)
        p = np.asarray(p, dtype=np.float64)
        a = self.arrays
        value = (x @ a["linear"] + np.sum((x @ a["quadratic"]) * x, axis=-1)
                 + np.sum((p @ a["scenario_linear"]) * x, axis=-1))
        return value + a["constant"] + self.scenario_constant(p)


def _add(terms: Dict[Term, float], key: Sequence[Var], coeff: float) -> None:
    key = tuple(sorted(key))
    terms[key] = terms.get(key, 0.) + coeff


def build_qubo(instance: inst.InstanceSpec, penalty: float = DEFAULT_PENALTY,
               layout: lay.QubitLayout | None = None,
               check: bool = True) -> ScenarioQubo:
    """Penalty QUBO of the recourse problem with a symbolic PV surplus.

    For every timestep the energy is
        -ev*j_t + buy*buy_t - sell*sell_t + penalty*(j_t - buy_t + sell_t - p_t)^2
    expanded over the binary encodings of j_t, buy_t and sell_t. Bounds on j_t
    come from the encoding; complementarity of buy_t and sell_t is not encoded.

    Args:
        instance: a valid instance.
        penalty: weight of the balance penalty (> 0).
        layout: qubit layout (built from the instance if None).
        check: run the penalty-dominance enumeration on desk-scale instances.
    Returns:
        the scenario-parameterized QUBO.
    """
    if not penalty > 0:
        raise ValueError(f"penalty weight must be > 0, got {penalty}")
    if layout is None:
        layout = lay.build_layout(instance)
    prices = instance.prices
    lam = float(penalty)
    terms: Dict[Term, float] = {}
    for t in range(instance.horizon):
        jo = instance.j_vars[t].offset
        # (qubit, weight in the balance, price coefficient)
        bits = ([(q, 2**k, -prices.ev_price*2**k)
                 for k, q in enumerate(layout.j_bits[t])]
                + [(q, -2**k, prices.intraday_buy*2**k)
                   for k, q in enumerate(layout.buy_bits[t])]
                + [(q, 2**k, -prices.intraday_sell*2**k)
                   for k, q in enumerate(layout.sell_bits[t])])
        pt = Var("p", t)
        for a, (qa, wa, ca) in enumerate(bits):
            xa = Var("x", qa)
            _add(terms, (xa,), ca + lam*(wa*wa + 2*jo*wa))
            _add(terms, (xa, pt), -2*lam*wa)
            for qb, wb, _ in bits[a + 1:]:
                _add(terms, (xa, Var("x", qb)), 2*lam*wa*wb)
        _add(terms, (), -prices.ev_price*jo + lam*jo*jo)
        _add(terms, (pt,), -2*lam*jo)
        _add(terms, (pt, pt), lam)

    qubo = ScenarioQubo(num_vars=layout.n_d, horizon=instance.horizon, terms=terms,
                        penalty=lam)
    if check and layout.n_d <= DOMINANCE_CHECK_MAX_QUBITS:
        if not penalty_dominates(qubo, layout, instance):
            _logger.warning("penalty weight %g too small: some scenario QUBO minimum "
                            "violates the energy balance", lam)
        else:
            _logger.debug("penalty weight %g dominates on every scenario", lam)
    return qubo


def decision_bits(bits: Sequence[int] | npt.NDArray,
                  layout: lay.QubitLayout) -> npt.NDArray:
    """Decision part (first n_d qubits) of full bitstrings."""
    return np.asarray(bits)[..., :layout.n_d]


def qubo_energy(qubo: ScenarioQubo, layout: lay.QubitLayout,
                instance: inst.InstanceSpec,
                assignment: lay.Decoded | int | Sequence[int],
                p: Sequence[int] | None = None) -> float:
    """Energy of one assignment under one scenario.

    Args:
        qubo: the scenario QUBO.
        layout: the qubit layout.
        instance: the instance.
        assignment: decoded integers (j, buy, sell, p) or a full bitstring (basis
            index or bits indexed by qubit).
        p: scenario overriding the one carried by the assignment.
    Returns:
        the scenario-instantiated QUBO energy.
    """
    if isinstance(assignment, lay.Decoded):
        values = assignment
    else:
        values = lay.decode(assignment, layout, instance)
    if p is None:
        p = values.p
    bits = lay.encode(values.j, values.buy, values.sell,
                      [d.offset for d in instance.p_dists], layout, instance)
    return float(qubo.energy(decision_bits(bits, layout), p))


def penalty_dominates(qubo: ScenarioQubo, layout: lay.QubitLayout,
                      instance: inst.InstanceSpec) -> bool:
    """Whether, for every scenario, all the QUBO minimizers balance energy.

    Enumerates all the 2^n_d decision bitstrings, so it is meant for desk-scale
    instances only.
    """
    table = lay.bit_table(layout.n_d)
    j = np.stack([instance.j_vars[t].offset + lay.register_values(table, r)
                  for t, r in enumerate(layout.j_bits)], axis=1)
    buy = np.stack([lay.register_values(table, r) for r in layout.buy_bits], axis=1)
    sell = np.stack([lay.register_values(table, r) for r in layout.sell_bits], axis=1)
    for p_vec, _ in inst.joint_scenarios(instance):
        energies = qubo.energy(table, np.broadcast_to(p_vec, (len(table), len(p_vec))))
        argmins = energies <= energies.min() + 1e-9
        balanced = np.all(j - buy + sell == np.asarray(p_vec)[None, :], axis=1)
        if not np.all(balanced[argmins]):
            return False
    return True
