import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np
import numpy.typing as npt

from stochqaoa.encoding import layout as lay
from stochqaoa.encoding import qubo as qb
from stochqaoa.errors import EncodingError
from stochqaoa.math import spmm

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitIsing:
    """Ising form H = -1/2 sum_ij J_ij s_i s_j - sum_i h_i(p) s_i + const(p), with the
    fields split as h_i(p) = h0_i + sum_t c_ti p_t.

    Spins follow x = (1 - s)/2, so x = 0 <-> s = +1 (eigenvalue of Z on |0>).

    Args:
        num_spins: number of decision spins n_d.
        couplings: symmetric map (i, j) -> J_ij without diagonal entries.
        h0: scenario-independent fields (n_d,).
        scenario_coupling: coefficients c (T, n_d) of p_t in the fields.
        constant0: scenario-independent energy offset.
        p_linear: coefficients (T,) of p_t in the scenario constant.
        p_quadratic: coefficients (T,) of p_t^2 in the scenario constant.
    """
    num_spins: int
    couplings: Dict[Tuple[int, int], float]
    h0: npt.NDArray
    scenario_coupling: npt.NDArray
    constant0: float
    p_linear: npt.NDArray
    p_quadratic: npt.NDArray

    @property
    def horizon(self) -> int:
        return self.scenario_coupling.shape[0]

    def fields(self, p: npt.ArrayLike) -> npt.NDArray:
        """h(p) for a scenario (T,) or a batch of scenarios (N, T)."""
        return self.h0 + np.asarray(p, dtype=np.float64) @ self.scenario_coupling

    def scenario_constant(self, p: npt.ArrayLike) -> npt.NDArray | float:
        p = np.asarray(p, dtype=np.float64)
        return p @ self.p_linear + (p**2) @ self.p_quadratic

    def pairs(self) -> Dict[Tuple[int, int], float]:
        """Couplings restricted to i < j."""
        return {(i, j): v for (i, j), v in sorted(self.couplings.items()) if i < j}

    def coupling_coo(self) -> spmm.COO:
        items = sorted(self.couplings.items())
        rows = np.array([i for (i, _), _ in items], dtype=np.int64)
        cols = np.array([j for (_, j), _ in items], dtype=np.int64)
        vals = np.array([v for _, v in items], dtype=np.float64)
        return rows, cols, vals

    def to_dict(self) -> Dict[str, Any]:
        return {
            "num_spins": self.num_spins,
            "couplings": [[i, j, v] for (i, j), v in self.pairs().items()],
            "scenario_dependent_couplings": [],
            "fields": [[i, float(v)] for i, v in enumerate(self.h0)],
            "scenario_couplings": [[t, i, float(self.scenario_coupling[t, i])]
                                   for t in range(self.horizon)
                                   for i in range(self.num_spins)
                                   if self.scenario_coupling[t, i] != 0.],
            "constant": self.constant0,
            "scenario_constant": {"linear": self.p_linear.tolist(),
                                  "quadratic": self.p_quadratic.tolist()},
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def qubo_to_split_ising(qubo: qb.ScenarioQubo, layout: lay.QubitLayout) -> SplitIsing:
    """Substitutes x = (1 - s)/2 in a scenario QUBO.

    Args:
        qubo: scenario QUBO of degree <= 2 in the decision bits and <= 1 in p in
            front of decision bits.
        layout: the qubit layout (defines the number of spins).
    Returns:
        the split Ising model; p only enters the fields and the constants.
    """
    n, T = layout.n_d, qubo.horizon
    couplings: Dict[Tuple[int, int], float] = {}
    h0 = np.zeros(n)
    c = np.zeros((T, n))
    p_linear = np.zeros(T)
    p_quadratic = np.zeros(T)
    constant = 0.

    for key, coeff in qubo.terms.items():
        xs = [v.index for v in key if v.kind == "x"]
        ps = [v.index for v in key if v.kind == "p"]
        if len(xs) == 2 and xs[0] == xs[1]:
            xs = xs[:1]
        if len(xs) >= 2 and ps:
            raise EncodingError(f"p-dependent quadratic decision term {key}")
        if len(xs) > 2 or len(ps) > 2 or (xs and len(ps) > 1):
            raise EncodingError(f"term {key} exceeds the supported degree")

        if not xs:
            if not ps:
                constant += coeff
            elif len(ps) == 1:
                p_linear[ps[0]] += coeff
            elif ps[0] == ps[1]:
                p_quadratic[ps[0]] += coeff
            else:
                raise EncodingError(f"cross-timestep scenario term {key}")
        elif len(xs) == 1:
            i = xs[0]
            if ps:
                # c*p*x = c*p/2 - (c*p/2)*s
                c[ps[0], i] += coeff/2
                p_linear[ps[0]] += coeff/2
            else:
                h0[i] += coeff/2
                constant += coeff/2
        else:
            i, j = xs
            # c*x_i*x_j = c/4*(1 - s_i - s_j + s_i*s_j)
            constant += coeff/4
            h0[i] += coeff/4
            h0[j] += coeff/4
            couplings[(i, j)] = couplings.get((i, j), 0.) - coeff/4
            couplings[(j, i)] = couplings.get((j, i), 0.) - coeff/4

    couplings = {k: v for k, v in couplings.items() if v != 0.}
    assert all(i != j for i, j in couplings)
    _logger.debug("split Ising: %d couplings, %d scenario couplings",
                  len(couplings)//2, int(np.count_nonzero(c)))
    return SplitIsing(num_spins=n, couplings=couplings, h0=h0, scenario_coupling=c,
                      constant0=constant, p_linear=p_linear, p_quadratic=p_quadratic)


def spins_from_bits(bits: npt.ArrayLike) -> npt.NDArray:
    """s = 1 - 2x."""
    return 1. - 2.*np.asarray(bits, dtype=np.float64)


def ising_energy(model: SplitIsing, spins: npt.ArrayLike,
                 p: npt.ArrayLike) -> npt.NDArray:
    """Energies of spin configurations (N, n_d) under scenarios (N, T) or (T,),
    including the scenario-independent and scenario constants."""
    spins = np.atleast_2d(np.asarray(spins, dtype=np.float64))
    p = np.broadcast_to(np.asarray(p, dtype=np.float64),
                        (spins.shape[0], model.horizon))
    quad = np.asarray(spmm.quadratic_form(model.coupling_coo(), spins.T,
                                          model.num_spins))
    linear = np.sum(model.fields(p) * spins, axis=1)
    return -0.5*quad - linear + model.constant0 + model.scenario_constant(p)
