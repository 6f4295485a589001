import json
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np
import numpy.typing as npt

from stochqaoa.encoding import ising as isg
from stochqaoa.encoding import layout as lay
from stochqaoa.encoding import qubo as qb
from stochqaoa.math.opt import solvers
from stochqaoa.model import instance as inst
from stochqaoa.qaoa import circuit as cir
from stochqaoa.qaoa.config import EvalMode, QaoaConfig
from stochqaoa.qaoa.schedules import init_params
from stochqaoa.sim import statevector as sv

_logger = logging.getLogger(__name__)

# probability gap below which two j-vectors count as equally likely
TIE_TOL = 1e-12

IntVec = Tuple[int, ...]


def _key(v: IntVec) -> str:
    return ";".join(str(x) for x in v)


@dataclass
class RunResult:
    """Outcome of one optimized stochastic QAOA run.

    Attributes:
        best_params: best (gammas, betas) found.
        best_expectation: objective value at best_params.
        cost_trace: objective value of every evaluation, in order.
        decision_marginal: probability of every decoded j-vector in the final state.
        modal_j: most probable j-vector (lexicographically smallest on ties).
        conditional_marginals: j-vector distribution given each scenario.
        scenario_marginal: measured distribution of the scenario register.
        feasibility_report: balance and complementarity of the most probable
            bitstring of every scenario branch.
        evaluations: number of objective evaluations.
        seed: seed of the run.
        layers: circuit depth.
        termination: why the optimizer stopped.
        shot_histogram: final-state shot counts (sampled mode only).
        wall_time: run duration in seconds.
    """
    best_params: Tuple[List[float], List[float]]
    best_expectation: float
    cost_trace: List[float]
    decision_marginal: Dict[IntVec, float]
    modal_j: IntVec
    conditional_marginals: Dict[IntVec, Dict[IntVec, float]]
    scenario_marginal: Dict[IntVec, float]
    feasibility_report: List[Dict[str, Any]]
    evaluations: int
    seed: int
    layers: int
    termination: str = ""
    shot_histogram: Dict[str, int] | None = None
    wall_time: float | None = field(default=None, compare=False)

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        d: Dict[str, Any] = {
            "layers": self.layers,
            "seed": self.seed,
            "best_params": {"gammas": list(self.best_params[0]),
                            "betas": list(self.best_params[1])},
            "best_expectation": self.best_expectation,
            "modal_j": list(self.modal_j),
            "decision_marginal": {_key(j): p for j, p in
                                  sorted(self.decision_marginal.items())},
            "conditional_marginals": {
                _key(s): {_key(j): p for j, p in sorted(m.items())}
                for s, m in sorted(self.conditional_marginals.items())},
            "scenario_marginal": {_key(s): p for s, p in
                                  sorted(self.scenario_marginal.items())},
            "feasibility_report": self.feasibility_report,
            "evaluations": self.evaluations,
            "termination": self.termination,
            "cost_trace": self.cost_trace,
        }
        if self.shot_histogram is not None:
            d["shot_histogram"] = self.shot_histogram
        if include_timing:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, indent: int | None = 2, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=indent)


def modal(marginal: Dict[IntVec, float]) -> IntVec:
    """Most probable key, lexicographically smallest among ties."""
    top = max(marginal.values())
    return min(k for k, p in marginal.items() if p >= top - TIE_TOL)


class StochasticQaoa():
    """Stochastic QAOA of an instance: circuit, objective and measurement.

    Args:
        instance: a valid instance.
        config: run settings (penalty, evaluation mode, shots, seed...).
    """

    def __init__(self, instance: inst.InstanceSpec, config: QaoaConfig):
        inst.ensure_valid(instance)
        self.instance = instance
        self.config = config
        self.layout = lay.build_layout(instance)
        self.qubo = qb.build_qubo(instance, config.penalty, self.layout)
        self.model = isg.qubo_to_split_ising(self.qubo, self.layout)
        self.ansatz = cir.compile_ansatz(self.model, self.layout, instance)
        self.rng = np.random.default_rng(config.seed)

        n_d = self.layout.n_d
        table = lay.bit_table(self.layout.n_qubits)
        self.j_values = np.stack(
            [instance.j_vars[t].offset + lay.register_values(table, r)
             for t, r in enumerate(self.layout.j_bits)], axis=1)
        self.buy_values = np.stack([lay.register_values(table, r)
                                    for r in self.layout.buy_bits], axis=1)
        self.sell_values = np.stack([lay.register_values(table, r)
                                     for r in self.layout.sell_bits], axis=1)
        self.p_values = np.stack(
            [instance.p_dists[t].offset + lay.register_values(table, r)
             for t, r in enumerate(self.layout.p_bits)], axis=1)
        # full QUBO energy (scenario constants included) of every basis state
        self.cost = np.asarray(self.qubo.energy(table[:, :n_d], self.p_values))
        _logger.debug("%s, %d scenario couplings", self.layout.describe(),
                      int(np.count_nonzero(self.model.scenario_coupling)))

    def split(self, params: npt.ArrayLike) -> Tuple[npt.NDArray, npt.NDArray]:
        params = np.asarray(params, dtype=np.float64)
        p = len(params)//2
        if len(params) != 2*p or p < 1:
            raise ValueError(f"expected 2*layers parameters, got {len(params)}")
        return params[:p], params[p:]

    def final_state(self, params: npt.ArrayLike) -> sv.StateVector:
        gammas, betas = self.split(params)
        return sv.StateVector(self.ansatz(gammas, betas), self.layout.n_qubits)

    def circuit(self, params: npt.ArrayLike) -> List[cir.Gate]:
        gammas, betas = self.split(params)
        return cir.build_circuit(self.model, self.layout, self.instance, gammas,
                                 betas)

    def objective(self, params: npt.ArrayLike) -> float:
        """Expected QUBO energy over scenarios and measured decisions.

        Exact mode: the weighted sum over the final-state probabilities; sampled
        mode: the average over config.shots measurements, each one yielding a
        scenario and a decision.
        """
        state = self.final_state(params)
        if self.config.eval_mode == EvalMode.exact:
            return sv.expectation_diagonal(state, self.cost)
        counts = sv.sample(state, self.config.shots, self.rng)
        z = np.fromiter(counts.counts.keys(), dtype=np.int64)
        c = np.fromiter(counts.counts.values(), dtype=np.float64)
        return float(np.dot(c, self.cost[z])/counts.shots)

    def _scenario_index(self) -> Tuple[npt.NDArray, npt.NDArray]:
        """Distinct scenario vectors and the scenario of every basis state."""
        return np.unique(self.p_values, axis=0, return_inverse=True)

    def conditional_expectations(self, params: npt.ArrayLike
                                 ) -> List[Tuple[IntVec, float, float]]:
        """(scenario, probability, conditional expectation) of every branch with
        nonzero probability; the probability-weighted sum equals the objective."""
        probs = np.asarray(sv.probabilities(self.final_state(params)))
        scenarios, which = self._scenario_index()
        which = which.reshape(-1)
        out = []
        for s, p_vec in enumerate(scenarios):
            mask = which == s
            mass = probs[mask].sum()
            if mass > 0:
                out.append((tuple(int(v) for v in p_vec), float(mass),
                            float(np.dot(probs[mask], self.cost[mask])/mass)))
        return out

    def _marginal(self, probs: npt.NDArray,
                  values: npt.NDArray) -> Dict[IntVec, float]:
        keys, inv = np.unique(values, axis=0, return_inverse=True)
        mass = np.bincount(inv.reshape(-1), weights=probs, minlength=len(keys))
        return {tuple(int(v) for v in k): float(m) for k, m in zip(keys, mass)}

    def decision_marginal(self, probs: npt.NDArray) -> Dict[IntVec, float]:
        """Distribution of j, summing out buy/sell and the scenario register."""
        return self._marginal(probs, self.j_values)

    def scenario_marginal(self, probs: npt.NDArray) -> Dict[IntVec, float]:
        return {s: p for s, p in self._marginal(probs, self.p_values).items()
                if p > 0}

    def conditional_marginals(self, probs: npt.NDArray
                              ) -> Dict[IntVec, Dict[IntVec, float]]:
        scenarios, which = self._scenario_index()
        which = which.reshape(-1)
        out = {}
        for s, p_vec in enumerate(scenarios):
            mask = which == s
            mass = probs[mask].sum()
            if mass > 0:
                out[tuple(int(v) for v in p_vec)] = {
                    j: m/mass for j, m in
                    self._marginal(probs[mask], self.j_values[mask]).items()}
        return out

    def feasibility_report(self, probs: npt.NDArray) -> List[Dict[str, Any]]:
        """Balance and complementarity of the modal bitstring of every branch."""
        scenarios, which = self._scenario_index()
        which = which.reshape(-1)
        report = []
        for s, p_vec in enumerate(scenarios):
            mask = np.flatnonzero(which == s)
            if probs[mask].sum() <= 0:
                continue
            z = int(mask[np.argmax(probs[mask])])
            j, buy, sell = self.j_values[z], self.buy_values[z], self.sell_values[z]
            report.append({
                "scenario": [int(v) for v in p_vec],
                "bitstring": format(z, f"0{self.layout.n_qubits}b"),
                "probability": float(probs[z]),
                "j": j.tolist(), "buy": buy.tolist(), "sell": sell.tolist(),
                "balanced": bool(np.all(j - buy + sell == p_vec)),
                "complementary": bool(np.all(buy*sell == 0)),
            })
        return report

    def optimize(self) -> RunResult:
        """Runs the configured optimizer from the configured initial angles."""
        cfg = self.config
        start = time.perf_counter()
        init_rng = np.random.default_rng(cfg.seed)
        gammas, betas = init_params(cfg.init_strategy, cfg.layers, init_rng,
                                    cfg.gamma_max, cfg.beta_max)
        x0 = np.concatenate((gammas, betas))
        prb = solvers.OptimizationProblem(dim=len(x0), objfun=self.objective,
                                          solver_lib=cfg.solver_lib,
                                          max_evaluations=cfg.max_evaluations,
                                          tol=cfg.tol, seed=cfg.seed)
        _logger.info("optimizing %d layers with %s (seed %d)", cfg.layers,
                     cfg.optimizer.name, cfg.seed)
        best = prb.solve(x0, algo=cfg.optimizer.name)

        state = self.final_state(best)
        if cfg.eval_mode == EvalMode.exact:
            probs = np.asarray(sv.probabilities(state))
            histogram = None
        else:
            counts = sv.sample(state, cfg.shots, self.rng)
            probs = counts.frequencies()
            histogram = counts.bitstrings()
        marginal = self.decision_marginal(probs)
        g, b = self.split(best)
        return RunResult(
            best_params=(g.tolist(), b.tolist()),
            best_expectation=float(prb.best_value),
            cost_trace=list(prb.cost_trace),
            decision_marginal=marginal,
            modal_j=modal(marginal),
            conditional_marginals=self.conditional_marginals(probs),
            scenario_marginal=self.scenario_marginal(probs),
            feasibility_report=self.feasibility_report(probs),
            evaluations=prb.evaluations,
            seed=cfg.seed,
            layers=cfg.layers,
            termination=prb.last_opt_result,
            shot_histogram=histogram,
            wall_time=time.perf_counter() - start)


def objective(params: npt.ArrayLike, config: QaoaConfig,
              instance: inst.InstanceSpec) -> float:
    return StochasticQaoa(instance, config).objective(params)


def optimize(config: QaoaConfig, instance: inst.InstanceSpec) -> RunResult:
    return StochasticQaoa(instance, config).optimize()
