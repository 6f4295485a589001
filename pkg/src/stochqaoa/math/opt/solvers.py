import logging
import math
from typing import Callable, Dict, List

import numpy as np
import numpy.typing as npt
from jax import Array
from scipy.optimize import minimize
from typeguard import check_type

from stochqaoa.errors import OptimizerDivergenceError

_logger = logging.getLogger(__name__)

ObjValue = float | np.float32 | np.float64 | npt.NDArray | Array


class _BudgetExhausted(Exception):
    pass


class _Converged(Exception):
    pass


class OptimizationProblem():
    """Gradient-free minimization of a (noisy or exact) scalar objective with
    best-so-far bookkeeping.

    Every objective evaluation goes through `evaluate`, which records the cost
    trace, keeps the best point, enforces the evaluation budget and rejects
    non-finite values. Nelder-Mead stops when both the spread of the simplex
    vertices and the spread of their values fall below `tol`, COBYLA when its trust
    radius shrinks to `tol`, SPSA when the best value improves by less than `tol`
    (relative) over 2*dim consecutive iterations. The Nelder-Mead simplex spans
    `simplex_step` along every axis, with directions drawn from `seed`.

    Args:
        dim: dimension of the parameters array.
        objfun: objective function. Its arguments must be the parameters array and
            the extra keyword arguments set with `set_obj_args`.
        solver_lib: "scipy" or "pygmo".
        max_evaluations: evaluation budget (>= 1).
        tol: convergence tolerance of the chosen algorithm.
        seed: seed of SPSA and of the Nelder-Mead simplex directions (all
            positive when None).
        simplex_step: edge length of the initial Nelder-Mead simplex.
    """

    def __init__(self, dim: int, objfun: Callable[..., ObjValue],
                 solver_lib: str = "scipy", max_evaluations: int = 1000,
                 tol: float = 1e-6, seed: int | None = None,
                 simplex_step: float = 0.1):
        if max_evaluations < 1:
            raise ValueError("the evaluation budget must be >= 1")
        self.dim = dim
        self.obj = objfun
        self.obj_args: Dict = {}
        self.max_evaluations = max_evaluations
        self.tol = tol
        self.seed = seed
        self.simplex_step = simplex_step
        self.solver_lib = solver_lib

        if solver_lib == "scipy":
            self.solver: OptimizationSolver = ScipySolver(self)
        elif solver_lib == "pygmo":
            self.solver = PygmoSolver(self)
        else:
            raise ValueError(f"unknown solver library {solver_lib!r}")

        self.reset()

    def reset(self) -> None:
        self.cost_trace: List[float] = []
        self.best_x: npt.NDArray | None = None
        self.best_value = math.inf
        self._best_per_iteration: List[float] = []
        self.last_opt_result = "not run"

    @property
    def evaluations(self) -> int:
        return len(self.cost_trace)

    def set_obj_args(self, args: Dict) -> None:
        """Sets the additional arguments to be passed to the objective function."""
        check_type(args, Dict)
        self.obj_args = args

    def evaluate(self, x: npt.ArrayLike) -> float:
        if self.evaluations >= self.max_evaluations:
            raise _BudgetExhausted
        x = np.array(x, dtype=np.float64)
        value = self.obj(x, **self.obj_args)
        check_type(value, ObjValue)
        value = float(value)
        if not math.isfinite(value):
            raise OptimizerDivergenceError(
                f"objective returned {value} at evaluation {self.evaluations + 1}")
        self.cost_trace.append(value)
        if value < self.best_value:
            self.best_value = value
            self.best_x = x
        _logger.debug("evaluation %d: %.12g", self.evaluations, value)
        return value

    def end_iteration(self, *_) -> None:
        """Applies the stall rule; called by SPSA after every iteration."""
        history = self._best_per_iteration
        history.append(self.best_value)
        window = 2*self.dim
        if len(history) > window:
            old, new = history[-window - 1], history[-1]
            if old - new <= self.tol*max(abs(old), 1e-300):
                raise _Converged

    def solve(self, x0: npt.ArrayLike, algo: str = "nelder_mead") -> npt.NDArray:
        """Minimizes the objective from x0.

        Args:
            x0: initial parameters (always the first evaluated point).
            algo: "nelder_mead", "cobyla", "spsa" or, with pygmo, any NLopt
                algorithm name.
        Returns:
            the best parameters found (best-so-far when the budget runs out).
        """
        self.reset()
        x0 = np.asarray(x0, dtype=np.float64)
        check_type(x0, npt.NDArray)
        solver = SPSASolver(self) if algo == "spsa" else self.solver
        self.last_opt_result = "converged"
        try:
            solver.run(x0, algo)
            if self.evaluations >= self.max_evaluations:
                raise _BudgetExhausted
        except _Converged:
            pass
        except _BudgetExhausted:
            self.last_opt_result = "budget exhausted"
            _logger.warning("evaluation budget of %d exhausted before convergence",
                            self.max_evaluations)
        assert self.best_x is not None
        _logger.info("%s: %s after %d evaluations, best %.12g", algo,
                     self.last_opt_result, self.evaluations, self.best_value)
        return self.best_x


class OptimizationSolver():
    def __init__(self, prb: OptimizationProblem):
        self.prb = prb

    def run(self, x0: npt.NDArray, algo: str) -> None:
        raise NotImplementedError


class ScipySolver(OptimizationSolver):
    ALGOS = {"nelder_mead": "Nelder-Mead", "cobyla": "COBYLA"}

    def run(self, x0: npt.NDArray, algo: str) -> None:
        if algo not in self.ALGOS:
            raise ValueError(f"algorithm {algo!r} not available with scipy")
        method = self.ALGOS[algo]
        prb = self.prb
        options: Dict = {"maxiter": prb.max_evaluations}
        if method == "Nelder-Mead":
            options.update(maxfev=prb.max_evaluations, xatol=prb.tol, fatol=prb.tol,
                           adaptive=prb.dim > 4,
                           initial_simplex=self.initial_simplex(x0))
        else:
            options.update(rhobeg=0.5, tol=prb.tol)
        minimize(prb.evaluate, x0, method=method, options=options)

    def initial_simplex(self, x0: npt.NDArray) -> npt.NDArray:
        """x0 followed by x0 + step*sign_k*e_k, with seeded signs."""
        prb = self.prb
        if prb.seed is None:
            signs = np.ones(prb.dim)
        else:
            signs = np.random.default_rng(prb.seed).choice([-1., 1.], size=prb.dim)
        return np.vstack((x0, x0 + prb.simplex_step*np.diag(signs)))


class PygmoSolver(OptimizationSolver):
    def __init__(self, prb: OptimizationProblem):
        super().__init__(prb)
        self.exhausted = False

    def __deepcopy__(self, memo):
        # NOTE: pygmo deep-copies its problems; evaluations must reach self.prb
        return self

    def fitness(self, x: npt.NDArray) -> List[float]:
        if self.exhausted:
            return [self.prb.best_value]
        try:
            fit = self.prb.evaluate(x)
        except _BudgetExhausted:
            self.exhausted = True
            return [self.prb.best_value]
        return [fit]

    def get_bounds(self):
        return ([-100]*self.prb.dim, [100]*self.prb.dim)

    def get_name(self) -> str:
        return "QAOA angle optimization"

    def run(self, x0: npt.NDArray, algo: str) -> None:
        import pygmo as pg

        nlopt_names = {"nelder_mead": "neldermead"}
        self.exhausted = False
        pop = pg.population(pg.problem(self))
        pop.push_back(x0)
        if self.prb.max_evaluations > 1:
            algorithm = pg.algorithm(pg.nlopt(solver=nlopt_names.get(algo, algo)))
            algorithm.extract(pg.nlopt).ftol_rel = self.prb.tol  # type: ignore
            algorithm.extract(pg.nlopt).maxeval = (  # type: ignore
                self.prb.max_evaluations - 1)
            pop = algorithm.evolve(pop)  # type: ignore
        if self.exhausted:
            raise _BudgetExhausted


class SPSASolver(OptimizationSolver):
    """Simultaneous-perturbation stochastic approximation.

    Gains follow a_k = a/(k+1)^alpha and c_k = c/(k+1)^gamma; every iteration
    costs two perturbed evaluations and one evaluation of the updated point.
    """
    a = 0.1
    c = 0.1
    alpha = 0.602
    gamma = 0.101

    def run(self, x0: npt.NDArray, algo: str = "spsa") -> None:
        rng = np.random.default_rng(self.prb.seed)
        x = x0.copy()
        self.prb.evaluate(x)
        k = 0
        while True:
            a_k = self.a/(k + 1)**self.alpha
            c_k = self.c/(k + 1)**self.gamma
            delta = rng.choice([-1., 1.], size=self.prb.dim)
            f_plus = self.prb.evaluate(x + c_k*delta)
            f_minus = self.prb.evaluate(x - c_k*delta)
            # NOTE: 1/delta_i = delta_i for Rademacher perturbations
            x = x - a_k*(f_plus - f_minus)/(2*c_k)*delta
            self.prb.evaluate(x)
            self.prb.end_iteration()
            k += 1
