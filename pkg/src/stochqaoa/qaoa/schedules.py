from typing import Tuple

import numpy as np
import numpy.typing as npt

from stochqaoa.qaoa.config import InitStrategy, to_member


def init_params(strategy: InitStrategy | str, layers: int,
                rng: np.random.Generator | int | None = None,
                gamma_max: float = 1., beta_max: float = 1.
                ) -> Tuple[npt.NDArray, npt.NDArray]:
    """Initial angles of a p-layer circuit.

    Args:
        strategy: annealing_ramp (gamma_k = (k+1)/p*gamma_max, beta_k =
            (1 - (k+1)/p)*beta_max), random (uniform in [0, pi)) or constant (0.5).
        layers: number of layers p.
        rng: generator or seed of the random strategy.
        gamma_max: final gamma of the ramp.
        beta_max: scale of the beta ramp.
    Returns:
        the gamma and beta vectors.
    """
    strategy = to_member(InitStrategy, strategy)
    if layers < 1:
        raise ValueError(f"layers must be >= 1, got {layers}")
    if strategy == InitStrategy.annealing_ramp:
        frac = np.arange(1, layers + 1)/layers
        return gamma_max*frac, beta_max*(1. - frac)
    elif strategy == InitStrategy.random:
        rng = np.random.default_rng(rng)
        return rng.uniform(0., np.pi, layers), rng.uniform(0., np.pi, layers)
    else:
        return np.full(layers, 0.5), np.full(layers, 0.5)
