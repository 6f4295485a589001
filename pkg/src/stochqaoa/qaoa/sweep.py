import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Dict, List, Sequence, Tuple

import pandas as pd

from stochqaoa.model import instance as inst
from stochqaoa.oracle import benchmarks as bm
from stochqaoa.qaoa import runner
from stochqaoa.qaoa.config import QaoaConfig

_logger = logging.getLogger(__name__)

COLUMNS = ["layers", "run", "seed", "best_expectation", "modal_j", "success",
           "evaluations", "wall_ms"]


def layer_sweep(instance: inst.InstanceSpec, layers: Sequence[int], runs: int,
                base: QaoaConfig, workers: int = 1, timing: bool = False
                ) -> Tuple[pd.DataFrame, List[runner.RunResult]]:
    """Independent seeded runs for every layer count.

    The i-th run overall (layers-major order) uses seed base.seed + i.

    Args:
        instance: a valid instance.
        layers: circuit depths to sweep.
        runs: runs per depth.
        base: settings shared by all the runs (layers and seed are overridden).
        workers: number of runs executed concurrently.
        timing: fill the wall_ms column.
    Returns:
        the sweep table (one row per run, ordered by layers then run) and the
        results in the same order.
    """
    if len(layers) == 0 or runs < 1:
        raise ValueError("the sweep needs at least one layer count and one run")
    inst.ensure_valid(instance)
    hn_j, _ = bm.solve_here_and_now(instance)

    jobs = [(p, r, base.seed + k*runs + r)
            for k, p in enumerate(layers) for r in range(runs)]

    def job(item):
        p, r, seed = item
        result = runner.optimize(replace(base, layers=p, seed=seed), instance)
        _logger.info("layers %d run %d: best %.6g, modal j %s", p, r,
                     result.best_expectation, result.modal_j)
        return result

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, jobs))
    else:
        results = [job(item) for item in jobs]

    rows: List[Dict] = []
    for (p, r, seed), res in zip(jobs, results):
        rows.append({
            "layers": p, "run": r, "seed": seed,
            "best_expectation": res.best_expectation,
            "modal_j": ";".join(str(v) for v in res.modal_j),
            "success": tuple(res.modal_j) == tuple(hn_j),
            "evaluations": res.evaluations,
            "wall_ms": (round(res.wall_time*1e3, 3)
                        if timing and res.wall_time is not None else None),
        })
    return pd.DataFrame(rows, columns=COLUMNS), results


def summarize_sweep(table: pd.DataFrame) -> pd.DataFrame:
    """Per-layer min, quartiles and max of best_expectation and success rate."""
    grouped = table.groupby("layers")
    stats = grouped["best_expectation"].quantile([0., .25, .5, .75, 1.]).unstack()
    stats.columns = ["min", "q1", "median", "q3", "max"]
    stats["success_fraction"] = grouped["success"].mean()
    stats["runs"] = grouped.size()
    return stats.reset_index()


def results_to_dict(results: Sequence[runner.RunResult],
                    timing: bool = False) -> List[Dict]:
    """JSON form of a sweep, with the full cost traces."""
    return [r.to_dict(include_timing=timing) for r in results]
