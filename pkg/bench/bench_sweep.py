import sys
import time

import jax
import numpy as np

import stochqaoa as sq
from stochqaoa import config, FloatDtype, Platform
from stochqaoa.model import instance as inst
from stochqaoa.qaoa import sweep as sw
from stochqaoa.qaoa.config import QaoaConfig

LAYERS = [1, 2, 5, 10, 20, 50, 100]


def bench_sweep(optimizer="nelder_mead", platform="cpu", runs=50,
                output="sweep.csv"):

    if platform == "cpu":
        config(FloatDtype.float64, Platform.cpu)
    else:
        config(FloatDtype.float64, Platform.gpu)

    if jax.config.read("jax_enable_x64"):
        assert sq.float_dtype == "float64"

    instance = inst.reference_instance()
    base = QaoaConfig(init_strategy="annealing_ramp", optimizer=optimizer,
                      eval_mode="exact", max_evaluations=1000)

    tic = time.time()
    table, _ = sw.layer_sweep(instance, LAYERS, runs, base, timing=True)
    toc = time.time()

    table.to_csv(output, index=False)
    summary = sw.summarize_sweep(table)
    print(summary.to_string(index=False))
    print("Elapsed time = ", toc-tic)

    # NOTE: the optimum of the reference instance is j = 2
    five = table[table["layers"] == 5]
    print("success fraction at 5 layers:", np.mean(five["success"]))


if __name__ == '__main__':
    assert len(sys.argv) > 1
    optimizer = sys.argv[1]
    platform = sys.argv[2] if len(sys.argv) > 2 else "cpu"
    bench_sweep(optimizer=optimizer, platform=platform)
