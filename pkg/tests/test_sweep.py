import pytest

from stochqaoa.model import instance as inst
from stochqaoa.qaoa import runner
from stochqaoa.qaoa import sweep as sw
from stochqaoa.qaoa.config import QaoaConfig


def test_layer_sweep(setup_test):
    instance = inst.reference_instance()
    base = QaoaConfig(max_evaluations=20, seed=10)
    table, results = sw.layer_sweep(instance, [1, 2], runs=2, base=base)

    assert list(table.columns) == sw.COLUMNS
    assert table["layers"].tolist() == [1, 1, 2, 2]
    assert table["run"].tolist() == [0, 1, 0, 1]
    assert table["seed"].tolist() == [10, 11, 12, 13]
    assert table["wall_ms"].isna().all()
    assert [r.layers for r in results] == [1, 1, 2, 2]
    for row, result in zip(table.itertuples(), results):
        assert row.best_expectation == result.best_expectation
        assert row.success == (result.modal_j == (2,))
        assert row.evaluations == result.evaluations <= 20

    # each run equals a standalone run with the same seed
    alone = runner.optimize(QaoaConfig(layers=2, max_evaluations=20, seed=12),
                            instance)
    assert alone == results[2]

    parallel, _ = sw.layer_sweep(instance, [1, 2], runs=2, base=base, workers=2)
    assert parallel.equals(table)

    timed, _ = sw.layer_sweep(instance, [1], runs=1, base=base, timing=True)
    assert timed["wall_ms"].iloc[0] >= 0.


def test_summary(setup_test):
    instance = inst.reference_instance()
    table, results = sw.layer_sweep(instance, [1, 3], runs=3,
                                    base=QaoaConfig(max_evaluations=15))
    summary = sw.summarize_sweep(table)
    assert summary["layers"].tolist() == [1, 3]
    assert summary["runs"].tolist() == [3, 3]
    assert (summary["min"] <= summary["median"]).all()
    assert (summary["q1"] <= summary["q3"]).all()
    assert (summary["median"] <= summary["max"]).all()
    assert summary["success_fraction"].between(0., 1.).all()

    dumped = sw.results_to_dict(results)
    assert len(dumped) == 6
    assert all("cost_trace" in d and "wall_time" not in d for d in dumped)


def test_invalid_sweep(setup_test):
    instance = inst.reference_instance()
    with pytest.raises(ValueError):
        sw.layer_sweep(instance, [], runs=1, base=QaoaConfig())
    with pytest.raises(ValueError):
        sw.layer_sweep(instance, [1], runs=0, base=QaoaConfig())
