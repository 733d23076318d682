import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from agentft.config import ExperimentConfig
from agentft.errors import IncompleteData, IncompleteRow, MissingEntries, MissingNodeMean, ParseError, UnknownNode
from agentft.metrics import (
    SampleMatrix,
    compute_metrics,
    dependency_sweep,
    mean_level_time,
    mean_node_time,
    overall_mean,
)
from agentft.taskgraph import build_binary_reduction

TABLE_NODE_MEANS = {9: 0.339, 10: 0.349, 11: 0.352, 12: 0.345, 13: 0.347, 14: 0.340, 15: 0.341}
LEVELS = {2: [9, 10, 11, 12], 3: [13, 14], 4: [15]}


def naive_mean(xs):
    total, count = 0.0, 0
    for x in xs:
        total += x
        count += 1
    return total / count


def test_two_point_mean():
    m = SampleMatrix([9], [[0.3, 0.4]])
    assert mean_node_time(m, 9) == pytest.approx(0.35)


def test_constant_rows_give_constant_means():
    m = SampleMatrix(list(range(9, 16)), np.full((7, 30), 0.25), LEVELS)
    table = compute_metrics(m)
    assert set(table.per_node.values()) == {0.25}
    assert set(table.per_level.values()) == {0.25}
    assert table.overall_by_node == table.overall_by_level == 0.25


def test_table_aggregation_from_reference_node_means():
    graph = build_binary_reduction(8)
    per_level = {p: mean_level_time(TABLE_NODE_MEANS, graph, p) for p in (2, 3, 4)}
    assert per_level[2] == pytest.approx(0.346, abs=1e-3)
    assert per_level[3] == pytest.approx(0.343, abs=1e-3)
    assert per_level[4] == pytest.approx(0.341, abs=1e-3)
    by_node, by_level = overall_mean(TABLE_NODE_MEANS, per_level, graph)
    assert by_node == pytest.approx(0.344714, abs=1e-6)
    assert by_level == pytest.approx(0.343583, abs=1e-6)
    assert by_node == pytest.approx(0.344, abs=2e-3)
    assert by_level == pytest.approx(0.344, abs=2e-3)


def test_single_trial_matrix_reproduces_table():
    m = SampleMatrix(list(TABLE_NODE_MEANS), [[v] for v in TABLE_NODE_MEANS.values()], LEVELS)
    table = compute_metrics(m)
    assert table.per_node == pytest.approx(TABLE_NODE_MEANS)


def test_incomplete_row_is_rejected():
    m = SampleMatrix([9, 10], [[0.3, np.nan], [0.3, 0.3]], {2: [9, 10]})
    with pytest.raises(IncompleteRow):
        mean_node_time(m, 9)
    with pytest.raises(IncompleteData):
        compute_metrics(m)


def test_lookup_errors():
    m = SampleMatrix([9], [[0.3]])
    with pytest.raises(UnknownNode):
        m.row(42)
    with pytest.raises(MissingNodeMean):
        mean_level_time({9: 0.3}, LEVELS, 2)
    with pytest.raises(MissingNodeMean):
        mean_level_time({9: 0.3}, LEVELS, 7)
    with pytest.raises(MissingEntries):
        overall_mean({}, {2: 0.3})
    with pytest.raises(ValueError):
        SampleMatrix([9], [[-1.0]])
    with pytest.raises(ParseError):
        SampleMatrix.from_rows([(9, 0, 2, 0.1), (9, 0, 2, 0.2)])


def random_matrix(rng):
    trials = int(rng.integers(1, 40))
    data = rng.uniform(0.0, 1.0, size=(7, trials)) * rng.choice([1e-3, 1.0, 1e3])
    return SampleMatrix(list(range(9, 16)), data, LEVELS)


@pytest.mark.parametrize("seed", range(50))
def test_matches_naive_recomputation(seed):
    m = random_matrix(np.random.default_rng(seed))
    table = compute_metrics(m)
    oracle_node = {n: naive_mean(list(m.samples[i])) for i, n in enumerate(m.node_ids)}
    oracle_level = {p: naive_mean([oracle_node[n] for n in ids]) for p, ids in LEVELS.items()}
    for n in oracle_node:
        assert table.per_node[n] == pytest.approx(oracle_node[n], rel=1e-12)
    for p in oracle_level:
        assert table.per_level[p] == pytest.approx(oracle_level[p], rel=1e-12)
    assert table.overall_by_node == pytest.approx(naive_mean(oracle_node.values()), rel=1e-12)
    assert table.overall_by_level == pytest.approx(naive_mean(oracle_level.values()), rel=1e-12)


@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=2, max_size=30), st.randoms())
def test_node_mean_ignores_trial_order(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    a = mean_node_time(SampleMatrix([9], [values]), 9)
    b = mean_node_time(SampleMatrix([9], [shuffled]), 9)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


def test_from_csv_reads_campaign_format(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text(
        "trial_id,seed,node_id,level,t_start_ms,t_end_ms,rebinds,survived\n"
        "0,0,9,2,100.0,400.0,3,1\n"
        "1,1,9,2,100.0,300.0,3,1\n"
        "2,2,9,2,100.0,,,0\n"
    )
    m = SampleMatrix.from_csv(path)
    assert m.node_ids == [9] and m.trials == 2
    assert mean_node_time(m, 9) == pytest.approx(0.25)
    assert m.levels == {2: [9]}


def test_from_csv_rejects_garbage(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("node_id,trial_id,duration\n9,0,abc\n")
    with pytest.raises(ParseError):
        SampleMatrix.from_csv(path)
    with pytest.raises(ParseError):
        SampleMatrix.from_csv(tmp_path / "missing.csv")


def test_sweep_is_flat_without_rebind_and_transfer_cost():
    cfg = ExperimentConfig().with_changes(rebind_ms_per_dep=0.0, transfer_ms_per_value=0.0)
    points = dependency_sweep(cfg, [2, 8], trials=3, base_seed=0)
    low, high = (p.mean_reinstatement_ms for p in points)
    # what remains is spawn and hop latency under jitter, independent of fan-in
    assert abs(high - low) < 0.1 * low
