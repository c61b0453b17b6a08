import json

import pytest

from twinsim.local import (FeatureRecord, NeighborEntry, NeighborTable,
                           RawSample, StatusReport, Task, channel_quality,
                           decide_local, preprocess, report_to_json)

US = 1_000_000


def sample(t, speed, cq=0.8):
    return RawSample(t, (0.0, 0.0), speed, 1.0, cq)


def test_channel_quality_linear_and_clipped():
    assert channel_quality(0.0, 600.0) == 1.0
    assert channel_quality(300.0, 600.0) == pytest.approx(0.5)
    assert channel_quality(600.0, 600.0) == 0.0
    assert channel_quality(900.0, 600.0) == 0.0


def test_preprocess_ewma_oracle():
    # alpha 0.3, seeded with the first sample: [10, 20] -> 13.0
    f = preprocess([sample(0, 10.0), sample(100_000, 20.0)], alpha=0.3)
    assert f.mean_speed == pytest.approx(15.0)
    assert f.ewma_speed == pytest.approx(13.0)
    assert f.t_start_us == 0
    assert f.t_end_us == 100_000


def test_preprocess_constant_window_is_identity():
    f = preprocess([sample(i * 100_000, 12.0) for i in range(10)])
    assert f.ewma_speed == pytest.approx(12.0)
    assert f.mean_speed == pytest.approx(12.0)


def test_preprocess_last_fields():
    samples = [
        RawSample(0, (1.0, 2.0), 10.0, 0.9, 0.5),
        RawSample(100_000, (3.0, 4.0), 12.0, 0.8, 0.7),
    ]
    f = preprocess(samples)
    assert f.position_last == (3.0, 4.0)
    assert f.energy_last == 0.8
    assert f.channel_quality_last == 0.7


def task(cost):
    return Task(0, 0, cost, 2000, 1000, 0)


def test_decide_local_threshold_and_backlog_guard():
    # cost at the threshold stays local
    assert decide_local(task(2.0), 2.0, 0.0, 50.0) == "local"
    assert decide_local(task(2.1), 2.0, 0.0, 50.0) == "edge"
    # saturated local queue (> 2 s) overrides the threshold
    assert decide_local(task(1.0), 2.0, 100.0, 50.0) == "local"  # exactly 2 s
    assert decide_local(task(1.0), 2.0, 101.0, 50.0) == "edge"


def test_task_cost_must_be_positive():
    with pytest.raises(ValueError):
        Task(0, 0, 0.0, 2000, 1000, 0)


def test_report_json_canonical_order():
    report = StatusReport(
        device_id=3,
        features=FeatureRecord(0, US, 10.0, 10.5, (1.0, 2.0), 0.9, 0.8),
        nav_intent=4,
        queue_backlog_cu=12.0,
        role="processing",
    )
    text = report_to_json(report)
    assert text == report_to_json(report)  # stable
    keys = list(json.loads(text))
    assert keys == ["device_id", "window", "mean_speed", "ewma_speed",
                    "position", "energy", "channel_quality", "nav_intent",
                    "backlog", "role"]


def entry(t, role="processing", backlog=0.0):
    return NeighborEntry(t, (0.0, 0.0), 10.0, role, backlog)


def test_neighbor_table_expiry():
    table = NeighborTable(3 * US)
    table.observe(1, entry(0))
    assert 1 in table.alive(3 * US)
    assert 1 not in table.alive(3 * US + 1)


def test_handoff_candidate_rules():
    table = NeighborTable(3 * US)
    # 50 CU/s capacity: own backlog 150 CU = 3 s
    table.observe(1, entry(0, role="acquisition", backlog=0.0))   # wrong role
    table.observe(2, entry(0, role="processing", backlog=120.0))  # gap only 0.6 s
    table.observe(3, entry(0, role="processing", backlog=50.0))   # eligible, 1 s
    table.observe(4, entry(0, role="processing", backlog=20.0))   # eligible, lowest
    assert table.handoff_candidate(0, 150.0, 50.0, gap_s=1.0) == 4


def test_handoff_candidate_tie_breaks_by_id():
    table = NeighborTable(3 * US)
    table.observe(9, entry(0, backlog=10.0))
    table.observe(5, entry(0, backlog=10.0))
    assert table.handoff_candidate(0, 150.0, 50.0) == 5


def test_handoff_candidate_none_when_empty():
    table = NeighborTable(3 * US)
    assert table.handoff_candidate(0, 500.0, 50.0) is None
