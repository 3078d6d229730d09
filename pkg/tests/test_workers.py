"""Worker pool helpers."""

import pytest

from src.config import WORKERS_ENV
from src.errors import ConfigError
from src.workers import ordered_map, partition, resolve_workers


def test_workers_from_environment(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    assert resolve_workers() == 1
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert resolve_workers() == 3
    assert resolve_workers(5) == 5
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        resolve_workers()
    with pytest.raises(ConfigError):
        resolve_workers(0)


def test_partition_is_aligned_and_complete():
    ranges = partition(0, 1000, 3, align=64)
    assert ranges[0][0] == 0 and ranges[-1][1] == 1000
    for (_, hi), (lo, _) in zip(ranges, ranges[1:]):
        assert hi == lo and lo % 64 == 0
    assert partition(0, 10, 8, align=64) == [(0, 10)]
    assert partition(5, 5, 4) == []


@pytest.mark.parametrize("workers", [1, 2])
def test_ordered_map_keeps_submission_order(workers):
    jobs = [(7, 2), (9, 4), (20, 6), (1, 1)]
    assert ordered_map(divmod, jobs, workers) == [divmod(*job) for job in jobs]
