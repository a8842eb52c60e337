import random

import pytest

from ibcnfc import bench, ibe


@pytest.fixture(scope="module")
def report(prod):
    return bench.bench([128, 512], params=prod, iterations=5)


def test_report_shape(report, prod):
    text = report.format()
    lines = text.splitlines()
    assert lines[0].startswith("#") and "median-of-5" in lines[0]
    assert lines[1].split("\t") == list(bench.COLUMNS)
    rows = [line.split("\t") for line in lines[2:]]
    assert len(rows) == 4 and all(len(r) == len(bench.COLUMNS) for r in rows)
    assert [r[0] for r in rows] == ["local", "local", "paper, Nokia Lumia 920", "paper, Nokia Lumia 920"]
    assert rows[2][1:4] == ["128", "7497.198", "7368.289"]
    assert rows[3][1:4] == ["512", "7498.221", "6998.858"]
    assert prod[0].fingerprint.hex() in lines[0]


def test_counters_recorded(report):
    for row in report.rows:
        assert row.encrypt_ops["mul"] > 0 and row.decrypt_ops["mul"] > 0


def test_bounds(report):
    assert report.row(128).encrypt_ms <= 7497.198
    assert report.row(128).decrypt_ms <= 7368.289


def test_empty_sizes():
    with pytest.raises(ValueError):
        bench.bench([])


def test_stable_apart_from_timings(prod):
    a = bench.bench([32], params=prod, iterations=1).format().splitlines()
    b = bench.bench([32], params=prod, iterations=1).format().splitlines()
    strip = lambda rows: [r.split("\t")[:2] + r.split("\t")[4:] for r in rows]  # noqa: E731
    assert a[0] == b[0] and strip(a[1:]) == strip(b[1:])


def test_small_params():
    sp = ibe.setup(64, 128, random.Random(0))
    rep = bench.bench([1], params=sp, iterations=1)
    assert rep.p_bits == 128 and len(rep.rows) == 1
