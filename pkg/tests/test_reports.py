import math

import numpy as np
import pytest

from poissonpoly import seeding
from poissonpoly.reports import (Accumulator, IdentityReport, merge_reports, run_blocks,
                                 two_sample_report)


def test_single_partial_merges_to_itself():
    acc = Accumulator.from_arrays([1.0, 2.0, 4.0], [1.0, 1.5, 3.0])
    r = merge_reports([acc], "x")
    assert r.lhs == pytest.approx(7 / 3) and r.rhs == pytest.approx(5.5 / 3)
    d = np.array([0.0, 0.5, 1.0])
    assert r.diff == pytest.approx(d.mean())
    assert r.se == pytest.approx(d.std(ddof=1) / math.sqrt(3))


def test_merge_errors():
    with pytest.raises(ValueError):
        merge_reports([], "x")
    a = Accumulator.from_arrays([1.0], [0.0], config=("a",))
    b = Accumulator.from_arrays([1.0], [0.0], config=("b",))
    with pytest.raises(ValueError):
        merge_reports([a, b], "x")


def test_merged_partials_match_pooled_statistics(rng):
    lhs, rhs = rng.random(4000), rng.random(4000)
    parts = [Accumulator.from_arrays(lhs[i:i + 1000], rhs[i:i + 1000]) for i in range(0, 4000, 1000)]
    r = merge_reports(parts, "x")
    d = lhs - rhs
    assert r.diff == pytest.approx(d.mean(), rel=1e-13)
    assert r.se == pytest.approx(d.std(ddof=1) / math.sqrt(len(d)), rel=1e-10)


def test_z_and_verdict():
    r = IdentityReport("x", 1.0, 0.5, 0.5, 0.1, 10)
    assert r.z == pytest.approx(5.0) and r.verdict == "fail"
    assert IdentityReport("x", 1.0, 1.0, 0.0, 0.0, 10).verdict == "pass"
    r = IdentityReport("x", 1.0, 0.0, 1.0, 0.0, 10)
    assert r.verdict == "fail" and r.to_dict()["z"] is None


def test_two_sample_floor():
    r = two_sample_report("x", np.zeros(100), np.full(100, 1e-9), {}, 0, se_floor=0.01)
    assert r.se == 0.01 and r.passed


def _draw(rng, count):
    return {"u": rng.random(count)}


def test_blocks_do_not_depend_on_workers():
    one = run_blocks(_draw, 3500, 7, "lbl", workers=1)
    two = run_blocks(_draw, 3500, 7, "lbl", workers=2)
    assert [len(b["u"]) for b in one] == [1000, 1000, 1000, 500]
    for a, b in zip(one, two):
        np.testing.assert_array_equal(a["u"], b["u"])


def test_streams_are_label_separated():
    a = seeding.stream(1, "alpha").random(5)
    b = seeding.stream(1, "beta").random(5)
    c = seeding.stream(1, "alpha", 1).random(5)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
    np.testing.assert_array_equal(a, seeding.stream(1, "alpha").random(5))
