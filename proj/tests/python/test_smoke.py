import json
import math

import pytest

import awvd


def test_params():
    p = awvd.derive_params(0.25)
    assert p["eps"] == 0.25
    assert 0 < p["eps_A"] < p["eps"]
    assert p["sigma"] > 1


def test_ball():
    b = awvd.make_ball([0, 0], [3, 0], 2.0)
    assert b["t_star"] == pytest.approx(1.0)
    assert b["t_dagger"] == pytest.approx(3.0)
    assert b["radius"] == pytest.approx(2.0)


def test_generate_and_brute():
    a = awvd.generate(50, 2, "uniform", 5)
    b = awvd.generate(50, 2, "uniform", 5)
    assert a == b
    coords, weights = a
    assert len(coords) == 50 and all(len(c) == 2 for c in coords)
    p = [0.4, 0.6]
    k, d = awvd.brute_nn(coords, weights, p)
    best = min(math.dist(p, c) / w for c, w in zip(coords, weights))
    assert d == pytest.approx(best)
    assert math.dist(p, coords[k]) / weights[k] == pytest.approx(best)


def test_sspd():
    coords, _ = awvd.generate(100, 2, "equal", 2)
    r = awvd.validate_sspd(coords, 4.0)
    assert r["uncovered"] == 0
    assert r["separation_violations"] == 0
    assert r["pairs"] > 0


def test_diagram():
    coords, weights = awvd.generate(40, 2, "uniform", 9)
    d = awvd.Diagram(coords, weights, eps=0.25, threads=1)
    assert d.n == 40 and d.dim == 2 and d.cells >= 1
    k, dist = d.query(coords[3])
    assert dist == pytest.approx(0.0)
    r = d.ratio_check(2000, 1)
    assert r["queries"] == 2000
    assert 1.0 <= r["max_ratio"] <= 1.25

    text = d.dump()
    back = awvd.Diagram.load(text)
    assert back.dump() == text
    for q in ([0.2, 0.7], [0.9, 0.1], [-1.0, 3.0]):
        assert back.query_rank(q) == d.query_rank(q)
        assert back.query(q)[1] == d.query(q)[1]

    assert d.svg().lstrip().startswith("<")
    stats = json.loads(d.stats())
    assert stats["n"] == 40


def test_errors():
    coords, weights = awvd.generate(5, 2, "uniform", 1)
    with pytest.raises(awvd.AwvdError):
        awvd.Diagram(coords, weights, eps=2.0)
    with pytest.raises(awvd.AwvdError):
        awvd.generate(5, 2, "gaussian", 1)
