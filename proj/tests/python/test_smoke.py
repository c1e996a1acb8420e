import math

import pytest

import bowen

CAT = {"kind": "toral", "matrix": [[2, 1], [1, 1]]}
LOG_LAMBDA = math.log((3 + math.sqrt(5)) / 2)


def test_system_round_trip():
    cat = bowen.system(CAT)
    assert cat.dimension == 2
    x = [0.3, 0.2]
    y = cat.eval(x)
    assert y == pytest.approx([0.8, 0.5])
    assert cat.distance(cat.eval_inverse(y), x) < 1e-12
    assert cat.distance([0.1, 0.1], [0.9, 0.9]) == pytest.approx(math.hypot(0.2, 0.2))


def test_bad_configs_raise():
    with pytest.raises(bowen.InputError):
        bowen.system({"kind": "toral", "matrix": [[2, 1], [1, 1]], "colour": "red"})
    with pytest.raises(ValueError):
        bowen.canonical_config({"experiment": "dance", "system": CAT})


def test_entropy_estimate_on_the_cat_map():
    cat = bowen.system(CAT)
    cloud = bowen.grid_cloud(cat, 64)
    assert len(cloud) == 64 * 64
    est = bowen.entropy_estimate(cat, cloud, range(1, 7), [0.2, 0.1, 0.05], spanning=True)
    assert abs(est["rate"] - LOG_LAMBDA) < 0.15
    assert est["delta_monotone"]


def test_growth_rate():
    cat = bowen.system(CAT)
    gc = bowen.unstable_rate_estimate(cat, [0.3, 0.2], 0.02, range(1, 9))
    assert gc["rate"] == pytest.approx(LOG_LAMBDA, rel=0.1)


def test_experiment_records(tmp_path):
    cfg = {
        "experiment": "estimate",
        "system": CAT,
        "params": {"cloud": {"kind": "grid", "per_axis": 24}, "n": [1, 2, 3, 4]},
    }
    rec = bowen.run_experiment(cfg)
    assert rec["id"] == bowen.config_id(cfg)
    assert rec["id"] == bowen.sha256_hex(
        __import__("json").dumps(bowen.canonical_config(cfg), separators=(",", ":"), sort_keys=True)
    )
    assert bowen.verify_record(rec)["pass"]
    path = bowen.write_record(rec, tmp_path)
    assert path.endswith("record.json")
    again = bowen.run_experiment(cfg, workers=3)
    assert again["results"] == rec["results"]
