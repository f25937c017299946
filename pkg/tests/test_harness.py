from __future__ import annotations

import numpy as np
import pytest

from tdrr.errors import InputError
from tdrr.generators import FactorModelSpec, SdrModelSpec
from tdrr.harness import (
    ExperimentConfig,
    FrequencyReport,
    bundled_configs,
    load_config,
    parse_config,
    report_from_json,
    report_to_csv,
    report_to_json,
    run_experiment,
    run_replication,
)

SMALL = """
# a comment
example = ex2
n = 120
p = 6
estimator = sir
H = 6
methods = TDRR, RRE, BIC
replications = 12
seed = 77
TDRR.tau = 0.4
"""


def test_parse_config():
    cfg = parse_config(SMALL)
    assert cfg.model == SdrModelSpec("ex2", n=120, p=6)
    assert cfg.methods == ("TDRR", "RRE", "BIC")
    assert cfg.H == 6
    assert cfg.overrides == {"TDRR": {"tau": 0.4}}


def test_config_errors_name_keys():
    with pytest.raises(InputError, match="replications"):
        parse_config(SMALL.replace("replications = 12", ""))
    with pytest.raises(InputError, match="replications"):
        parse_config(SMALL.replace("replications = 12", "replications = 0"))
    with pytest.raises(InputError, match="bogus"):
        parse_config(SMALL + "bogus = 1\n")
    with pytest.raises(InputError, match="seed"):
        parse_config(SMALL.replace("seed = 77", "seed = abc"))
    with pytest.raises(InputError):
        parse_config(SMALL.replace("TDRR, RRE, BIC", ""))


def test_bundled_configs_load():
    names = bundled_configs()
    assert "ex1_n800_p10" in names
    for name in names:
        assert load_config(name).replications == 500


def test_counts_cover_every_replication():
    rep = run_experiment(parse_config(SMALL))
    for m in rep.config.methods:
        assert sum(rep.counts[m].values()) == 12


def test_thread_count_invariance():
    cfg = parse_config(SMALL)
    a, b = run_experiment(cfg, threads=1), run_experiment(cfg, threads=5)
    assert a == b
    assert report_to_csv(a) == report_to_csv(b)
    assert report_to_json(a) == report_to_json(b)


def test_json_round_trip():
    rep = run_experiment(parse_config(SMALL))
    assert report_from_json(report_to_json(rep)) == rep
    fcfg = ExperimentConfig(FactorModelSpec(n=20, p=20), "factor", ("TDRR",), 3, 1)
    frep = run_experiment(fcfg)
    assert report_from_json(report_to_json(frep)) == frep


def test_csv_single_bucket():
    cfg = ExperimentConfig(SdrModelSpec("ex1", n=100, p=5), "dee", ("TDRR",), 1, 3)
    rep = FrequencyReport(cfg, {"TDRR": {3: 1}})
    assert report_to_csv(rep) == "method,q_hat,proportion,count\nTDRR,3,1.0,1\n"


def test_failures_land_in_error_bucket():
    # H = 11 slices need 22 rows; n = 20
    cfg = ExperimentConfig(SdrModelSpec("ex2", n=20, p=4), "sir", ("TDRR", "RRE"), 2, 1, H=11)
    assert run_replication(cfg, 0) == {"TDRR": "error", "RRE": "error"}
    rep = run_experiment(cfg)
    assert rep.counts["TDRR"] == {"error": 2}


def test_config_validation():
    with pytest.raises(InputError):
        ExperimentConfig(SdrModelSpec("ex1", n=100, p=5), "factor")
    with pytest.raises(InputError):
        ExperimentConfig(SdrModelSpec("ex1", n=100, p=5), "dee", ())
    with pytest.raises(InputError):
        ExperimentConfig(SdrModelSpec("ex1", n=100, p=5), "dee", ("TDRR",), 0)


def test_noiseless_rank_three_path(monkeypatch):
    import tdrr.harness as harness
    from tdrr.criteria import make_spectrum

    spec = make_spectrum([2.0, 1.0, 0.5, 0, 0, 0, 0, 0], 400)
    monkeypatch.setattr(harness, "_estimate_spectrum", lambda cfg, seed: (spec, 400, 8))
    cfg = ExperimentConfig(SdrModelSpec("ex1", n=400, p=8), "dee", ("TDRR",), 1, 0)
    assert run_experiment(cfg).proportions("TDRR") == {3: 1.0}


def test_overrides_reach_the_criterion():
    base = parse_config(SMALL.replace("TDRR.tau = 0.4", ""))
    tight = parse_config(SMALL.replace("TDRR.tau = 0.4", "TDRR.tau = 0.0001"))
    lo = run_experiment(tight).counts["TDRR"]
    hi = run_experiment(base).counts["TDRR"]
    mean = lambda c: np.average(list(c), weights=list(c.values()))  # noqa: E731
    assert mean(lo) <= mean(hi)
