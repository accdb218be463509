import math

import numpy as np
import pytest

from nusat import rng
from nusat.dist import EnsembleSpec, instantiate
from nusat.errors import BracketError
from nusat.formula import Formula
from nusat.generator import sample_formula
from nusat.solver import solve2
from nusat.xlab import (
    CSV_HEADER,
    Evaluator,
    RelativeGrid,
    SweepConfig,
    TrialRunner,
    estimate_crossing,
    locate,
    records_to_csv,
    run_sweep,
    sharpness_probe,
    trial_seeds,
)


def test_trial_seeds_match_derive_seed():
    got = trial_seeds(17, 250, 3, 8).tolist()
    assert got == [rng.derive_seed(17, 250, j) for j in range(3, 8)]


def test_runner_matches_reference_pipeline():
    # each trial equals: generate with the trial seed, then solve2
    d = instantiate(EnsembleSpec.power_law(2.5), 300)
    seeds = trial_seeds(5, 200, 0, 60)
    want = sum(solve2(sample_formula(d, 2, 200, int(s))).satisfiable for s in seeds)
    with TrialRunner(d) as runner:
        assert runner.run(200, 5, 0, 60) == (want, 0)


def test_uniform_sweep_decreasing():
    cfg = SweepConfig(EnsembleSpec.uniform(), 500, RelativeGrid((0.5, 1.0, 1.5)), 400, seed=3)
    recs = run_sweep(cfg)
    assert [r.m for r in recs] == [250, 500, 750]
    p = [r.p_hat for r in recs]
    assert p[0] > p[1] > p[2]
    for r in recs:
        assert 0 <= r.sat_count <= r.trials
        assert r.ci_low <= r.p_hat <= r.ci_high


def test_single_trial_record():
    (r,) = run_sweep(SweepConfig(EnsembleSpec.uniform(), 100, (80,), 1, seed=0))
    assert r.sat_count in (0, 1)
    assert r.ci_low <= r.p_hat <= r.ci_high


def test_sweep_deterministic_across_workers(monkeypatch):
    cfg = SweepConfig(EnsembleSpec.geometric(2), 400, (200, 400, 600), 90, seed=11)
    one = run_sweep(cfg, workers=1)
    assert run_sweep(cfg, workers=1) == one
    assert run_sweep(cfg, workers=3) == one
    monkeypatch.setenv("NUSAT_WORKERS", "2")
    assert run_sweep(cfg) == one


def test_sweep_p_hat_non_increasing_up_to_ci():
    cfg = SweepConfig(EnsembleSpec.power_law(2.5), 1000, RelativeGrid(tuple(np.linspace(0.2, 3, 10))), 300, seed=1)
    recs = run_sweep(cfg)
    for a, b in zip(recs, recs[1:]):
        assert b.ci_low <= a.ci_high


def test_csv_output():
    recs = run_sweep(SweepConfig(EnsembleSpec.uniform(), 50, (10, 60), 20, seed=2))
    text = records_to_csv(recs)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 3
    assert lines[1].startswith("50,10,20,")


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(EnsembleSpec.uniform(), 10, (5,), 0)
    with pytest.raises(ValueError):
        SweepConfig(EnsembleSpec.uniform(), 10, (), 5)
    with pytest.raises(ValueError):
        SweepConfig(EnsembleSpec.uniform(), 10, (0, 5), 5)


def test_retry_cap_redraw_counted():
    d = instantiate(EnsembleSpec.explicit([6.0, 1.0, 1.0, 1.0]), 4)
    with TrialRunner(d, retry_cap=2) as runner:
        sat, redraws = runner.run(3, 0, 0, 40)
    assert redraws > 0
    assert 0 <= sat <= 40


def test_crossing_uniform_small():
    est = estimate_crossing(EnsembleSpec.uniform(), 2000, seed=1, budget=4000)
    assert est.bracket == (250, 16000)
    assert est.bracket[0] <= est.ci[0] <= est.m_hat <= est.ci[1] <= est.bracket[1]
    assert 0.85 < est.m_hat / 2000 < 1.2
    assert est.trials_used <= 4000 + 200
    again = estimate_crossing(EnsembleSpec.uniform(), 2000, seed=1, budget=4000)
    assert again.m_hat == est.m_hat


def test_crossing_budget_floor():
    with pytest.raises(ValueError):
        estimate_crossing(EnsembleSpec.uniform(), 100, budget=999)


def test_bracket_error_reports_endpoints():
    d = instantiate(EnsembleSpec.uniform(), 1000)
    with TrialRunner(d) as runner:
        ev = Evaluator(runner, 0)
        with pytest.raises(BracketError) as exc:
            locate(ev, 0.5, 10, 200, 1000)  # far below the threshold: always SAT
    assert exc.value.endpoints["p_low"] == 1.0
    assert exc.value.endpoints["p_high"] == 1.0


def test_sharpness_delta_half_is_zero():
    rep = sharpness_probe(EnsembleSpec.uniform(), [500, 1000], delta=0.5, budget=1500)
    assert rep.widths == [0.0, 0.0]


def test_sharpness_rejects_bad_args():
    with pytest.raises(ValueError):
        sharpness_probe(EnsembleSpec.uniform(), [500, 100])
    with pytest.raises(ValueError):
        sharpness_probe(EnsembleSpec.uniform(), [100, 500], delta=0.7)


@pytest.mark.slow
def test_uniform_width_shrinks():
    rep = sharpness_probe(EnsembleSpec.uniform(), [10**3, 10**4, 10**5], delta=0.1, budget=3000)
    w = rep.widths
    assert w[0] > w[1] > w[2]
    assert rep.verdict.startswith("shrinking")
