import math

import numpy as np
import pytest

from vegas_restart import analysis, distx, engine
from vegas_restart.distx import RuntimeModel, constant, two_point
from vegas_restart.engine import (
    CapExceeded,
    Caps,
    SamplerProcess,
    TrialRng,
    bitstring_guess_model,
    bitstring_guess_process,
    default_caps,
    geometric_coin_process,
    mc_expected_cost,
    run_once_truncated,
    run_with_schedule,
)
from vegas_restart.schedules import (
    single_threshold_schedule,
    two_threshold_schedule,
    universal_schedule,
)
from vegas_restart.streams import CounterStream, stream_key


def stream(*words):
    return CounterStream(stream_key(*words))


# ---------------------------------------------------------------------------
# Streams


def test_streams_are_reproducible_and_distinct():
    a = stream(42, 0, 1)
    b = stream(42, 0, 1)
    assert [a.random() for _ in range(8)] == [b.random() for _ in range(8)]
    c = stream(42, 0, 2)
    assert a.key != c.key
    vec = stream(7).random(1000)
    assert vec.shape == (1000,)
    assert ((0.0 <= vec) & (vec < 1.0)).all()
    s = stream(9)
    scalar_first = [s.random() for _ in range(4)]
    s2 = stream(9)
    assert np.allclose(s2.random(4), scalar_first)


# ---------------------------------------------------------------------------
# Single truncated attempts


def test_run_once_sampler_success_and_failure():
    proc = SamplerProcess(RuntimeModel(constant(5.0), "deterministic"))
    out = run_once_truncated(proc, 296.83, stream(1))
    assert out.success and out.cost == pytest.approx(math.exp(5.0))
    out = run_once_truncated(proc, 2.0, stream(1))
    assert not out.success and out.cost == 2.0


def test_run_once_rejects_nonpositive_budget():
    proc = SamplerProcess(RuntimeModel(constant(0.0), "deterministic"))
    with pytest.raises(ValueError):
        run_once_truncated(proc, 0.0, stream(1))


def test_run_once_geometric_uses_whole_steps():
    proc = SamplerProcess(RuntimeModel(constant(1.0), "geometric"))
    out = run_once_truncated(proc, 0.9, stream(1))
    assert not out.success and out.cost == 0.0
    outcomes = [run_once_truncated(proc, 7.5, stream(2, i)) for i in range(200)]
    for out in outcomes:
        assert out.cost == math.floor(out.cost)
        assert out.cost <= 7.0
        if not out.success:
            assert out.cost == 7.0


def test_geometric_coin_success_rate_single_step():
    # One step with success probability exp(-ln 2) = 1/2.
    proc = geometric_coin_process(constant(math.log(2.0)))
    n = 100_000
    wins = sum(
        run_once_truncated(proc, 1.0, stream(11, i)).success for i in range(n)
    )
    sigma = 0.5 / math.sqrt(n)
    assert abs(wins / n - 0.5) <= 3.0 * sigma


# ---------------------------------------------------------------------------
# Schedule execution


def test_run_with_schedule_forced_divergence_trips_attempt_cap():
    proc = SamplerProcess(RuntimeModel(constant(10.0), "deterministic"))
    sched = single_threshold_schedule(3.0)
    with pytest.raises(CapExceeded) as err:
        run_with_schedule(proc, sched, TrialRng(seed=1), caps=Caps(max_attempts=500))
    assert err.value.which == "max_attempts"
    assert err.value.report.attempts == 500
    assert err.value.report.total_cost == pytest.approx(500 * 2.0 * math.exp(3.0))


def test_run_with_schedule_cost_cap():
    proc = SamplerProcess(RuntimeModel(constant(10.0), "deterministic"))
    sched = single_threshold_schedule(3.0)
    with pytest.raises(CapExceeded) as err:
        run_with_schedule(proc, sched, TrialRng(seed=1), caps=Caps(max_total_cost=100.0))
    assert err.value.which == "max_total_cost"


def test_run_with_schedule_two_point_first_attempt():
    proc = SamplerProcess(RuntimeModel(two_point(4.0), "deterministic"))
    sched = single_threshold_schedule(5.0)
    for trial in range(50):
        report = run_with_schedule(proc, sched, TrialRng(seed=3, trial=trial))
        assert report.success and report.attempts == 1
        assert report.total_cost in (1.0, math.exp(5.0))


def test_run_with_schedule_universal_always_succeeds():
    proc = SamplerProcess(RuntimeModel(two_point(4.0), "geometric"))
    sched = universal_schedule()
    for trial in range(10_000):
        report = run_with_schedule(proc, sched, TrialRng(seed=4, trial=trial))
        assert report.success


def test_report_cost_identity_under_deterministic_law():
    # With the zero-variance law every failed attempt costs its full budget.
    proc = SamplerProcess(RuntimeModel(two_point(4.0), "deterministic"))
    sched = single_threshold_schedule(0.0)
    budgets = [sched.budget(i) for i in range(1, 200)]
    for trial in range(200):
        report = run_with_schedule(proc, sched, TrialRng(seed=5, trial=trial), record=True)
        i = report.succeeding_index
        expected = sum(budgets[: i - 1]) + report.per_attempt[-1].cost
        assert report.total_cost == pytest.approx(expected, rel=1e-12)
        assert report.success and len(report.per_attempt) == report.attempts


def test_attempt_outcomes_are_independent_across_indices():
    # Success indicators of attempts 1 and 2 are uncorrelated, and the
    # attempt-2 success frequency among trials that reach it matches the
    # unconditional per-attempt success probability.
    proc = SamplerProcess(RuntimeModel(two_point(4.0), "geometric"))
    n = 100_000
    budget = 2.0
    s1 = np.empty(n)
    s2 = np.empty(n)
    for trial in range(n):
        rng = TrialRng(seed=6, trial=trial)
        s1[trial] = run_once_truncated(proc, budget, rng.attempt(1)).success
        s2[trial] = run_once_truncated(proc, budget, rng.attempt(2)).success
    r = np.corrcoef(s1, s2)[0, 1]
    assert abs(r) < 0.01
    reached = s1 == 0.0
    p = s1.mean()
    se = math.sqrt(p * (1.0 - p) / reached.sum())
    assert abs(s2[reached].mean() - p) <= 5.0 * se


# ---------------------------------------------------------------------------
# Monte Carlo


def test_mc_matches_renewal_value():
    proc = SamplerProcess(RuntimeModel(two_point(4.0), "deterministic"))
    sched = single_threshold_schedule(0.0)
    est = mc_expected_cost(proc, sched, trials=100_000, seed=42)
    assert abs(est.mean - 9.0) <= 5.0 * est.std_error


def test_mc_degenerate_process():
    proc = SamplerProcess(RuntimeModel(constant(0.0), "deterministic"))
    est = mc_expected_cost(proc, universal_schedule(), trials=100, seed=1)
    assert est.mean == 1.0
    assert est.std_error == 0.0


def test_mc_bit_identical_reruns():
    proc = SamplerProcess(RuntimeModel(two_point(4.0), "geometric"))
    sched = two_threshold_schedule(4.0)
    a = mc_expected_cost(proc, sched, trials=5_000, seed=9)
    b = mc_expected_cost(proc, sched, trials=5_000, seed=9)
    assert a.mean == b.mean and a.std_error == b.std_error


def test_mc_worker_count_invariance(monkeypatch):
    proc = SamplerProcess(RuntimeModel(two_point(4.0), "geometric"))
    sched = single_threshold_schedule(0.0)
    base = mc_expected_cost(proc, sched, trials=4_000, seed=11, workers=1)
    threaded = mc_expected_cost(proc, sched, trials=4_000, seed=11, workers=3)
    assert base.mean == threaded.mean and base.std_error == threaded.std_error
    monkeypatch.setenv("VEGAS_RESTART_THREADS", "5")
    via_env = mc_expected_cost(proc, sched, trials=4_000, seed=11)
    assert via_env.mean == base.mean


def test_mc_cap_counting_mode():
    proc = SamplerProcess(RuntimeModel(constant(10.0), "deterministic"))
    sched = single_threshold_schedule(3.0)
    caps = Caps(max_attempts=10)
    with pytest.raises(CapExceeded):
        mc_expected_cost(proc, sched, trials=10, seed=1, caps=caps)
    est = mc_expected_cost(proc, sched, trials=10, seed=1, caps=caps, on_cap="count")
    assert est.n_capped == 10


def test_mc_validates_arguments():
    proc = SamplerProcess(RuntimeModel(constant(0.0), "deterministic"))
    with pytest.raises(ValueError):
        mc_expected_cost(proc, universal_schedule(), trials=1, seed=1)
    with pytest.raises(ValueError):
        mc_expected_cost(proc, universal_schedule(), trials=10, seed=1, on_cap="x")


def test_default_caps_hint():
    caps = default_caps(e_hint=5.0)
    assert caps.max_total_cost == pytest.approx(math.exp(25.0))
    assert default_caps().max_total_cost == 1e300
    assert default_caps(e_hint=800.0).max_total_cost == 1e300


# ---------------------------------------------------------------------------
# Resumable processes against the sampler algebra


def test_geometric_coin_reproduces_oracle():
    dist = constant(math.log(2.0))
    sched = single_threshold_schedule(math.log(3.0))
    oracle = analysis.analytic_cost(RuntimeModel(dist, "geometric"), sched)
    assert oracle.expected_cost == pytest.approx(2.0, rel=1e-9)
    est = mc_expected_cost(geometric_coin_process(dist), sched, trials=30_000, seed=2)
    assert abs(est.mean - oracle.expected_cost) <= 5.0 * est.std_error


def test_bitstring_guesser_reproduces_oracle():
    k = 3
    sched = single_threshold_schedule(math.log(3.0))  # six guesses per attempt
    oracle = analysis.analytic_cost(bitstring_guess_model(k), sched)
    assert oracle.expected_cost == pytest.approx(8.0, rel=1e-9)
    est = mc_expected_cost(bitstring_guess_process(k), sched, trials=30_000, seed=3)
    assert abs(est.mean - oracle.expected_cost) <= 5.0 * est.std_error


def test_resumable_consumes_at_most_budget():
    proc = bitstring_guess_process(4)
    for i in range(300):
        out = run_once_truncated(proc, 9.7, stream(13, i))
        assert out.cost <= 9.0
        assert out.cost == math.floor(out.cost)
