import numpy as np
import pytest

from openrcd.config import ExperimentConfig
from openrcd.functions import ConvexityCertificate, make_quadratic
from openrcd.opensim import (
    EventSchedule,
    _simulate_quadratic_batch,
    initial_system_state,
    run_ensemble,
    run_trajectory,
    step,
)


def fig1_config(**overrides):
    base = dict(
        n=5, alpha=1.0, beta=1.2, budget=1.0, p_update=0.95,
        horizon=200, replications=1, seed=42,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_event_schedule_probabilities():
    s = EventSchedule(0.95)
    assert s.p_replace == pytest.approx(0.05)
    assert s.edge_probability(5) == pytest.approx(2 * 0.95 / 20)
    assert s.agent_probability(5) == pytest.approx(0.05 / 5)


def test_initial_state_modes():
    cfg = fig1_config(initial_state="uniform_budget")
    st = initial_system_state(cfg, np.random.default_rng(0))
    assert np.allclose(st.allocation.values, 0.2)

    cfg = fig1_config(initial_state="minimizer")
    st = initial_system_state(cfg, np.random.default_rng(0))
    grads = [f.gradient(v) for f, v in zip(st.roster, st.allocation.values)]
    assert np.ptp(grads) < 1e-8

    cfg = fig1_config(initial_state=(0.5, 0.5, 0.0, 0.0, 0.0))
    st = initial_system_state(cfg, np.random.default_rng(0))
    assert np.array_equal(st.allocation.values, [0.5, 0.5, 0.0, 0.0, 0.0])


def test_initial_state_consumes_two_uniforms_per_agent():
    cfg = fig1_config()
    r1 = np.random.default_rng(9)
    r2 = np.random.default_rng(9)
    initial_system_state(cfg, r1)
    r2.random(2 * cfg.n)
    assert r1.random() == r2.random()


def test_step_event_shapes():
    cfg = fig1_config()
    rng = np.random.default_rng(1)
    state = initial_system_state(cfg, rng)
    saw_update = saw_replace = False
    for _ in range(200):
        before = state.allocation.values
        roster_before = state.roster
        state, event = step(state, EventSchedule(cfg.p_update), rng)
        if event[0] == "update":
            saw_update = True
            assert state.roster is roster_before
        else:
            saw_replace = True
            agent = event[1]
            # a replacement leaves every estimate bit-identical
            assert np.array_equal(state.allocation.values, before)
            assert state.roster[agent] is not roster_before[agent]
    assert saw_update and saw_replace


def test_trajectory_matches_batch_engine_bitwise():
    for cfg, seed in [
        (fig1_config(), 123),
        (fig1_config(n=3, horizon=150, budget=-2.0, p_update=0.8), 7),
    ]:
        rec = run_trajectory(cfg, seed=seed)
        out = _simulate_quadratic_batch(cfg, np.array([seed]))
        assert np.array_equal(rec.error, out.error[0])
        assert np.array_equal(rec.final_state.allocation.values, out.final_values[0])


def test_single_replication_ensemble_equals_trajectory():
    cfg = fig1_config()
    rec = run_trajectory(cfg, seed=42)
    stats = run_ensemble(cfg, replications=1, base_seed=42)
    assert np.array_equal(stats.mean_error, rec.error)
    assert np.all(stats.ci_halfwidth == 0.0)


def test_trajectory_row_semantics():
    cfg = fig1_config(horizon=300)
    rec = run_trajectory(cfg, seed=5)
    assert rec.event[0] == "init"
    assert rec.k[0] == 0 and rec.k[-1] == 300
    for k, ev in enumerate(rec.event):
        if ev == "replace":
            assert rec.minimizer_shift[k] >= 0.0
        elif ev == "update":
            assert rec.minimizer_shift[k] == 0.0
    assert np.all(rec.suboptimality >= -1e-12)
    assert "replace" in rec.event and "update" in rec.event


def test_horizon_zero_trajectory():
    cfg = fig1_config(horizon=0)
    rec = run_trajectory(cfg, seed=0)
    assert rec.k.size == 1
    assert rec.event == ("init",)


def test_event_frequency_close_to_p_update():
    cfg = fig1_config(horizon=100, p_update=0.95)
    out = _simulate_quadratic_batch(cfg, np.arange(1000), collect_update_mask=True)
    freq = float(out.update_mask.mean())
    assert abs(freq - 0.95) < 0.005


def test_closed_system_contracts_at_published_rate():
    # p_update=1: no replacements, mean error decays at least as fast as
    # the closed-system factor predicts (statistical check, 3000 chains)
    cfg = fig1_config(p_update=1.0, horizon=60)
    stats = run_ensemble(cfg, replications=3000, base_seed=11)
    rate = 1.0 - (1.0 / 1.2) * 1.0 / (cfg.n - 1)
    bound = stats.mean_error[0] * rate ** np.arange(61)
    assert np.all(stats.mean_error <= bound * 1.05 + 1e-12)
    assert stats.replacement_count == 0


def test_feasibility_drift_stays_tiny():
    # one vectorized run covering 2000 chains x 500 steps = 1e6 updates
    cfg = fig1_config(horizon=500, p_update=0.9)
    out = _simulate_quadratic_batch(cfg, np.arange(2000))
    drift = np.abs(out.final_values.sum(axis=1) - cfg.budget)
    assert float(drift.max()) < 1e-12


def test_mean_error_dominates_conditional_update_mean():
    # restricted to update steps the error contracts on average
    cfg = fig1_config(horizon=80, p_update=0.9)
    out = _simulate_quadratic_batch(cfg, np.arange(4000), collect_update_mask=True)
    before = out.error[:, :-1][out.update_mask]
    after = out.error[:, 1:][out.update_mask]
    assert after.mean() < before.mean()


def test_thread_count_does_not_change_results(monkeypatch):
    cfg = fig1_config(horizon=100)
    monkeypatch.setenv("OPENRCD_THREADS", "1")
    a = run_ensemble(cfg, replications=2500, base_seed=3)
    monkeypatch.setenv("OPENRCD_THREADS", "4")
    b = run_ensemble(cfg, replications=2500, base_seed=3)
    assert np.array_equal(a.mean_error, b.mean_error)
    assert np.array_equal(a.ci_halfwidth, b.ci_halfwidth)
    assert a.replacement_count == b.replacement_count
    assert a.max_replacement_shift == b.max_replacement_shift


def test_logcosh_family_trajectory_runs():
    cfg = fig1_config(
        alpha=2.0, beta=3.0, horizon=120, function_family="logcosh_quadratic",
    )
    rec = run_trajectory(cfg, seed=2)
    assert np.all(np.isfinite(rec.error))
    assert np.all(np.isfinite(rec.suboptimality))
    assert rec.final_state.allocation.values.sum() == pytest.approx(1.0, abs=1e-9)


def test_custom_replacement_sampler_is_used():
    cert_seen = []

    def sampler(rng, certificate):
        cert_seen.append(certificate)
        rng.random(2)
        return make_quadratic(0.5, 0.0, certificate)

    cfg = fig1_config(p_update=0.0, horizon=5)
    rec = run_trajectory(cfg, seed=1, replacement_sampler=sampler)
    assert len(cert_seen) == 5
    assert all(c == ConvexityCertificate(1.0, 1.2) for c in cert_seen)
    assert all(ev == "replace" for ev in rec.event[1:])
