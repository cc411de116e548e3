"""Warmup adaptation: the move statistic, stepsize search, mass estimates."""

import numpy as np
import pytest

from dhmc import (ContractError, KernelTrace, PhaseState, SamplerConfig,
                  TuneState, adapt_stepsize, dhmc_transition, estimate_mass,
                  flip_statistic)
from dhmc.models import Ar1Target, GridTarget
from dhmc.tuning import mass_from_state

from conftest import FlatTarget, all_disc_state


def _trace(flips, updates):
    return KernelTrace(accepted=True, delta_H=0.0, flips=flips,
                       potential_evals=updates, eps_used=0.5,
                       coord_updates=updates)


# ------------------------------------------------------------ flip_statistic


def test_flip_statistic_weights_by_update_totals():
    traces = [_trace(1, 2), _trace(0, 8)]
    # totals: 1 flip over 10 updates, not the mean of (0.5, 1.0)
    assert flip_statistic(traces) == pytest.approx(0.9)


def test_flip_statistic_total_override_and_empty():
    assert flip_statistic([_trace(1, 2)], total_updates=4) == pytest.approx(0.75)
    with pytest.raises(ContractError):
        flip_statistic([_trace(0, 0)])
    with pytest.raises(ContractError):
        flip_statistic([])


def test_flat_target_never_flips():
    model = FlatTarget(dim=2)
    cfg = SamplerConfig(kernel="dhmc", eps_range=(0.5, 0.5), path_len=1)
    rng = np.random.default_rng(0)
    state = all_disc_state([0.0, 0.0], [1.0, -1.0])
    traces = []
    for _ in range(50):
        state, trace = dhmc_transition(model, state, cfg, rng)
        traces.append(trace)
    assert flip_statistic(traces) == 1.0


def test_single_cell_target_always_flips():
    # jump size 2 always clears the unit-width support, so every proposal
    # runs into the wall
    model = GridTarget.from_probs([1.0])
    cfg = SamplerConfig(kernel="dhmc", eps_range=(2.0, 2.0), path_len=1)
    rng = np.random.default_rng(0)
    state = all_disc_state([1.5], [1.0])
    traces = []
    for _ in range(50):
        state, trace = dhmc_transition(model, state, cfg, rng)
        traces.append(trace)
    assert flip_statistic(traces) == 0.0


# ------------------------------------------------------------ adapt_stepsize


def test_adapt_first_step_gain_is_one():
    ts = TuneState(log_eps=0.0, target_stat=0.8)
    ts = adapt_stepsize(ts, 1.0)
    assert ts.log_eps == pytest.approx(0.2)
    assert ts.iteration == 1
    ts = adapt_stepsize(ts, 0.0)
    assert ts.log_eps == pytest.approx(0.2 + 2.0 ** -0.6 * (-0.8))
    assert ts.iteration == 2


def test_adapt_direction_and_fixed_point():
    ts = TuneState(log_eps=1.0, target_stat=0.8)
    assert adapt_stepsize(ts, 0.9).log_eps > 1.0
    assert adapt_stepsize(ts, 0.5).log_eps < 1.0
    assert adapt_stepsize(ts, 0.8).log_eps == 1.0


def test_adapt_validation():
    ts = TuneState(log_eps=0.0)
    with pytest.raises(ContractError):
        adapt_stepsize(ts, -0.1)
    with pytest.raises(ContractError):
        adapt_stepsize(ts, 1.1)
    with pytest.raises(ContractError):
        TuneState(log_eps=0.0, target_stat=0.0)
    with pytest.raises(ContractError):
        TuneState(log_eps=0.0, target_stat=1.0)
    assert TuneState(log_eps=np.log(0.25)).eps == pytest.approx(0.25)


def test_stepsize_search_finds_deterministic_root():
    # response stat(eps) = 1 - eps/2 crosses the 0.8 target at eps = 0.4
    ts = TuneState(log_eps=np.log(0.1), target_stat=0.8)
    for _ in range(2000):
        stat = min(1.0, max(0.0, 1.0 - 0.5 * ts.eps))
        ts = adapt_stepsize(ts, stat)
    assert abs(ts.eps - 0.4) / 0.4 <= 0.01


def test_stepsize_search_tolerates_noise():
    rng = np.random.default_rng(42)
    ts = TuneState(log_eps=np.log(0.1), target_stat=0.8)
    for _ in range(2000):
        stat = min(1.0, max(0.0, 1.0 - 0.5 * ts.eps + rng.uniform(-0.1, 0.1)))
        ts = adapt_stepsize(ts, stat)
    assert abs(ts.eps - 0.4) / 0.4 <= 0.05


# ------------------------------------------------------------- estimate_mass


def test_estimate_mass_inverse_sd_and_inverse_var():
    rng = np.random.default_rng(1)
    col = rng.normal(size=50)
    col = col / col.std(ddof=1)
    draws = np.column_stack([2.0 * col, 2.0 * col])  # sample sd exactly 2
    mass, warnings = estimate_mass(draws, [0], [1])
    assert warnings == []
    assert mass.diag_smooth[0] == pytest.approx(0.25, rel=1e-12)
    assert mass.m_disc[0] == pytest.approx(0.5, rel=1e-12)


def test_estimate_mass_constant_coordinate_warns():
    rng = np.random.default_rng(2)
    draws = np.column_stack([rng.normal(size=20), np.full(20, 3.0)])
    mass, warnings = estimate_mass(draws, [], [0, 1])
    assert mass.m_disc[1] == 1.0
    assert warnings == ["coordinate 1 constant; mass set to 1"]


def test_estimate_mass_scale_equivariance():
    rng = np.random.default_rng(3)
    draws = rng.normal(size=(40, 2))
    base, _ = estimate_mass(draws, [0], [1])
    scaled, _ = estimate_mass(3.0 * draws, [0], [1])
    assert scaled.diag_smooth[0] == pytest.approx(base.diag_smooth[0] / 9.0)
    assert scaled.m_disc[0] == pytest.approx(base.m_disc[0] / 3.0)


def test_estimate_mass_validation():
    with pytest.raises(ContractError):
        estimate_mass(np.zeros((9, 2)), [0], [1])
    with pytest.raises(ContractError):
        estimate_mass(np.zeros(20), [0], [])


def test_estimate_mass_on_stationary_ar1_draws():
    model = Ar1Target(alpha=0.9, dim=5)
    rng = np.random.default_rng(7)
    draws = np.array([model.initial_theta(rng) for _ in range(400)])
    mass, warnings = estimate_mass(draws, np.arange(5), [])
    assert warnings == []
    # unit marginal variance, so every mass should sit near 1
    np.testing.assert_allclose(mass.diag_smooth, 1.0, rtol=0.2)


# ----------------------------------------------------- streaming accumulators


def test_welford_matches_batch_variance():
    rng = np.random.default_rng(5)
    draws = rng.normal(size=(200, 3)) * [1.0, 2.0, 0.3]
    ts = TuneState(log_eps=0.0)
    for row in draws:
        ts = ts.observe_draw(row)
    assert ts.count == 200
    np.testing.assert_allclose(ts.variances(),
                               draws.var(axis=0, ddof=1), atol=1e-10)
    stream, _ = mass_from_state(ts, [0, 1], [2])
    batch, _ = estimate_mass(draws, [0, 1], [2])
    np.testing.assert_allclose(stream.diag_smooth, batch.diag_smooth,
                               rtol=1e-10)
    np.testing.assert_allclose(stream.m_disc, batch.m_disc, rtol=1e-10)


def test_streaming_count_preconditions():
    ts = TuneState(log_eps=0.0)
    with pytest.raises(ContractError):
        ts.variances()
    ts = ts.observe_draw(np.array([1.0]))
    with pytest.raises(ContractError):
        ts.variances()
    with pytest.raises(ContractError):
        mass_from_state(ts, [0], [])
