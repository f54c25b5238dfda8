import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochastic_spacetime.core import ParameterDomainError
from stochastic_spacetime.rng import RngStream
from stochastic_spacetime.stochastic_walk import (
    VenueState,
    WalkConfig,
    birthday_merges,
    helix_time,
    merge_statistics,
    path_rows,
    run_walk,
    step,
    walker_stream,
    wiener_terminal,
)

unit = st.floats(0, 1)


@given(st.tuples(unit, unit, unit, unit), unit, st.booleans(), unit, st.integers(0, 1000))
def test_kernel_matches_reference_step(measures, u, ds2, rev, seed):
    cfg = WalkConfig(measures, u, ds2_conservation=ds2, steps=15, sequence_reversal_rate=rev)
    rng = RngStream(seed, 7)
    summary = run_walk(cfg, 3, rng)
    for w in range(3):
        state, r = VenueState(), walker_stream(rng, w)
        for _ in range(cfg.steps):
            state, r = step(state, cfg, r)
        assert [*state.spatial, state.t_coord] == summary.terminal_positions[w].tolist()
        assert state.tau_phase == summary.tau_phase[w]
        assert state.helix_rung == summary.helix_rung[w]


@pytest.mark.parametrize("u", [1.0, 0.5])
@pytest.mark.parametrize("ds2", [False, True])
def test_displacement_variance(u, ds2):
    n = 100
    s = run_walk(WalkConfig(indeterminacy=u, ds2_conservation=ds2, steps=n), 20_000, RngStream(1))
    # fair steps have zero mean, so a random number of moves adds no variance
    expected = np.array([u * n] * 3 + [(3 if ds2 else 1) * u * n])
    np.testing.assert_allclose(s.displacement_variance, expected, rtol=0.05)
    np.testing.assert_allclose(s.mean_displacement, 0, atol=4 * math.sqrt(expected.max() / 20_000))


def test_biased_drift_and_reversal():
    n = 200
    cfg = WalkConfig((0.8, 0.5, 0.5, 0.5), steps=n)
    s = run_walk(cfg, 5000, RngStream(2))
    assert abs(s.mean_displacement[0] - 0.6 * n) < 2
    flipped = run_walk(WalkConfig((0.8, 0.5, 0.5, 0.5), steps=n, sequence_reversal_rate=1.0), 5000, RngStream(2))
    assert abs(flipped.mean_displacement[0] + 0.6 * n) < 2


def test_migration_counts_and_phase():
    s = run_walk(WalkConfig(indeterminacy=0.7, ds2_conservation=True, steps=50), 500, RngStream(3))
    np.testing.assert_array_equal(s.time_migrations, s.space_migrations)
    np.testing.assert_array_equal(s.tau_phase, s.time_migrations % 6)
    np.testing.assert_array_equal(s.helix_rung, s.time_migrations)


def test_superluminal_fractions():
    s = run_walk(WalkConfig(indeterminacy=0.6, steps=100), 5000, RngStream(4))
    assert abs(s.superluminal_fraction - 0.6) < 0.01
    s2 = run_walk(WalkConfig(ds2_conservation=True, steps=100), 5000, RngStream(4))
    # |dt| is 3 with probability 1/4, otherwise 1
    assert abs(s2.superluminal_fraction - 0.75) < 0.01
    assert s2.superluminal_fraction_coarse < s.superluminal_fraction_coarse


def test_zero_indeterminacy_freezes():
    s = run_walk(WalkConfig(indeterminacy=0.0, steps=30), 10, RngStream(5), start=VenueState((1, 2, 3), 4, 5))
    assert s.terminal_positions.tolist() == [[1, 2, 3, 4]] * 10
    assert s.superluminal_fraction == 0


def test_paths_recorded():
    s = run_walk(WalkConfig(steps=5), 10, RngStream(6), record_walkers=2)
    rows = list(path_rows(s))
    assert len(rows) == 2 * 6
    assert rows[0] == (0, 0, 0, 0, 0, 0, 0)
    assert rows[5][2:6] == tuple(s.terminal_positions[0])


def test_same_seed_same_walk():
    cfg = WalkConfig(steps=20)
    a = run_walk(cfg, 100, RngStream(9))
    b = run_walk(cfg, 100, RngStream(9))
    c = run_walk(cfg, 100, RngStream(10))
    assert np.array_equal(a.terminal_positions, b.terminal_positions)
    assert not np.array_equal(a.terminal_positions, c.terminal_positions)


def test_config_validation():
    with pytest.raises(ParameterDomainError):
        WalkConfig(measures=(0.5, 0.5, 0.5))
    with pytest.raises(ParameterDomainError):
        WalkConfig(indeterminacy=1.2)
    with pytest.raises(ParameterDomainError):
        run_walk(WalkConfig(), 0, RngStream(0))


def test_helix_time():
    t_c, angle, rep = helix_time(VenueState(t_coord=2, tau_phase=0))
    assert rep == complex(t_c, 0) and angle == 0
    t_c, angle, rep = helix_time(VenueState(t_coord=2, tau_phase=3))
    assert abs(angle - math.pi) < 1e-15
    assert abs(rep + t_c) < 1e-12 * t_c


def test_frozen_merges_equal_static_collisions():
    extent = (5, 5, 5)
    starts = np.array([[0, 0, 0], [0, 0, 0], [1, 0, 0], [1, 0, 0], [1, 0, 0], [4, 4, 4]])
    cfg = WalkConfig(indeterminacy=0.0, steps=7)
    assert merge_statistics(cfg, 6, extent, RngStream(0), starts=starts) == 7 * 3
    empty = np.array([True, False, True, True, False, True])
    assert merge_statistics(cfg, 6, extent, RngStream(0), starts=starts, empty=empty) == 7 * 1


def test_merge_trivial_cases():
    cfg = WalkConfig(indeterminacy=0.0, steps=13)
    assert merge_statistics(cfg, 1, (5, 5, 5), RngStream(0)) == 0
    assert merge_statistics(cfg, 2, (5, 5, 5), RngStream(0), starts=np.zeros((2, 3))) == 13


def test_moving_merges_match_birthday_oracle():
    # a periodic walk keeps uniform placement uniform, so every step is a fresh
    # birthday problem; steps are correlated, so the spread is taken across seeds
    runs = [merge_statistics(WalkConfig(steps=1000), 1000, (10, 10, 10), RngStream(s)) for s in range(20)]
    mean, _ = birthday_merges(1000, 1000)
    assert abs(np.mean(runs) - 1000 * mean) < 3 * np.std(runs, ddof=1) / math.sqrt(20)


def test_merges_match_birthday_at_rest():
    extent = (4, 4, 4)
    n = 100
    totals = [merge_statistics(WalkConfig(indeterminacy=0.0, steps=1), n, extent, RngStream(s)) for s in range(200)]
    mean, sd = birthday_merges(n, 64)
    assert abs(np.mean(totals) - mean) < 4 * sd / math.sqrt(200)


def test_wiener_normalisations():
    x = wiener_terminal(256, 20_000, RngStream(8))
    assert abs(x.var() - 1) < 0.05
    y = wiener_terminal(256, 20_000, RngStream(8), normalization="sqrt_i")
    h = sum(1 / i for i in range(1, 257))
    assert abs(y.var() / h - 1) < 0.05
    with pytest.raises(ParameterDomainError):
        wiener_terminal(4, 4, RngStream(0), normalization="sqrt")
