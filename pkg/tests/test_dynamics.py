import math

import numpy as np
import pytest

from rpflab.config_space import Configuration
from rpflab.dynamics import (SdeState, StepFailureError, drift,
                             invariance_report, simulate_isde)
from rpflab.ensembles import log_density
from rpflab.rng import stream


class TestDrift:
    def test_single_particle_raw(self):
        # beta=2 confinement is x^2/2, so the drift at x=2 is -1
        assert drift([2.0], 2.0, 1, "raw")[0] == pytest.approx(-1.0)

    def test_pair_antisymmetry(self):
        for a in (0.5, 1.0, 3.0):
            d = drift([-a, a], 2.0, 2, "raw")
            assert d[0] == pytest.approx(-d[1], rel=1e-14)

    def test_matches_log_density_gradient(self):
        # drift = (1/2) * grad log density, by central differences
        rng = stream(41, 0)
        for kind in ("raw", "bulk", "softedge"):
            for _ in range(35):
                n = int(rng.integers(2, 7))
                xs = np.sort(rng.uniform(-4, 4, n))
                while np.min(np.diff(xs)) < 0.1:
                    xs = np.sort(rng.uniform(-4, 4, n))
                d = drift(xs, 2.0, n, kind)
                h = 1e-5
                for i in range(n):
                    up, dn = xs.copy(), xs.copy()
                    up[i] += h
                    dn[i] -= h
                    fd = (log_density(2.0, n, kind, Configuration.from_reals(up))
                          - log_density(2.0, n, kind, Configuration.from_reals(dn))) / (2 * h)
                    assert d[i] == pytest.approx(0.5 * fd, rel=1e-6, abs=1e-6)

    def test_coincident_rejected(self):
        with pytest.raises(ValueError):
            drift([1.0, 1.0], 2.0, 2, "raw")


class TestSimulate:
    def test_determinism(self):
        init = [-1.0, 0.5, 2.0]
        a = simulate_isde(init, 2.0, 3, "raw", 1e-3, 0.05, seed=9)
        b = simulate_isde(init, 2.0, 3, "raw", 1e-3, 0.05, seed=9)
        assert a.times == b.times
        assert all(np.array_equal(x, y) for x, y in zip(a.states, b.states))

    def test_ordering_preserved(self):
        traj = simulate_isde([-0.2, 0.0, 0.4], 2.0, 3, "raw", 5e-4, 0.2, seed=3)
        for xs in traj.states:
            assert np.all(np.diff(xs) > 0)

    def test_zero_noise_repulsion_sign(self):
        # two close particles, no noise: the gap must open monotonically
        traj = simulate_isde([-0.05, 0.05], 2.0, 2, "raw", 1e-4, 0.05,
                             seed=0, noise_scale=0.0)
        gaps = [xs[1] - xs[0] for xs in traj.states]
        assert all(g2 > g1 for g1, g2 in zip(gaps, gaps[1:]))

    def test_timestamps_multiples(self):
        traj = simulate_isde([0.0], 2.0, 1, "raw", 1e-3, 0.1, seed=1,
                             sample_interval=0.02)
        expect = [0.0] + [round(0.02 * k, 10) for k in range(1, 6)]
        assert np.allclose(traj.times, expect)

    def test_ou_stationary_variance(self):
        # n=1, beta=2: Ornstein-Uhlenbeck with rate 1/2, stationary var 2/beta
        rng = stream(41, 1)
        finals = []
        for rep in range(400):
            x0 = float(rng.normal())
            traj = simulate_isde([x0], 2.0, 1, "raw", 5e-3, 6.0,
                                 seed=77, replica=rep)
            finals.append(traj.final()[0])
        var = np.var(finals, ddof=1)
        se = var * math.sqrt(2.0 / (len(finals) - 1))
        assert abs(var - 1.0) <= 3.5 * se

    def test_validation(self):
        with pytest.raises(ValueError):
            simulate_isde([0.0, 1.0], 2.0, 2, "raw", 0.0, 1.0, seed=0)
        with pytest.raises(ValueError):
            simulate_isde([1.0, 0.0], 2.0, 2, "raw", 1e-3, 1.0, seed=0)

    def test_exchange_symmetry(self):
        # permuting labels then sorting yields the identical path because
        # the initial state is sorted either way
        init = [0.3, -1.2, 1.1]
        a = simulate_isde(sorted(init), 2.0, 3, "raw", 1e-3, 0.05, seed=5)
        b = simulate_isde(Configuration.from_reals(init), 2.0, 3, "raw",
                          1e-3, 0.05, seed=5)
        assert all(np.array_equal(x, y) for x, y in zip(a.states, b.states))


class TestSdeState:
    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            SdeState(positions=(1.0, 1.0))
        SdeState(positions=(0.0, 1.0))


class TestInvariance:
    def test_time_zero_all_zero(self):
        report = invariance_report(2.0, 6, "raw", 1e-3, 0.0, 30, seed=13)
        for stat in report["stats"].values():
            assert stat["z_mean"] == 0.0
            assert stat["z_var"] == 0.0
        assert report["verdict_all_z_within_3"]

    def test_short_run_stationary(self):
        report = invariance_report(2.0, 8, "raw", 2e-3, 0.3, 120, seed=17)
        assert report["max_abs_z"] <= 3.5, report["stats"]

    def test_wrong_drift_sign_blows_up(self):
        # negative control: flipped drift turns repulsion attractive, so the
        # stationarity test must either report huge z-scores or hit a
        # finite-time collision the stepper cannot resolve
        try:
            report = invariance_report(2.0, 8, "raw", 2e-3, 0.5, 60, seed=19,
                                       drift_sign=-1.0)
        except StepFailureError:
            return
        assert report["max_abs_z"] > 5.0

    def test_worker_count_invariance(self):
        a = invariance_report(2.0, 5, "raw", 2e-3, 0.1, 20, seed=23, workers=1)
        b = invariance_report(2.0, 5, "raw", 2e-3, 0.1, 20, seed=23, workers=4)
        assert a == b
