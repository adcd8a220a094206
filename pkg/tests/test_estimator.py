import numpy as np
import pytest

from rpflab.config_space import Configuration
from rpflab.ensembles import EnsembleSpec, sample_many
from rpflab.estimator import BinnedEstimate, compare_to_prediction, estimate_correlation

from conftest import poisson_replicas


class TestOrderOne:
    def test_poisson_unit_intensity(self):
        reps = poisson_replicas(1.0, -5.0, 5.0, 400, seed=31)
        est = estimate_correlation(reps, 1, np.linspace(-4, 4, 17))
        for val, err in zip(est.estimate, est.stderr):
            assert abs(val - 1.0) <= 3.0 * err

    def test_deterministic_single_point(self):
        reps = [Configuration.from_reals([0.0]) for _ in range(10)]
        est = estimate_correlation(reps, 1, [-0.25, -0.05, 0.05, 0.25])
        assert est.estimate[1] == pytest.approx(1.0 / 0.1, rel=1e-12)
        assert est.stderr[1] == 0.0
        assert est.estimate[0] == est.estimate[2] == 0.0

    def test_integral_equals_mean_count(self):
        reps = poisson_replicas(0.7, -3.0, 3.0, 50, seed=5)
        edges = np.linspace(-3, 3, 25)
        est = estimate_correlation(reps, 1, edges)
        integral = float(np.sum(est.estimate * est.widths()))
        mean_count = np.mean([sum(1 for p in c if -3 <= p.real < 3) for c in reps])
        assert integral == pytest.approx(mean_count, rel=1e-12)

    def test_replica_permutation_invariance(self):
        reps = poisson_replicas(1.0, -2.0, 2.0, 20, seed=8)
        edges = np.linspace(-2, 2, 9)
        a = estimate_correlation(reps, 1, edges)
        b = estimate_correlation(list(reversed(reps)), 1, edges)
        assert np.array_equal(a.estimate, b.estimate)
        assert np.allclose(a.stderr, b.stderr)


class TestOrderTwo:
    def test_one_point_process_has_zero_diagonal(self):
        # factorial moment s(A)(s(A)-1) kills single occupancy exactly
        reps = [Configuration.from_reals([0.0]) for _ in range(10)]
        est = estimate_correlation(reps, 2, [-0.5, 0.5])
        assert est.estimate[0, 0] == 0.0

    def test_independent_bins_factorize(self):
        reps = poisson_replicas(2.0, -1.0, 1.0, 3000, seed=13)
        est = estimate_correlation(reps, 2, [-1.0, 0.0, 1.0])
        # Poisson: rho2 = intensity^2 everywhere, incl. the diagonal
        for i in range(2):
            for j in range(2):
                assert abs(est.estimate[i, j] - 4.0) <= 4.0 * est.stderr[i, j] + 0.05


class TestValidation:
    def test_requires_two_replicas(self):
        with pytest.raises(ValueError):
            estimate_correlation([Configuration()], 1, [0, 1])

    def test_order_checked(self):
        reps = [Configuration(), Configuration()]
        with pytest.raises(ValueError):
            estimate_correlation(reps, 3, [0, 1])

    def test_edges_checked(self):
        reps = [Configuration(), Configuration()]
        with pytest.raises(ValueError):
            estimate_correlation(reps, 1, [1.0, 0.5])


class TestCompare:
    def _flat_estimate(self):
        edges = np.linspace(0, 1, 6)
        est = BinnedEstimate(edges=edges, estimate=np.ones(5),
                             stderr=np.full(5, 0.1), replicas=4, order=1)
        return est

    def test_exact_match_zero_z(self):
        est = self._flat_estimate()
        report = compare_to_prediction(est, lambda x: 1.0)
        assert np.all(report.z == 0.0)
        assert report.frac_within_3 == 1.0

    def test_exact_match_with_zero_stderr(self):
        edges = np.linspace(0, 1, 3)
        est = BinnedEstimate(edges=edges, estimate=np.ones(2),
                             stderr=np.zeros(2), replicas=4, order=1)
        report = compare_to_prediction(est, lambda x: 1.0)
        assert np.all(report.z == 0.0)

    def test_shifted_bin_reports_five(self):
        est = self._flat_estimate()
        shifted = BinnedEstimate(edges=est.edges,
                                 estimate=est.estimate + np.array([0, 0, 0.5, 0, 0]),
                                 stderr=est.stderr, replicas=4, order=1)
        report = compare_to_prediction(shifted, lambda x: 1.0)
        assert report.z[2] == pytest.approx(5.0)
        assert report.max_abs_z == pytest.approx(5.0)


class TestLocalBoundProbe:
    def test_window_intensity_bounded_in_n(self):
        # soft-edge one-point estimates on {|x| < 1} stay under a fixed
        # ceiling as n grows; empirical counterpart of local boundedness
        edges = np.linspace(-1, 1, 11)
        peak = {}
        for n in (50, 100, 200, 500):
            spec = EnsembleSpec(beta=2, n=n, scaling="softedge", seed=17)
            est = estimate_correlation(sample_many(spec, 80), 1, edges)
            peak[n] = float(np.max(est.estimate))
        assert all(v <= 1.0 for v in peak.values()), peak
