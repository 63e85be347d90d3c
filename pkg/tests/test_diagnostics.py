import numpy as np
import pytest

from fracbethe import (
    AlphaAssignment,
    Boundedness,
    GaussianModel,
    boundary_margin,
    classify,
    critical_alpha,
    critical_r,
    diagnostics_report,
    make_k_regular,
    normalize,
    random_model,
    ray_scan,
    spectral,
)
from fracbethe.diagnostics import detect_k_regular

from conftest import random_connected_model


class TestSpectral:
    def test_kregular_closed_form(self):
        nm = normalize(make_k_regular(8, 4, 0.27))
        res = spectral(nm)
        assert res.lambda_max == pytest.approx(4 * 0.27, abs=1e-12)
        assert np.allclose(res.u_max, np.full(8, 1 / np.sqrt(8)), atol=1e-12)
        assert res.connected

    def test_zero_coupling(self):
        nm = normalize(GaussianModel(4, np.zeros(4), np.eye(4)))
        res = spectral(nm)
        assert res.lambda_max == 0.0
        assert res.residual == 0.0

    def test_random_target_placement(self):
        nm = normalize(random_model(8, 0.5, 0.9, seed=17))
        assert spectral(nm).lambda_max == pytest.approx(0.9, abs=1e-9)

    def test_matches_dense_eigensolver(self, rng):
        for _ in range(20):
            nm = normalize(random_connected_model(rng, int(rng.integers(3, 9))))
            res = spectral(nm)
            dense = np.linalg.eigvalsh(np.abs(nm.R))[-1]
            assert res.lambda_max == pytest.approx(dense, abs=1e-10)
            assert np.linalg.norm(np.abs(nm.R) @ res.u_max - res.lambda_max * res.u_max) <= 1e-10

    def test_perron_vector_positive_on_connected(self, rng):
        for _ in range(10):
            nm = normalize(random_connected_model(rng, 7))
            res = spectral(nm)
            assert np.all(res.u_max > 0.0)

    def test_bipartite_support_converges(self):
        # a path graph has a sign-symmetric spectrum; the shift must handle it
        J = np.eye(3)
        J[0, 1] = J[1, 0] = 0.4
        J[1, 2] = J[2, 1] = 0.4
        nm = normalize(GaussianModel(3, np.zeros(3), J))
        res = spectral(nm)
        assert res.lambda_max == pytest.approx(0.4 * np.sqrt(2), abs=1e-11)

    def test_disconnected_reports_per_component(self):
        J = np.eye(4)
        J[0, 1] = J[1, 0] = 0.3
        J[2, 3] = J[3, 2] = 0.7
        nm = normalize(GaussianModel(4, np.zeros(4), J))
        res = spectral(nm)
        assert not res.connected
        assert res.lambda_max == pytest.approx(0.7, abs=1e-12)
        assert len(res.components) == 2
        # the winner's eigenvector is embedded, the rest zeroed
        assert np.allclose(res.u_max[:2], 0.0)
        assert np.all(res.u_max[2:] > 0.0)
        assert np.linalg.norm(np.abs(nm.R) @ res.u_max - res.lambda_max * res.u_max) <= 1e-10


class TestClassify:
    def test_bounded(self):
        nm = normalize(make_k_regular(8, 4, 0.2))
        verdict = classify(nm, AlphaAssignment.uniform(nm, 1.0))
        assert verdict.verdict is Boundedness.BOUNDED
        assert verdict.pairwise_normalizable

    def test_unbounded_for_every_alpha(self):
        nm = normalize(make_k_regular(8, 4, 0.275))
        for alpha in (1e-3, 1.0, 1e3):
            verdict = classify(nm, AlphaAssignment.uniform(nm, alpha))
            assert verdict.verdict is Boundedness.UNBOUNDED
            assert not verdict.pairwise_normalizable

    def test_boundary_flips_at_half_degree(self):
        # spectral value exactly K*r = 1; margin >= 0 iff alpha <= K/2
        nm = normalize(make_k_regular(8, 4, 0.25))
        for alpha, expected in (
            (1.0, Boundedness.BOUNDARY_BOUNDED),
            (2.0, Boundedness.BOUNDARY_BOUNDED),
            (2.0000001, Boundedness.BOUNDARY_UNBOUNDED),
            (4.0, Boundedness.BOUNDARY_UNBOUNDED),
        ):
            verdict = classify(nm, AlphaAssignment.uniform(nm, alpha))
            assert verdict.verdict is expected, alpha

    def test_agrees_with_empirical_ray_behavior(self):
        for r in (0.15, 0.2, 0.24, 0.26, 0.3, 0.4):
            nm = normalize(make_k_regular(8, 4, r))
            alphas = AlphaAssignment.uniform(nm, 1.0)
            verdict = classify(nm, alphas).verdict
            u = spectral(nm).u_max
            values = dict(ray_scan(nm, alphas, u, np.array([10.0, 1e3])))
            empirically_bounded = values[1e3] > values[10.0]
            assert (verdict is Boundedness.BOUNDED) == empirically_bounded

    def test_disconnected_worst_verdict(self):
        J = np.eye(4)
        J[0, 1] = J[1, 0] = 0.3   # bounded block
        J[2, 3] = J[3, 2] = 1.05 - 1.0  # keep PD: weight 0.05
        J[2, 3] = J[3, 2] = 0.99  # unbounded-ish block, still PD (|r| < 1)
        nm = normalize(GaussianModel(4, np.zeros(4), J))
        # second block spectral value 0.99 -> bounded; crank alpha irrelevant
        verdict = classify(nm, AlphaAssignment.uniform(nm, 1.0))
        assert verdict.verdict is Boundedness.BOUNDED
        # now push one block above the threshold via a 3-cycle
        J2 = np.eye(5)
        J2[0, 1] = J2[1, 0] = 0.3
        for i, j in ((2, 3), (3, 4), (2, 4)):
            J2[i, j] = J2[j, i] = 0.6  # cycle block spectral value 1.2
        nm2 = normalize(GaussianModel(5, np.zeros(5), J2))
        verdict2 = classify(nm2, AlphaAssignment.uniform(nm2, 1.0))
        assert verdict2.verdict is Boundedness.UNBOUNDED
        assert verdict2.lambda_max == pytest.approx(1.2, abs=1e-10)


class TestCriticalParameters:
    def test_critical_r_values(self):
        assert critical_r(4, 1.0) == pytest.approx(1.0 / (2.0 * np.sqrt(3.0)), abs=1e-12)
        assert critical_r(4, 2.0) == pytest.approx(0.25, abs=1e-15)

    def test_critical_r_blows_up_at_small_alpha(self):
        assert critical_r(4, 1e-8) > 1e3

    def test_critical_r_domain(self):
        with pytest.raises(ValueError):
            critical_r(4, 4.0)
        with pytest.raises(ValueError):
            critical_r(4, 0.0)

    def test_critical_alpha_values(self):
        assert critical_alpha(4, 0.27) == pytest.approx(1.2445897016899576, abs=1e-10)
        assert critical_alpha(4, 0.25) == pytest.approx(2.0, abs=1e-12)

    def test_critical_alpha_domain(self):
        with pytest.raises(ValueError):
            critical_alpha(4, 0.2)

    def test_inverse_consistency(self):
        for K in (3, 4, 6):
            for r in (0.26, 0.3, 0.5, 0.9):
                if K * r <= 1.0:
                    continue
                assert critical_r(K, critical_alpha(K, r)) == pytest.approx(r, abs=1e-10)


class TestBoundaryMargin:
    def test_uniform_formula(self, rng):
        nm = normalize(random_connected_model(rng, 7))
        E = len(nm.edges)
        alpha = 1.7
        assert boundary_margin(nm, AlphaAssignment.uniform(nm, alpha)) == pytest.approx(
            E / alpha - 7, abs=1e-12
        )

    def test_four_regular_alpha_two_is_exact_boundary(self):
        nm = normalize(make_k_regular(8, 4, 0.25))
        assert boundary_margin(nm, AlphaAssignment.uniform(nm, 2.0)) == pytest.approx(0.0, abs=1e-14)

    def test_huge_alpha_tends_to_minus_n(self):
        nm = normalize(make_k_regular(8, 4, 0.25))
        assert boundary_margin(nm, AlphaAssignment.uniform(nm, 1e12)) == pytest.approx(-8.0, abs=1e-9)


class TestReport:
    def test_kregular_detection(self):
        nm = normalize(make_k_regular(8, 4, 0.27))
        assert detect_k_regular(nm) == (4, 0.27)
        nm2 = normalize(GaussianModel(3, np.zeros(3), np.array(
            [[1.0, 0.2, 0.0], [0.2, 1.0, 0.3], [0.0, 0.3, 1.0]])))
        assert detect_k_regular(nm2) is None

    def test_report_fields(self):
        nm = normalize(make_k_regular(8, 4, 0.27))
        report = diagnostics_report(nm, AlphaAssignment.uniform(nm, 1.0))
        assert report["lambda_max"] == pytest.approx(1.08, abs=1e-12)
        assert report["verdict"] == "Unbounded"
        assert not report["pairwise_normalizable"]
        assert report["critical_alpha"] == pytest.approx(1.24459, abs=1e-5)
        assert report["critical_r"] == pytest.approx(0.288675, abs=1e-6)

    def test_report_bounded_case(self):
        nm = normalize(make_k_regular(8, 4, 0.2))
        report = diagnostics_report(nm, AlphaAssignment.uniform(nm, 1.0))
        assert report["lambda_max"] == pytest.approx(0.8, abs=1e-12)
        assert report["verdict"] == "Bounded"
        assert report["pairwise_normalizable"]
        assert "critical_alpha" not in report  # needs K*r >= 1

    def test_report_diagonal_model(self):
        nm = normalize(GaussianModel(3, np.zeros(3), np.eye(3)))
        report = diagnostics_report(nm, AlphaAssignment.uniform(nm, 1.0))
        assert report["lambda_max"] == 0.0
        assert report["verdict"] == "Bounded"
        assert "critical_r" not in report
