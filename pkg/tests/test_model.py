import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracbethe import (
    GaussianModel,
    load_model,
    make_k_regular,
    normalize,
    random_model,
    r_valid,
    save_model,
    validate,
)
from fracbethe.errors import GenerationError, InvalidModelError
from fracbethe.exact import exact_marginals

from conftest import random_connected_model


class TestValidate:
    def test_identity_passes(self):
        report = validate(GaussianModel(3, np.zeros(3), np.eye(3)))
        assert report.ok

    def test_indefinite_2x2_fails_pd(self):
        # eigenvalues 1 +- 2
        report = validate(GaussianModel(2, np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]])))
        assert not report.positive_definite
        assert report.symmetric and report.edges_consistent

    def test_asymmetric_fails(self):
        J = np.array([[1.0, 0.1], [0.2, 1.0]])
        report = validate(GaussianModel(2, np.zeros(2), J, edges=((0, 1),)))
        assert not report.symmetric
        assert report.symmetry_defect == pytest.approx(0.1)

    def test_edge_set_mismatch_detected(self):
        J = np.array([[1.0, 0.5], [0.5, 1.0]])
        report = validate(GaussianModel(2, np.zeros(2), J, edges=()))
        assert not report.edges_consistent

    def test_kregular_pd_iff_adjacency_spectrum_allows(self):
        # oracle: eigendecompose the adjacency and check min(1 + r*lam) > 0
        r = 0.27
        model = make_k_regular(8, 4, r)
        adjacency = (model.J - np.eye(8)) / r
        expected = np.min(1.0 + r * np.linalg.eigvalsh(adjacency)) > 0.0
        assert validate(model).positive_definite == expected
        assert expected  # this particular model is valid


class TestNormalize:
    def test_unit_diagonal_is_noop(self):
        model = make_k_regular(6, 2, 0.3, h=np.arange(6.0))
        nm = normalize(model)
        assert np.array_equal(nm.base.h, model.h)
        assert np.array_equal(nm.scale, np.ones(6))
        assert np.array_equal(nm.R, model.J - np.eye(6))

    def test_hand_worked_2x2(self):
        model = GaussianModel(2, np.array([2.0, 1.0]), np.array([[4.0, 1.0], [1.0, 1.0]]))
        nm = normalize(model)
        assert np.allclose(nm.base.J, [[1.0, 0.5], [0.5, 1.0]], atol=1e-15)
        assert np.allclose(nm.base.h, [1.0, 1.0], atol=1e-15)
        assert np.allclose(nm.scale, [2.0, 1.0])

    def test_round_trip(self, rng):
        model = random_connected_model(rng, 6, lam_target=0.8)
        scaled = GaussianModel(
            6, model.h * 3.0, model.J * np.outer([1, 2, 3, 1, 2, 3.0], [1, 2, 3, 1, 2, 3.0])
        )
        back = normalize(scaled).denormalize()
        assert np.allclose(back.J, scaled.J, rtol=1e-12)
        assert np.allclose(back.h, scaled.h, rtol=1e-12)

    def test_rejects_nonpositive_diagonal(self):
        J = np.array([[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(InvalidModelError):
            normalize(GaussianModel(2, np.zeros(2), J))

    def test_moment_scaling_invariance(self, rng):
        # exact marginals of the original model and the de-scaled normalized ones agree
        model = random_connected_model(rng, 7, lam_target=0.7)
        d = rng.uniform(0.5, 2.0, 7)
        scaled = GaussianModel(7, model.h * d, model.J * np.outer(d, d) / 1.0)
        nm = normalize(scaled)
        direct = exact_marginals(scaled)
        on_norm = exact_marginals(nm.base)
        m_back, s_back = nm.moments_to_original(on_norm.m, on_norm.sigma)
        assert np.allclose(m_back, direct.m, rtol=1e-10, atol=1e-12)
        assert np.allclose(s_back, direct.sigma, rtol=1e-10)


class TestKRegular:
    def test_figure_model_shape(self):
        model = make_k_regular(8, 4, 0.27)
        assert np.all(model.degrees == 4)
        R = model.J - np.eye(8)
        assert np.allclose(np.abs(R).sum(axis=1), 4 * 0.27)

    def test_cycle_graph(self):
        model = make_k_regular(8, 2, 0.3)
        assert np.all(model.degrees == 2)
        # row sums of |R| give the dominant eigenvalue K*r with eigenvector 1
        absR = np.abs(model.J - np.eye(8))
        assert np.allclose(absR @ np.ones(8), 2 * 0.3 * np.ones(8))

    def test_k_zero_is_diagonal(self):
        model = make_k_regular(5, 0, 0.5)
        assert model.edges == ()
        assert np.array_equal(model.J, np.eye(5))

    def test_odd_degree_needs_even_n(self):
        with pytest.raises(ValueError):
            make_k_regular(7, 3, 0.1)
        model = make_k_regular(8, 3, 0.1)
        assert np.all(model.degrees == 3)

    def test_infeasible_degree(self):
        with pytest.raises(ValueError):
            make_k_regular(4, 4, 0.1)

    @pytest.mark.parametrize("n,K", [(8, 2), (8, 4), (10, 3), (9, 4), (12, 5)])
    def test_row_sums_and_perron_vector(self, n, K):
        r = 0.11
        model = make_k_regular(n, K, r)
        absR = np.abs(model.J - np.eye(n))
        ones = np.ones(n)
        assert np.allclose(absR @ ones, K * r * ones, atol=1e-14)


class TestRValid:
    def test_8_node_4_regular_against_circulant_formula(self):
        ks = np.arange(8)
        eigs = 2 * np.cos(2 * np.pi * ks / 8) + 2 * np.cos(4 * np.pi * ks / 8)
        assert r_valid(8, 4) == pytest.approx(-1.0 / eigs.min(), abs=1e-12)

    def test_even_cycle(self):
        # cycle spectrum 2cos(2 pi k / n) has minimum -2 at k = n/2
        assert r_valid(10, 2) == pytest.approx(0.5, abs=1e-12)

    def test_pd_flips_at_threshold(self):
        rv = r_valid(8, 4)
        assert validate(make_k_regular(8, 4, rv * (1 - 1e-6))).positive_definite
        assert not validate(make_k_regular(8, 4, rv * (1 + 1e-6))).positive_definite


class TestRandomModel:
    def test_lambda_placement(self):
        for target in (0.9, 1.1):
            model = random_model(8, 0.5, target, seed=11)
            absR = np.abs(model.J - np.eye(8))
            assert np.linalg.eigvalsh(absR)[-1] == pytest.approx(target, abs=1e-10)
            assert validate(model).ok

    def test_above_one_still_pd(self):
        model = random_model(8, 0.5, 1.1, seed=4)
        assert validate(model).positive_definite

    def test_deterministic(self):
        a = random_model(8, 0.5, 0.9, seed=123)
        b = random_model(8, 0.5, 0.9, seed=123)
        assert np.array_equal(a.J, b.J) and np.array_equal(a.h, b.h)

    def test_retries_reported_with_seed(self):
        with pytest.raises(GenerationError, match="seed=5"):
            # target this extreme cannot produce a PD J
            random_model(8, 1.0, 50.0, seed=5, max_retries=3)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            random_model(8, 0.0, 0.9, seed=0)
        with pytest.raises(ValueError):
            random_model(8, 0.5, -1.0, seed=0)


class TestModelFiles:
    def test_dense_round_trip(self, tmp_path, rng):
        model = random_connected_model(rng, 6, lam_target=0.8)
        path = tmp_path / "model.json"
        save_model(model, str(path))
        loaded = load_model(str(path))
        assert np.array_equal(loaded.J, model.J)
        assert np.array_equal(loaded.h, model.h)
        assert loaded.edges == model.edges

    def test_sparse_round_trip_and_sorted_upper_triangle(self, tmp_path):
        model = make_k_regular(8, 4, 0.27, h=np.arange(8.0))
        path = tmp_path / "model.json"
        save_model(model, str(path), sparse=True)
        payload = json.loads(path.read_text())
        pairs = list(zip(payload["J"]["i"], payload["J"]["j"]))
        assert pairs == sorted(pairs)
        assert all(i < j for i, j in pairs)
        loaded = load_model(str(path))
        assert np.array_equal(loaded.J, model.J)

    def test_sparse_requires_unit_diagonal(self, tmp_path):
        model = GaussianModel(2, np.zeros(2), np.array([[2.0, 0.3], [0.3, 1.0]]))
        with pytest.raises(ValueError):
            save_model(model, str(tmp_path / "m.json"), sparse=True)

    def test_load_rejects_bad_shapes(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n": 2, "h": [0.0], "J": [[1.0, 0.0], [0.0, 1.0]]}))
        with pytest.raises(InvalidModelError):
            load_model(str(path))


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=8),
    lam=st.floats(min_value=0.1, max_value=0.95),
    seed=st.integers(min_value=0, max_value=10_000),
)
def test_generated_models_validate(n, lam, seed):
    rng = np.random.default_rng(seed)
    model = random_connected_model(rng, n, lam_target=lam)
    assert validate(model).ok
    nm = normalize(model)
    assert np.max(np.abs(np.diag(nm.R))) == 0.0
    assert np.array_equal(np.abs(nm.R), np.abs(nm.R).T)
