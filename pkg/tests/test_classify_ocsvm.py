import numpy as np
import pytest

from pupguard.classify import (
    check_kkt,
    load_model,
    ocsvm_fit,
    ocsvm_score,
    save_model,
)
from pupguard.classify.ocsvm import auto_gamma, rbf_kernel
from pupguard.errors import ConvergenceError, FitError


def _gaussian(seed, n=500, d=2):
    return np.random.default_rng(seed).normal(size=(n, d))


class TestFit:
    def test_two_identical_points(self):
        X = np.array([[1.0, 2.0], [1.0, 2.0]])
        model = ocsvm_fit(X, nu=0.5)
        for x in X:
            assert ocsvm_score(model, x) >= 0.0  # both classified normal

    def test_dual_feasibility(self):
        X = _gaussian(3, n=200)
        model = ocsvm_fit(X, nu=0.1)
        assert model.alphas.sum() == pytest.approx(1.0, abs=1e-9)
        C = 1.0 / (model.nu * model.n_train)
        assert np.all(model.alphas > 0.0)
        assert np.all(model.alphas <= C + 1e-12)

    def test_nu_property(self):
        X = _gaussian(42)
        model = ocsvm_fit(X, nu=0.1)
        f = model.decision_function(X)
        assert (f < 0).mean() <= 0.12  # margin-error bound
        assert len(model.alphas) / len(X) >= 0.08  # support-vector bound

    def test_kkt_certificate_without_resolving(self):
        X = _gaussian(7, n=300)
        model = ocsvm_fit(X, nu=0.1, tol=1e-6)
        report = check_kkt(model, X, tol=1e-6)
        assert report.feasible
        assert report.stationarity_residual <= 1e-5
        assert report.rho_low - 1e-5 <= model.rho <= report.rho_high + 1e-5

    def test_deterministic(self):
        X = _gaussian(11, n=100)
        a = ocsvm_fit(X, nu=0.2)
        b = ocsvm_fit(X, nu=0.2)
        assert np.array_equal(a.alphas, b.alphas)
        assert a.rho == b.rho

    def test_auto_gamma_definition(self):
        X = _gaussian(1, n=50, d=4)
        expected = 1.0 / (4 * X.var(axis=0).mean())
        assert auto_gamma(X) == pytest.approx(expected, rel=1e-12)

    def test_convergence_error_carries_residual(self):
        X = _gaussian(5, n=100)
        with pytest.raises(ConvergenceError) as err:
            ocsvm_fit(X, nu=0.1, max_iter=3)
        assert err.value.residual is not None and err.value.residual > 0

    def test_rejects_non_finite(self):
        X = np.array([[0.0, np.nan], [1.0, 2.0]])
        with pytest.raises(FitError):
            ocsvm_fit(X)

    def test_rejects_bad_nu(self):
        with pytest.raises(ValueError):
            ocsvm_fit(_gaussian(0, n=10), nu=0.0)


class TestScore:
    def test_free_support_vector_sits_on_margin(self):
        X = _gaussian(13, n=200)
        model = ocsvm_fit(X, nu=0.1, tol=1e-6)
        C = 1.0 / (model.nu * model.n_train)
        free = (model.alphas > 0.05 * C) & (model.alphas < 0.95 * C)
        assert free.any()
        for sv in model.support_vectors[free]:
            assert abs(ocsvm_score(model, sv)) <= 1e-5  # 10 * tol

    def test_far_point_converges_to_minus_rho(self):
        X = _gaussian(17, n=100)
        model = ocsvm_fit(X, nu=0.1)
        assert model.rho > 0
        far = np.array([1e6, -1e6])
        assert ocsvm_score(model, far) == pytest.approx(-model.rho, abs=1e-12)
        assert ocsvm_score(model, far) < 0  # anomalous

    def test_invariant_to_support_vector_order(self):
        X = _gaussian(19, n=80)
        model = ocsvm_fit(X, nu=0.15)
        perm = np.random.default_rng(0).permutation(len(model.alphas))
        shuffled = type(model)(
            support_vectors=model.support_vectors[perm],
            alphas=model.alphas[perm],
            support_indices=model.support_indices[perm],
            rho=model.rho,
            gamma=model.gamma,
            nu=model.nu,
            n_train=model.n_train,
            kkt_residual=model.kkt_residual,
        )
        x = np.array([0.3, -0.7])
        assert ocsvm_score(model, x) == pytest.approx(
            ocsvm_score(shuffled, x), rel=1e-12
        )

    def test_dimension_mismatch(self):
        model = ocsvm_fit(_gaussian(2, n=20), nu=0.5)
        with pytest.raises(ValueError):
            ocsvm_score(model, np.zeros(5))


class TestKernel:
    def test_rbf_unit_diagonal(self):
        X = _gaussian(23, n=10, d=3)
        K = rbf_kernel(X, X, 0.7)
        assert np.allclose(np.diag(K), 1.0)
        assert np.allclose(K, K.T)

    def test_rbf_known_value(self):
        a = np.array([[0.0, 0.0]])
        b = np.array([[3.0, 4.0]])
        assert rbf_kernel(a, b, 0.1)[0, 0] == pytest.approx(np.exp(-2.5))


class TestSerialization:
    def test_round_trip_scores(self):
        X = _gaussian(29, n=60)
        model = ocsvm_fit(X, nu=0.1)
        back = load_model(save_model(model))
        probes = _gaussian(31, n=10)
        for x in probes:
            assert ocsvm_score(back, x) == ocsvm_score(model, x)
