import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from scatstab import ScatteringFeatures, check_signal_array
from scatstab.network import AdmissibilityError


@pytest.fixture
def X():
    return np.random.default_rng(0).standard_normal((4, 128))


def test_params_round_trip():
    est = ScatteringFeatures(bank="gabor", max_depth=1)
    params = est.get_params()
    assert params["bank"] == "gabor" and params["max_depth"] == 1
    est.set_params(output="flat")
    assert clone(est).get_params()["output"] == "flat"


@pytest.mark.parametrize("bank", ["wavelet", "gabor", "random"])
def test_fit_transform_shapes(X, bank):
    est = ScatteringFeatures(bank=bank, max_depth=2)
    F = est.fit_transform(X)
    assert F.shape == (4, est.sequence_.feature_count())
    assert len(est.get_feature_names_out()) == F.shape[1]
    assert est.get_feature_names_out()[0] == "layer0:e"
    assert est.n_features_in_ == 128


def test_identity_bank_norms(X):
    est = ScatteringFeatures(bank="identity", max_depth=0).fit(X)
    np.testing.assert_allclose(est.transform(X)[:, 0], np.linalg.norm(X, axis=1))
    with pytest.raises(ValueError):
        ScatteringFeatures(bank="identity", max_depth=1).fit(X)


def test_flat_output_preserves_feature_distance(X):
    est = ScatteringFeatures(output="flat", spacing=0.5).fit(X)
    F = est.transform(X)
    assert F.shape[1] == len(est.get_feature_names_out())
    assert np.linalg.norm(F[0] - F[1]) == pytest.approx(est.feature_distance(X[0], X[1]), rel=1e-12)
    assert est.feature_distance(X[0], X[1]) <= np.linalg.norm(X[0] - X[1]) * np.sqrt(0.5) * (1 + 1e-8)


def test_two_dimensional_input():
    X2 = np.random.default_rng(1).standard_normal((2, 32, 32))
    F = ScatteringFeatures(max_depth=1).fit_transform(X2)
    assert F.shape == (2, 1 + 8)


def test_complex_input_is_accepted():
    Z = np.random.default_rng(2).standard_normal((2, 64)) * (1 + 1j)
    assert ScatteringFeatures(max_depth=1).fit_transform(Z).shape == (2, 3)


def test_transform_is_deterministic(X):
    est = ScatteringFeatures(bank="random", seed=5).fit(X)
    np.testing.assert_array_equal(est.transform(X), clone(est).fit(X).transform(X))
    np.testing.assert_array_equal(est.transform(X), est.set_params(n_jobs=3).transform(X))


def test_not_fitted(X):
    with pytest.raises(NotFittedError):
        ScatteringFeatures().transform(X)


def test_validation_errors(X):
    est = ScatteringFeatures()
    with pytest.raises(ValueError):
        est.fit(np.zeros((2, 100)))
    with pytest.raises(ValueError):
        est.fit(np.full((2, 64), np.nan))
    with pytest.raises(ValueError):
        ScatteringFeatures(output="dense").fit(X)
    with pytest.raises(ValueError):
        ScatteringFeatures(bank="curvelet").fit(X)
    est.fit(X)
    with pytest.raises(ValueError):
        est.transform(np.zeros((2, 64)))
    with pytest.raises(ValueError):
        est.transform(np.zeros((2, 16, 16)))


def test_unnormalized_bank_can_be_inadmissible(X):
    with pytest.raises(AdmissibilityError):
        ScatteringFeatures(bank="random", normalize=False, count=6, smoothness=0.5).fit(X)


def test_check_signal_array():
    assert check_signal_array([[1.0, 2.0]]).shape == (1, 2)
    with pytest.raises(ValueError):
        check_signal_array(np.zeros((2, 4, 4, 4)))
    with pytest.raises(ValueError):
        check_signal_array(np.zeros((2, 8)), dim=2)


def test_pipeline(X):
    pipe = make_pipeline(ScatteringFeatures(max_depth=1), StandardScaler())
    assert pipe.fit_transform(X).shape == (4, 3)
