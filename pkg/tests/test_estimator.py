import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from phaseprop.estimator import PhaseGuidedPropagator
from phaseprop.exceptions import ConfigError

SMALL = dict(cells=2048, t_final=1e-9)


def test_params_round_trip_through_clone():
    est = PhaseGuidedPropagator(sigma_s=101e-9, method="series", series_order=2)
    params = est.get_params()
    assert params["sigma_s"] == 101e-9 and params["series_order"] == 2
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    assert est.set_params(cfl=0.3).cfl == 0.3


def test_transform_before_fit():
    with pytest.raises(NotFittedError):
        PhaseGuidedPropagator().transform(np.zeros((1, 16384)))


def test_fit_sets_learned_attributes():
    est = PhaseGuidedPropagator(**SMALL).fit()
    assert est.n_features_in_ == 2048
    assert est.x_.shape == (2048,) and est.grid_.cells == 2048
    assert est.sampler_.wave.sigma == 100e-9


def test_fv_rows_are_independent():
    est = PhaseGuidedPropagator(**SMALL).fit()
    rho0 = est.initial_density(100e-9)
    out = est.transform(np.vstack([rho0, 2 * rho0]))
    np.testing.assert_allclose(out[1], 2 * out[0], rtol=1e-12)
    assert len(est.diagnostics_) == 2 and est.diagnostics_[0]["method"] == "fv"
    mask = est.born_reference() > 0.01 * est.born_reference().max()
    assert np.max(np.abs(out[0][mask] / est.born_reference()[mask] - 1)) < 0.01


@pytest.mark.parametrize("method", ["series", "characteristics"])
def test_other_methods_agree_with_fv(method):
    kw = dict(cells=2048, t_final=0.02e-9)
    fv = PhaseGuidedPropagator(**kw).fit()
    rho0 = fv.initial_density(100e-9)
    other = PhaseGuidedPropagator(method=method, node_epsilon=0.0, **kw).fit()
    a, b = fv.transform(rho0)[0], other.transform(rho0)[0]
    assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-3


def test_input_validation():
    est = PhaseGuidedPropagator(**SMALL).fit()
    with pytest.raises(ValueError, match="features"):
        est.transform(np.zeros((1, 100)))
    with pytest.raises(ValueError, match="nonnegative"):
        est.transform(-np.ones((1, 2048)))
    with pytest.raises(ValueError):
        est.transform(np.full((1, 2048), np.nan))
    with pytest.raises(ValueError, match="features"):
        PhaseGuidedPropagator(**SMALL).fit(np.zeros((1, 10)))


@pytest.mark.parametrize("bad", [dict(method="magic"), dict(cells=0), dict(sigma_s=-1.0),
                                 dict(t_final=float("inf")), dict(n_traj=5)])
def test_bad_params_fail_at_fit(bad):
    with pytest.raises(ConfigError):
        PhaseGuidedPropagator(**bad).fit()


def test_pipeline_usage():
    rho0 = PhaseGuidedPropagator(**SMALL).fit().initial_density(100e-9)
    dx = 20e-6 / 2048
    est = PhaseGuidedPropagator(**SMALL)
    pipe = make_pipeline(FunctionTransformer(lambda X: X / (X.sum(axis=1, keepdims=True) * dx)), est)
    out = pipe.fit_transform(3.0 * rho0)
    assert out.sum() * dx == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(out, est.transform(rho0 / (rho0.sum() * dx)), rtol=1e-12)
