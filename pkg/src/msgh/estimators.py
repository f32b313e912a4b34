"""scikit-learn style estimators wrapping the EM fits."""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, DensityMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .em import EmConfig, fit_mixture, fit_nig_baseline, n_parameters, bic as _bic

__all__ = ["MSNIGMixture", "NIGMixture"]


class _NigMixtureBase(DensityMixin, ClusterMixin, BaseEstimator):
    _fit_func = None
    _kind = None

    def __init__(
        self,
        n_components=1,
        *,
        init="trimmed-kmeans",
        trim_fraction=0.1,
        tol=1e-8,
        max_iter=2000,
        restarts=10,
        random_state=0,
    ):
        self.n_components = n_components
        self.init = init
        self.trim_fraction = trim_fraction
        self.tol = tol
        self.max_iter = max_iter
        self.restarts = restarts
        self.random_state = random_state

    def _config(self):
        seed = self.random_state if self.random_state is not None else 0
        if not isinstance(seed, (int, np.integer)):
            raise ValueError("random_state must be an integer for reproducible restarts")
        return EmConfig(
            tol=self.tol, max_iter=self.max_iter, restarts=self.restarts, init=self.init,
            trim_fraction=self.trim_fraction, seed=int(seed), **self._extra_config(),
        )

    def _extra_config(self):
        return {}

    def fit(self, X, y=None):
        X = validate_data(self, X, ensure_min_samples=2, dtype=np.float64)
        report = type(self)._fit_func(X, self.n_components, self._config())
        self.report_ = report
        self.model_ = report.model
        self.weights_ = report.model.pi
        self.labels_ = report.labels
        self.loglik_ = report.loglik
        self.converged_ = report.converged
        self.n_iter_ = report.n_iter
        return self

    def _check(self, X):
        check_is_fitted(self, "model_")
        return validate_data(self, X, reset=False, dtype=np.float64)

    def score_samples(self, X):
        """Log density of each row under the fitted mixture."""
        X = self._check(X)
        return self.model_.log_density(X)

    def score(self, X, y=None):
        """Mean log-likelihood per row."""
        return float(np.mean(self.score_samples(X)))

    def predict_proba(self, X):
        X = self._check(X)
        logw = self.model_.weighted_log_densities(X)
        logw -= logw.max(axis=1, keepdims=True)
        w = np.exp(logw)
        return w / w.sum(axis=1, keepdims=True)

    def predict(self, X):
        X = self._check(X)
        return self.model_.weighted_log_densities(X).argmax(axis=1)

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    def n_parameters(self):
        check_is_fitted(self, "model_")
        return n_parameters(self._kind, self.n_features_in_, self.n_components,
                            **self._count_kwargs())

    def _count_kwargs(self):
        return {}

    def bic(self, X):
        """``-2 loglik + k log(n)`` on ``X``; lower is better."""
        X = self._check(X)
        return _bic(self.model_.loglik(X), self.n_parameters(), X.shape[0])

    def sample(self, n_samples=1, random_state=None):
        """Draw ``(X, labels)`` from the fitted mixture."""
        check_is_fitted(self, "model_")
        return self.model_.sample(n_samples, random_state)


class MSNIGMixture(_NigMixtureBase):
    """
    Mixture of multiple scaled NIG distributions fitted by EM.

    Parameters
    ----------
    n_components : int
    init : {"trimmed-kmeans", "kmeans", "random-partition"}
    trim_fraction : float
    gamma_constraint : {"free", "shared"}
        Whether each direction has its own tail parameter.
    tol, max_iter, restarts : see :class:`msgh.em.EmConfig`
    random_state : int

    Attributes
    ----------
    model_ : MixtureModel
    report_ : FitReport
    weights_, labels_, loglik_, converged_, n_iter_

    Examples
    --------
    >>> import numpy as np
    >>> X = np.random.default_rng(0).standard_t(5, size=(300, 2))
    >>> est = MSNIGMixture(restarts=1).fit(X)
    >>> est.predict(X[:3]).tolist()
    [0, 0, 0]
    """

    _fit_func = staticmethod(fit_mixture)
    _kind = "msnig"

    def __init__(
        self,
        n_components=1,
        *,
        init="trimmed-kmeans",
        trim_fraction=0.1,
        gamma_constraint="free",
        tol=1e-8,
        max_iter=2000,
        restarts=10,
        random_state=0,
    ):
        super().__init__(
            n_components, init=init, trim_fraction=trim_fraction, tol=tol,
            max_iter=max_iter, restarts=restarts, random_state=random_state,
        )
        self.gamma_constraint = gamma_constraint

    def _extra_config(self):
        return {"gamma_constraint": self.gamma_constraint}

    def _count_kwargs(self):
        return {"gamma_constraint": self.gamma_constraint}


class NIGMixture(_NigMixtureBase):
    """Mixture of standard (single weight) multivariate NIG distributions fitted by EM."""

    _fit_func = staticmethod(fit_nig_baseline)
    _kind = "nig"
