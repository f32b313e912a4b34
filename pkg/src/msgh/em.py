"""
Maximum-likelihood fitting of multiple scaled NIG distributions and mixtures.

The EM works in a re-parameterised space where the shared ``delta`` and the
determinant of the scale are absorbed::

    A_tilde = delta**2 A,   beta_tilde = D A_tilde D^T beta,   gamma_tilde = delta gamma

so that each latent weight is ``IG(gamma_tilde_m, 1)`` and every M-step has a
closed form apart from the orientation ``D``, which is updated by pairwise
Jacobi-type rotations. Mixtures reuse the same updates with responsibility
weights.
"""

import os
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import logsumexp
from sklearn.cluster import KMeans, kmeans_plusplus

from ._validation import check_orthogonal
from .distributions import (
    NIG_ORDER,
    GhParams,
    MsghParams,
    canonicalize,
    gh_log_density,
    gh_sample,
    msgh_sample,
    msnig_log_density,
)
from .exceptions import DegenerateDataError, EmptyComponentError
from .special import bessel_k_ratio

__all__ = [
    "TildeParams",
    "GhTildeParams",
    "EStepStats",
    "EmConfig",
    "MixtureModel",
    "FitReport",
    "to_tilde",
    "back_transform",
    "e_step",
    "update_location_skew",
    "orientation_objective",
    "update_orientation",
    "update_shape",
    "update_gamma",
    "responsibilities",
    "fit_msnig",
    "fit_mixture",
    "fit_nig_baseline",
    "bic",
    "n_parameters",
    "init_partition",
    "trimmed_kmeans",
]

SPIKE_FLOOR = 1e-12
FG_RTOL = 1e-10
FG_MAX_SWEEPS = 100
THREADS_ENV = "MSGH_NUM_THREADS"

INIT_STRATEGIES = ("random-partition", "random", "kmeans", "trimmed-kmeans")
GAMMA_CONSTRAINTS = ("free", "shared", "groups")


# ---------------------------------------------------------------------------
# parameter containers


@dataclass(frozen=True, eq=False)
class TildeParams:
    """Working parameters ``(mu, D, A_tilde, beta_tilde, gamma_tilde)``."""

    mu: np.ndarray
    D: np.ndarray
    A_tilde: np.ndarray
    beta_tilde: np.ndarray
    gamma_tilde: np.ndarray

    def __post_init__(self):
        for name in ("mu", "A_tilde", "beta_tilde", "gamma_tilde"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        object.__setattr__(self, "D", np.asarray(self.D, dtype=float))
        if np.any(self.A_tilde <= 0) or np.any(self.gamma_tilde <= 0):
            raise ValueError("A_tilde and gamma_tilde must be strictly positive")

    @property
    def dim(self):
        return self.mu.size


@dataclass(frozen=True, eq=False)
class GhTildeParams:
    """Working parameters of the single-weight NIG: ``Sigma_tilde = delta**2 Sigma``."""

    mu: np.ndarray
    Sigma_tilde: np.ndarray
    beta_tilde: np.ndarray
    gamma_tilde: float


def to_tilde(p: MsghParams) -> TildeParams:
    """Map canonical parameters to the working parameterisation."""
    p = canonicalize(p)
    delta = float(p.delta)
    A_tilde = delta**2 * p.A
    beta_tilde = p.D @ (A_tilde * (p.D.T @ p.beta))
    return TildeParams(p.mu, p.D, A_tilde, beta_tilde, delta * p.gamma)


def back_transform(tilde: TildeParams) -> MsghParams:
    """
    Recover canonical MSNIG parameters from working ones.

    ``delta = |A_tilde|**(1/2M)``, ``gamma = gamma_tilde / delta``,
    ``beta = D A_tilde^-1 D^T beta_tilde`` and ``A = A_tilde / |A_tilde|**(1/M)``.
    """
    M = tilde.dim
    log_det = float(np.sum(np.log(tilde.A_tilde)))
    delta = np.exp(log_det / (2 * M))
    A = tilde.A_tilde / np.exp(log_det / M)
    beta = tilde.D @ ((tilde.D.T @ tilde.beta_tilde) / tilde.A_tilde)
    return MsghParams(
        mu=tilde.mu, D=tilde.D, A=A, beta=beta, gamma=tilde.gamma_tilde / delta, delta=delta
    )


def _gh_to_tilde(p: GhParams) -> GhTildeParams:
    d2 = p.delta**2
    return GhTildeParams(p.mu, d2 * p.Sigma, d2 * (p.Sigma @ p.beta), p.delta * p.gamma)


def _gh_back_transform(t: GhTildeParams) -> GhParams:
    M = t.mu.size
    sign, log_det = np.linalg.slogdet(t.Sigma_tilde)
    if sign <= 0:
        raise DegenerateDataError("scale matrix lost positive definiteness")
    delta = np.exp(log_det / (2 * M))
    Sigma = t.Sigma_tilde / delta**2
    beta = np.linalg.solve(t.Sigma_tilde, t.beta_tilde)
    return GhParams(t.mu, 0.5 * (Sigma + Sigma.T), beta, t.gamma_tilde / delta, delta)


@dataclass(frozen=True, eq=False)
class MixtureModel:
    """
    Finite mixture of MSNIG (or, for the baseline, standard NIG) components.

    Parameters
    ----------
    pi : array_like, shape (K,)
        Mixing proportions, positive and summing to one.
    components : sequence of MsghParams or GhParams
        All components must be of the same family and dimension.
    """

    pi: np.ndarray
    components: tuple

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float).reshape(-1)
        comps = tuple(self.components)
        if pi.size != len(comps) or pi.size == 0:
            raise ValueError("pi and components must have the same non-zero length")
        if np.any(pi <= 0) or abs(pi.sum() - 1.0) > 1e-10:
            raise ValueError("mixing proportions must be positive and sum to one")
        kinds = {type(c) for c in comps}
        if len(kinds) != 1 or not kinds <= {MsghParams, GhParams}:
            raise TypeError("components must all be MsghParams or all GhParams")
        if len({c.dim for c in comps}) != 1:
            raise ValueError("components differ in dimension")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "components", comps)

    @property
    def K(self):
        return self.pi.size

    @property
    def dim(self):
        return self.components[0].dim

    @property
    def kind(self):
        return "msnig" if isinstance(self.components[0], MsghParams) else "nig"

    def weighted_log_densities(self, X):
        """``log pi_k + log f_k(x_i)`` as an ``(n, K)`` array."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        dens = msnig_log_density if self.kind == "msnig" else gh_log_density
        return np.column_stack(
            [np.atleast_1d(dens(X, c)) for c in self.components]
        ) + np.log(self.pi)

    def log_density(self, X):
        return logsumexp(self.weighted_log_densities(X), axis=1)

    def loglik(self, X):
        return float(np.sum(self.log_density(X)))

    def sample(self, n, seed=None):
        """Draw ``n`` points; returns ``(X, labels)``."""
        rng = np.random.default_rng(seed)
        labels = rng.choice(self.K, size=int(n), p=self.pi)
        X = np.empty((int(n), self.dim))
        draw = msgh_sample if self.kind == "msnig" else gh_sample
        for k, comp in enumerate(self.components):
            idx = np.flatnonzero(labels == k)
            X[idx] = draw(comp, idx.size, rng)
        return X, labels


def responsibilities(data, model: MixtureModel):
    """Posterior component probabilities ``tau_ik``, computed in log space."""
    logw = model.weighted_log_densities(data)
    return np.exp(logw - logsumexp(logw, axis=1, keepdims=True))


# ---------------------------------------------------------------------------
# E-step


@dataclass(frozen=True, eq=False)
class EStepStats:
    """
    Conditional expectations of the latent weights.

    ``s[i, m] = E[W_im | y_i]`` and ``t[i, m] = E[1/W_im | y_i]``; ``tau`` holds
    the responsibilities (a single column of ones outside mixtures).
    """

    s: np.ndarray
    t: np.ndarray
    tau: np.ndarray
    phi: np.ndarray
    alpha_hat: np.ndarray


def _weight_posterior(order, phi, alpha_hat):
    # W | y ~ GIG(order, alpha_hat, phi); returns E[W], E[1/W]
    z = np.maximum(phi * alpha_hat, SPIKE_FLOOR)
    if order == -1.0:
        # K_2 / K_1 = K_0 / K_1 + 2 / z, so one ratio serves both moments
        r = bessel_k_ratio(0.0, 1.0, z)
        return (phi / alpha_hat) * r, (alpha_hat / phi) * (r + 2.0 / z)
    s = (phi / alpha_hat) * bessel_k_ratio(order + 1.0, order, z)
    t = (alpha_hat / phi) * bessel_k_ratio(order - 1.0, order, z)
    return s, t


def e_step(data, tilde: TildeParams, tau=None) -> EStepStats:
    """
    Posterior moments of the per-direction weights under ``tilde``.

    Each ``W_im | y_i`` is ``GIG(-1, alpha_hat_m, phi_im)`` with
    ``phi_im = sqrt(1 + u_im**2 / A_tilde_m)`` and
    ``alpha_hat_m = sqrt(gamma_tilde_m**2 + b_m**2 / A_tilde_m)``, where
    ``u = D^T (y - mu)`` and ``b = D^T beta_tilde``.
    """
    X = np.atleast_2d(np.asarray(data, dtype=float))
    u = (X - tilde.mu) @ tilde.D
    b = tilde.D.T @ tilde.beta_tilde
    phi = np.sqrt(1.0 + u * u / tilde.A_tilde)
    alpha_hat = np.sqrt(tilde.gamma_tilde**2 + b * b / tilde.A_tilde)
    s, t = _weight_posterior(-1.0, phi, alpha_hat)
    if tau is None:
        tau = np.ones((X.shape[0], 1))
    return EStepStats(s=s, t=t, tau=np.asarray(tau, dtype=float), phi=phi, alpha_hat=alpha_hat)


# ---------------------------------------------------------------------------
# M-step pieces


def _weights(stats, weights, n):
    if weights is None:
        return np.ones(n)
    return np.asarray(weights, dtype=float).reshape(-1)


def _location_skew_solve(y, s, t, w):
    """Joint minimiser of the ``(location, skew)`` quadratic along one axis."""
    n = w.sum()
    ss, st = w @ s, w @ t
    sy, sty = w @ y, w @ (t * y)
    denom = n * n / ss - st
    if abs(denom) <= 1e-12 * st:
        return sty / st, 0.0, True
    nu = (n * sy / ss - sty) / denom
    return nu, (sy - n * nu) / ss, False


def update_location_skew(data, stats: EStepStats, D, weights=None):
    """
    Update ``mu`` and ``beta_tilde`` for a fixed orientation.

    Works coordinatewise in the rotated frame ``u_i = D^T y_i``, where the
    stationarity conditions are ``sum_i t_im (u_im - nu_m) = n b_m`` and
    ``b_m sum_i s_im = sum_i (u_im - nu_m)``.

    Parameters
    ----------
    data : ndarray, shape (n, M)
    stats : EStepStats
    D : ndarray, shape (M, M)
    weights : ndarray, shape (n,), optional
        Responsibilities of the component being updated.

    Returns
    -------
    mu, beta_tilde : ndarray
    degenerate : int
        Number of coordinates where the joint system was singular and the
        zero-skew update was used instead.
    """
    X = np.atleast_2d(np.asarray(data, dtype=float))
    w = _weights(stats, weights, X.shape[0])
    u = X @ D
    nu, b = np.empty(X.shape[1]), np.empty(X.shape[1])
    degenerate = 0
    for m in range(X.shape[1]):
        nu[m], b[m], flag = _location_skew_solve(u[:, m], stats.s[:, m], stats.t[:, m], w)
        degenerate += flag
    return D @ nu, D @ b, degenerate


def _orientation_matrices(data, stats, mu, beta_tilde, A_tilde, weights):
    X = np.atleast_2d(np.asarray(data, dtype=float))
    w = _weights(stats, weights, X.shape[0])
    r = X - mu
    bb = np.outer(beta_tilde, beta_tilde)
    cross = np.outer(w @ r, beta_tilde)
    cross = cross + cross.T
    H = np.empty((X.shape[1],) + bb.shape)
    for m in range(X.shape[1]):
        wt = w * stats.t[:, m]
        H[m] = ((r * wt[:, None]).T @ r + (w @ stats.s[:, m]) * bb - cross) / A_tilde[m]
    return H


def _objective(D, H):
    return float(np.einsum("im,mij,jm->", D, H, D))


def orientation_objective(D, data, stats, mu, beta_tilde, A_tilde, weights=None):
    """
    Orientation part of the expected complete-data negative log-likelihood (times 2).

    ``f(D) = sum_m d_m^T H_m d_m`` with
    ``H_m = A_tilde_m^-1 sum_i w_i (t_im r_i r_i^T + s_im bt bt^T - r_i bt^T - bt r_i^T)``,
    ``r_i = y_i - mu`` and ``bt = beta_tilde``.
    """
    return _objective(np.asarray(D, dtype=float), _orientation_matrices(
        data, stats, mu, beta_tilde, A_tilde, weights))


def _nearest_orthogonal(D):
    U, _, Vt = np.linalg.svd(D)
    return U @ Vt


def _sweep(D, H):
    M = D.shape[1]
    for l in range(M - 1):
        for m in range(l + 1, M):
            P = D[:, [l, m]]
            G = P.T @ (H[l] - H[m]) @ P
            G = 0.5 * (G + G.T)
            if not np.all(np.isfinite(G)):
                continue
            _, vecs = np.linalg.eigh(G)
            v1 = vecs[:, 0]
            if v1[0] < 0:
                v1 = -v1
            R = np.array([[v1[0], -v1[1]], [v1[1], v1[0]]])
            before = P[:, 0] @ H[l] @ P[:, 0] + P[:, 1] @ H[m] @ P[:, 1]
            Q = P @ R
            after = Q[:, 0] @ H[l] @ Q[:, 0] + Q[:, 1] @ H[m] @ Q[:, 1]
            if after < before:
                D[:, [l, m]] = Q
    return D


def update_orientation(
    data, stats, mu, beta_tilde, A_tilde, D_init, weights=None,
    rtol=FG_RTOL, max_sweeps=FG_MAX_SWEEPS, return_trace=False,
):
    """
    Minimise :func:`orientation_objective` over orthogonal ``D``.

    Every pair of columns ``(l, m)`` is rotated within its own plane to the
    exact minimiser of the pair objective, which is given by the eigenvector
    of the smallest eigenvalue of ``P^T (H_l - H_m) P`` with ``P = [d_l, d_m]``.
    Sweeps over all pairs repeat until the relative decrease drops below
    ``rtol``. A pair rotation is only accepted if it lowers the objective, so
    the result is never worse than ``D_init``.
    """
    H = _orientation_matrices(data, stats, mu, beta_tilde, A_tilde, weights)
    D = np.array(D_init, dtype=float, copy=True)
    f = _objective(D, H)
    trace = [f]
    if D.shape[0] > 1:
        for _ in range(max_sweeps):
            D = _sweep(D, H)
            f_new = _objective(D, H)
            trace.append(f_new)
            done = f - f_new < rtol * abs(f)
            f = f_new
            if done:
                break
        D_orth = _nearest_orthogonal(D)
        if _objective(D_orth, H) <= f + 1e-12 * abs(f):
            D = D_orth
    return (D, trace) if return_trace else D


def update_shape(data, stats, D, mu, beta_tilde, weights=None):
    """
    Closed-form ``A_tilde`` update.

    ``A_tilde_m = (1/n) sum_i w_i (u_im**2 t_im + b_m**2 s_im - 2 u_im b_m)``
    with ``u = D^T (y - mu)``, ``b = D^T beta_tilde`` and ``n = sum_i w_i``.
    """
    X = np.atleast_2d(np.asarray(data, dtype=float))
    w = _weights(stats, weights, X.shape[0])
    u = (X - mu) @ D
    b = D.T @ beta_tilde
    terms = u * u * stats.t + b * b * stats.s - 2.0 * u * b
    A = (w @ terms) / w.sum()
    floor = 1e-14 * max(float(np.max(np.abs(X))) ** 2, 1e-300)
    if not np.all(A > floor):
        raise DegenerateDataError(
            f"no spread along rotated coordinate(s) {np.flatnonzero(~(A > floor)).tolist()}"
        )
    return A


def update_gamma(stats, constraint="free", weights=None, groups=None):
    """
    Closed-form ``gamma_tilde`` update.

    ``free`` gives ``n / sum_i s_im`` per direction, ``shared`` pools all
    directions into ``n M / sum_im s_im`` and ``groups`` pools within each of
    the index groups given in ``groups``.
    """
    s = np.atleast_2d(stats.s)
    w = _weights(stats, weights, s.shape[0])
    n = w.sum()
    col = w @ s
    if constraint == "free":
        return n / col
    if constraint == "shared":
        return np.full(col.size, n * col.size / col.sum())
    if constraint == "groups":
        if groups is None:
            raise ValueError("the 'groups' constraint needs index groups")
        out = n / col
        for g in groups:
            g = list(g)
            out[g] = n * len(g) / col[g].sum()
        return out
    raise ValueError(f"unknown gamma constraint {constraint!r}")


def _canonical_frame(tilde: TildeParams, permute=True):
    # order columns by decreasing A_tilde, largest-|entry| of each column positive
    D, A, g = tilde.D, tilde.A_tilde, tilde.gamma_tilde
    if permute:
        order = np.argsort(-A, kind="stable")
        D, A, g = D[:, order], A[order], g[order]
    pivots = np.argmax(np.abs(D), axis=0)
    signs = np.where(D[pivots, np.arange(D.shape[1])] < 0, -1.0, 1.0)
    return replace(tilde, D=D * signs, A_tilde=A, gamma_tilde=g)


# ---------------------------------------------------------------------------
# configuration, reports, scores


def _default_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class EmConfig:
    """
    Settings of the EM driver.

    Parameters
    ----------
    tol : float
        Stop when ``|l_r - l_{r-1}| / (|l_{r-1}| + 1) < tol``.
    max_iter : int
        Iteration cap per restart.
    restarts : int
        Independent initialisations; the best final log-likelihood wins.
    init : {"trimmed-kmeans", "kmeans", "random-partition"}
    trim_fraction : float
        Fraction of points ignored by trimmed k-means, in ``[0, 0.5)``.
    gamma_constraint : {"free", "shared", "groups"}
    gamma_groups : tuple of tuple of int, optional
        Index groups sharing ``gamma`` when ``gamma_constraint="groups"``.
    seed : int
    n_jobs : int, optional
        Workers for restarts; defaults to the ``MSGH_NUM_THREADS`` variable or 1.
    """

    tol: float = 1e-8
    max_iter: int = 2000
    restarts: int = 10
    init: str = "trimmed-kmeans"
    trim_fraction: float = 0.1
    gamma_constraint: str = "free"
    gamma_groups: tuple = None
    seed: int = 0
    n_jobs: int = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if int(self.max_iter) < 1 or int(self.restarts) < 1:
            raise ValueError("max_iter and restarts must be at least 1")
        if self.init not in INIT_STRATEGIES:
            raise ValueError(f"init must be one of {INIT_STRATEGIES}")
        if not 0 <= self.trim_fraction < 0.5:
            raise ValueError("trim_fraction must lie in [0, 0.5)")
        if self.gamma_constraint not in GAMMA_CONSTRAINTS:
            raise ValueError(f"gamma_constraint must be one of {GAMMA_CONSTRAINTS}")
        if self.gamma_constraint == "groups" and not self.gamma_groups:
            raise ValueError("gamma_groups is required for the 'groups' constraint")
        if self.gamma_groups is not None:
            object.__setattr__(
                self, "gamma_groups", tuple(tuple(int(i) for i in g) for g in self.gamma_groups)
            )

    def as_dict(self):
        return {
            "tol": self.tol,
            "max_iter": int(self.max_iter),
            "restarts": int(self.restarts),
            "init": self.init,
            "trim_fraction": self.trim_fraction,
            "gamma_constraint": self.gamma_constraint,
            "gamma_groups": None if self.gamma_groups is None else [list(g) for g in self.gamma_groups],
            "seed": int(self.seed),
        }


@dataclass(frozen=True, eq=False)
class FitReport:
    """Outcome of an EM fit: best model, its trace, score and labels."""

    model: MixtureModel
    loglik_trace: tuple
    n_iter: int
    converged: bool
    bic: float
    labels: np.ndarray
    n_samples: int
    restart_logliks: tuple = ()
    degenerate_updates: int = 0
    config: EmConfig = field(default_factory=EmConfig)

    @property
    def loglik(self):
        return self.loglik_trace[-1]


def bic(loglik, n_params, n):
    """``-2 loglik + n_params log(n)``; smaller is better."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return -2.0 * float(loglik) + n_params * np.log(n)


def n_parameters(kind, M, K=1, gamma_constraint="free", gamma_groups=None):
    """
    Number of free parameters of a ``K``-component model in ``M`` dimensions.

    MSNIG component: ``2M`` (mu, beta) + ``M(M-1)/2`` (D) + ``M-1`` (A with
    unit determinant) + ``M`` (gamma) + 1 (delta). Standard NIG component:
    ``2M`` + ``M(M+1)/2 - 1`` (Sigma with unit determinant) + 2.
    Proportions add ``K - 1``.
    """
    if kind == "msnig":
        if gamma_constraint == "shared":
            n_gamma = 1
        elif gamma_constraint == "groups":
            covered = {i for g in gamma_groups for i in g}
            n_gamma = len(gamma_groups) + M - len(covered)
        else:
            n_gamma = M
        per = 2 * M + M * (M - 1) // 2 + (M - 1) + n_gamma + 1
    elif kind == "nig":
        per = 2 * M + M * (M + 1) // 2 - 1 + 2
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return K * per + K - 1


# ---------------------------------------------------------------------------
# initialisation


def trimmed_kmeans(data, K, trim_fraction=0.1, seed=None, max_iter=100):
    """
    k-means where the ``trim_fraction`` points farthest from their centre are
    left out of every centre update.

    Returns
    -------
    centers : ndarray, shape (K, M)
    labels : ndarray, shape (n,)
        Nearest-centre labels; trimmed points are marked ``-1``.
    """
    X = np.atleast_2d(np.asarray(data, dtype=float))
    n = X.shape[0]
    keep = n - int(np.floor(trim_fraction * n))
    rng = np.random.default_rng(seed)
    centers, _ = kmeans_plusplus(X, K, random_state=int(rng.integers(2**31 - 1)))
    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        dist = d2[np.arange(n), labels]
        inlier = np.zeros(n, dtype=bool)
        inlier[np.argsort(dist, kind="stable")[:keep]] = True
        new = centers.copy()
        for k in range(K):
            members = inlier & (labels == k)
            if members.any():
                new[k] = X[members].mean(axis=0)
        if np.allclose(new, centers, rtol=0, atol=1e-12 * (1 + np.abs(centers).max())):
            centers = new
            break
        centers = new
    d2 = ((X[:, None, :] - centers[None]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    dist = d2[np.arange(n), labels]
    out = np.full(n, -1)
    kept = np.argsort(dist, kind="stable")[:keep]
    out[kept] = labels[kept]
    return centers, out


def _component_from_cluster(points, center):
    M = points.shape[1]
    cov = np.atleast_2d(np.cov(points, rowvar=False))
    vals, vecs = np.linalg.eigh(cov)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    if not np.all(vals > 1e-12 * max(vals[0], 1e-300)):
        raise DegenerateDataError("cluster covariance is singular")
    A = vals / np.exp(np.mean(np.log(vals)))
    pivots = np.argmax(np.abs(vecs), axis=0)
    vecs = vecs * np.where(vecs[pivots, np.arange(M)] < 0, -1.0, 1.0)
    return MsghParams(mu=center, D=_nearest_orthogonal(vecs), A=A, beta=np.zeros(M),
                      gamma=np.ones(M), delta=1.0)


def init_partition(data, K, strategy="trimmed-kmeans", trim_fraction=0.1, seed=None, max_draws=20):
    """
    Starting mixture from a hard partition of the data.

    Each cluster gives ``mu`` = its centre, ``D`` and ``A`` from the
    eigen-decomposition of its covariance (``A`` scaled to unit determinant),
    ``beta = 0`` and ``gamma = delta = 1``. Proportions are cluster sizes.
    Partitions with a cluster of fewer than ``M + 1`` points are redrawn.
    """
    X = np.atleast_2d(np.asarray(data, dtype=float))
    n, M = X.shape
    if strategy not in INIT_STRATEGIES:
        raise ValueError(f"unknown initialisation {strategy!r}")
    rng = np.random.default_rng(seed)
    for _ in range(max_draws):
        sub_seed = int(rng.integers(2**31 - 1))
        if strategy in ("random-partition", "random"):
            labels = np.random.default_rng(sub_seed).integers(K, size=n)
            centers = np.array([X[labels == k].mean(axis=0) if np.any(labels == k) else X[0]
                                for k in range(K)])
        elif strategy == "kmeans":
            km = KMeans(n_clusters=K, n_init=1, random_state=sub_seed).fit(X)
            labels, centers = km.labels_, km.cluster_centers_
        else:
            centers, labels = trimmed_kmeans(X, K, trim_fraction, sub_seed)
        counts = np.bincount(labels[labels >= 0], minlength=K)
        if np.all(counts >= M + 1):
            try:
                comps = [_component_from_cluster(X[labels == k], centers[k]) for k in range(K)]
            except DegenerateDataError:
                continue
            return MixtureModel(counts / counts.sum(), comps)
    raise EmptyComponentError(f"could not draw a partition with {K} usable clusters")


# ---------------------------------------------------------------------------
# EM drivers


def _msnig_m_step(X, tau_k, tilde, config):
    stats = e_step(X, tilde, tau_k[:, None])
    w = tau_k
    if w.sum() < X.shape[1] + 1:
        raise EmptyComponentError("component responsibility mass below M + 1")
    mu, beta_tilde, degenerate = update_location_skew(X, stats, tilde.D, w)
    D = update_orientation(X, stats, mu, beta_tilde, tilde.A_tilde, tilde.D, w)
    A_tilde = update_shape(X, stats, D, mu, beta_tilde, w)
    gamma_tilde = update_gamma(stats, config.gamma_constraint, w, config.gamma_groups)
    new = TildeParams(mu, D, A_tilde, beta_tilde, gamma_tilde)
    return _canonical_frame(new, permute=config.gamma_constraint != "groups"), degenerate


def _nig_m_step(X, tau_k, tilde: GhTildeParams, config):
    M = X.shape[1]
    w = tau_k
    n = w.sum()
    if n < M + 1:
        raise EmptyComponentError("component responsibility mass below M + 1")
    r = X - tilde.mu
    chol = np.linalg.cholesky(tilde.Sigma_tilde)
    z = np.linalg.solve(chol, r.T)
    zb = np.linalg.solve(chol, tilde.beta_tilde)
    phi = np.sqrt(1.0 + np.sum(z * z, axis=0))
    alpha_hat = np.sqrt(tilde.gamma_tilde**2 + zb @ zb)
    s, t = _weight_posterior(-0.5 * (M + 1), phi, alpha_hat)
    ss, st = w @ s, w @ t
    sy, sty = w @ X, (w * t) @ X
    denom = n * n / ss - st
    degenerate = 0
    if abs(denom) <= 1e-12 * st:
        mu, beta_tilde, degenerate = sty / st, np.zeros(M), 1
    else:
        mu = (n * sy / ss - sty) / denom
        beta_tilde = (sy - n * mu) / ss
    r = X - mu
    rb = np.outer(w @ r, beta_tilde)
    S = ((r * (w * t)[:, None]).T @ r - rb - rb.T + ss * np.outer(beta_tilde, beta_tilde)) / n
    S = 0.5 * (S + S.T)
    if np.linalg.eigvalsh(S)[0] <= 0:
        raise DegenerateDataError("scale matrix lost positive definiteness")
    return GhTildeParams(mu, S, beta_tilde, n / ss), degenerate


def _run_em(X, model, config, kind):
    if kind == "msnig":
        tildes = [to_tilde(c) for c in model.components]
        m_step, back = _msnig_m_step, back_transform
    else:
        tildes = [_gh_to_tilde(c) for c in model.components]
        m_step, back = _nig_m_step, _gh_back_transform
    pi = model.pi
    logw = model.weighted_log_densities(X)
    ll = float(np.sum(logsumexp(logw, axis=1)))
    trace = [ll]
    converged = False
    degenerate = 0
    n_iter = 0
    for n_iter in range(1, int(config.max_iter) + 1):
        tau = np.exp(logw - logsumexp(logw, axis=1, keepdims=True))
        new = []
        for k, tl in enumerate(tildes):
            t_new, flag = m_step(X, tau[:, k], tl, config)
            new.append(t_new)
            degenerate += flag
        tildes = new
        pi = tau.sum(axis=0) / X.shape[0]
        model = MixtureModel(pi, [back(t) for t in tildes])
        logw = model.weighted_log_densities(X)
        ll_new = float(np.sum(logsumexp(logw, axis=1)))
        trace.append(ll_new)
        if not np.isfinite(ll_new):
            raise DegenerateDataError("log-likelihood became non-finite")
        change = abs(ll_new - ll) / (abs(ll) + 1.0)
        ll = ll_new
        if change < config.tol:
            converged = True
            break
    return model, tuple(trace), n_iter, converged, degenerate


def _initial_model(X, K, config, seed, kind):
    model = init_partition(X, K, config.init, config.trim_fraction, seed)
    if kind == "nig":
        comps = [GhParams(c.mu, c.sigma, c.beta, 1.0, 1.0) for c in model.components]
        model = MixtureModel(model.pi, comps)
    return model


def _single_restart(X, K, config, seed, kind):
    try:
        model = _initial_model(X, K, config, seed, kind)
        return _run_em(X, model, config, kind)
    except (EmptyComponentError, np.linalg.LinAlgError) as exc:
        return exc
    except DegenerateDataError as exc:
        return exc


def _check_data(data, K):
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("data must be a 2-D array")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contains non-finite values")
    n, M = X.shape
    if n <= M + 1:
        raise DegenerateDataError(f"need more than M + 1 = {M + 1} observations, got {n}")
    if K < 1:
        raise ValueError("K must be at least 1")
    sd = X.std(axis=0)
    if np.any(sd == 0):
        raise DegenerateDataError("a data column is constant")
    return X


def _fit(data, K, config, kind, initial=None):
    config = config or EmConfig()
    X = _check_data(data, int(K))
    if initial is not None:
        results = [_run_em(X, initial, config, kind)]
    else:
        seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(config.seed).spawn(int(config.restarts))]
        n_jobs = config.n_jobs or _default_threads()
        if n_jobs > 1 and len(seeds) > 1:
            from joblib import Parallel, delayed

            results = Parallel(n_jobs=n_jobs, prefer="threads")(
                delayed(_single_restart)(X, K, config, s, kind) for s in seeds
            )
        else:
            results = [_single_restart(X, K, config, s, kind) for s in seeds]
    ok = [r for r in results if not isinstance(r, Exception)]
    if not ok:
        raise results[-1]
    finals = [r[1][-1] for r in ok]
    best = ok[int(np.argmax(finals))]
    model, trace, n_iter, converged, degenerate = best
    k = n_parameters(kind, X.shape[1], int(K), config.gamma_constraint, config.gamma_groups)
    labels = model.weighted_log_densities(X).argmax(axis=1)
    return FitReport(
        model=model,
        loglik_trace=trace,
        n_iter=n_iter,
        converged=converged,
        bic=bic(trace[-1], k, X.shape[0]),
        labels=labels,
        n_samples=X.shape[0],
        restart_logliks=tuple(finals),
        degenerate_updates=degenerate,
        config=config,
    )


def fit_mixture(data, K, config=None, initial=None) -> FitReport:
    """
    Fit a ``K``-component MSNIG mixture by EM.

    Each iteration computes responsibilities and then, per component, the
    responsibility-weighted updates of ``(mu, beta_tilde)``, ``D``,
    ``A_tilde`` and ``gamma_tilde`` in that order, followed by
    ``pi_k = n_k / N``.

    Parameters
    ----------
    data : array_like, shape (N, M)
    K : int
    config : EmConfig, optional
    initial : MixtureModel, optional
        Start from this model instead of ``config.restarts`` initialisations.

    Returns
    -------
    FitReport
        The restart with the highest final log-likelihood.

    Raises
    ------
    DegenerateDataError
        For too few observations or a constant column.
    EmptyComponentError
        When every restart lost a component.
    """
    return _fit(data, K, config, "msnig", initial)


def fit_msnig(data, config=None, initial=None) -> FitReport:
    """Single MSNIG distribution; the same computation as ``fit_mixture`` with ``K=1``."""
    return fit_mixture(data, 1, config, initial)


def fit_nig_baseline(data, K=1, config=None, initial=None) -> FitReport:
    """
    Fit a mixture of standard (single weight) multivariate NIG distributions.

    The weight posterior is ``GIG(-(M+1)/2, alpha_hat, sqrt(1 + Q_i))`` with
    ``Q_i`` the Mahalanobis distance under ``Sigma_tilde``; the M-step mirrors
    the multiple scaled one with a full scale matrix.
    """
    return _fit(data, K, config, "nig", initial)
