"""
Standard and multiple scaled generalised hyperbolic distributions.

A multiple scaled GH (MSGH) vector is built in the eigen-frame of the scale
matrix ``Sigma = D diag(A) D^T``: each rotated coordinate
``[D^T (y - mu)]_m`` is a one-dimensional GH variate with its own weight
``W_m ~ GIG(lam_m, gamma_m, delta_m)``::

    Y | W = mu + D diag(W) diag(A) D^T beta + D diag(A)^(1/2) diag(W)^(1/2) X

with ``X`` standard normal. The density therefore factorises over the
rotated coordinates, which is what :func:`msgh_log_density` exploits. The
standard GH uses one scalar weight shared by all coordinates.

All densities are computed on the log scale.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from ._validation import as_points, as_vector, check_orthogonal
from .exceptions import DomainError, UnsupportedOrderError
from .gig import GigParams, gig_moment, gig_sample
from .special import log_bessel_k

__all__ = [
    "MsghParams",
    "GhParams",
    "rotation_2d",
    "msgh_log_density",
    "msnig_log_density",
    "gh_log_density",
    "msgh_sample",
    "gh_sample",
    "msgh_mean",
    "msgh_cov",
    "gh_mean",
    "gh_cov",
    "msgh_cf",
    "gh_cf",
    "marginal_pdf",
    "canonicalize",
    "canonicalize_gh",
]

NIG_ORDER = -0.5
_LOG_2PI = np.log(2.0 * np.pi)


def rotation_2d(xi):
    """Orientation matrix with ``D11 = D22 = cos(xi)`` and ``D21 = -D12 = sin(xi)``."""
    c, s = np.cos(xi), np.sin(xi)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class MsghParams:
    """
    Parameters of one multiple scaled GH distribution.

    Parameters
    ----------
    mu : array_like, shape (M,)
        Location.
    D : array_like, shape (M, M)
        Orthogonal orientation matrix; column ``m`` is the direction carrying
        weight ``W_m``.
    A : array_like, shape (M,)
        Positive shape (eigenvalues of the scale matrix).
    beta : array_like, shape (M,)
        Skewness.
    gamma : array_like, shape (M,)
        Positive per-direction GIG ``gamma``.
    delta : float or array_like
        Positive GIG ``delta``; shared by all directions in canonical form. A
        vector is accepted so that :func:`canonicalize` can fold it.
    lam : float or array_like, default -1/2
        GIG index per direction. ``-1/2`` everywhere gives the MSNIG.
    """

    mu: np.ndarray
    D: np.ndarray
    A: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: object = 1.0
    lam: np.ndarray = field(default=NIG_ORDER)

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        M = mu.size
        if M < 1:
            raise ValueError("dimension must be at least 1")
        D = check_orthogonal(np.asarray(self.D, dtype=float).reshape(M, M))
        A = as_vector(self.A, M, "A")
        gamma = as_vector(self.gamma, M, "gamma")
        if np.any(A <= 0):
            raise ValueError("A must be strictly positive")
        if np.any(gamma <= 0):
            raise ValueError("gamma must be strictly positive")
        if np.ndim(self.delta) == 0:
            delta = float(self.delta)
            if not (np.isfinite(delta) and delta > 0):
                raise ValueError("delta must be strictly positive")
        else:
            delta = as_vector(self.delta, M, "delta")
            if np.any(delta <= 0):
                raise ValueError("delta must be strictly positive")
        for name, value in (
            ("mu", mu),
            ("D", D),
            ("A", A),
            ("beta", as_vector(self.beta, M, "beta")),
            ("gamma", gamma),
            ("delta", delta),
            ("lam", as_vector(self.lam, M, "lam")),
        ):
            if isinstance(value, np.ndarray):
                value = value.copy()
                value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def dim(self) -> int:
        return self.mu.size

    @property
    def delta_vec(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.delta, dtype=float), (self.dim,))

    @property
    def is_nig(self) -> bool:
        return bool(np.all(self.lam == NIG_ORDER))

    @property
    def sigma(self) -> np.ndarray:
        """Scale matrix ``D diag(A) D^T``."""
        s = (self.D * self.A) @ self.D.T
        return 0.5 * (s + s.T)

    def weight_law(self, m) -> GigParams:
        return GigParams(self.lam[m], self.gamma[m], self.delta_vec[m])

    @classmethod
    def from_angle(cls, mu, angle, A, beta, gamma, delta=1.0, lam=NIG_ORDER):
        """Bivariate constructor with ``D = rotation_2d(angle)``."""
        return cls(mu=mu, D=rotation_2d(angle), A=A, beta=beta, gamma=gamma, delta=delta, lam=lam)

    def replace(self, **changes):
        return replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, MsghParams):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("mu", "D", "A", "beta", "gamma", "delta", "lam")
        )


@dataclass(frozen=True, eq=False)
class GhParams:
    """Standard (single weight) GH: ``Y | W ~ N(mu + W Sigma beta, W Sigma)``."""

    mu: np.ndarray
    Sigma: np.ndarray
    beta: np.ndarray
    gamma: float
    delta: float
    lam: float = NIG_ORDER

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        M = mu.size
        Sigma = np.asarray(self.Sigma, dtype=float).reshape(M, M)
        if not np.allclose(Sigma, Sigma.T, rtol=0, atol=1e-12 * np.max(np.abs(Sigma))):
            raise ValueError("Sigma must be symmetric")
        try:
            chol = np.linalg.cholesky(Sigma)
        except np.linalg.LinAlgError:
            raise ValueError("Sigma must be positive definite") from None
        gamma, delta, lam = float(self.gamma), float(self.delta), float(self.lam)
        if not (gamma > 0 and delta > 0 and np.isfinite(lam)):
            raise ValueError("gamma and delta must be strictly positive")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "Sigma", Sigma)
        object.__setattr__(self, "beta", as_vector(self.beta, M, "beta"))
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self) -> int:
        return self.mu.size

    @property
    def alpha(self) -> float:
        """``alpha`` with ``gamma**2 = alpha**2 - beta^T Sigma beta``."""
        return float(np.sqrt(self.gamma**2 + self.beta @ self.Sigma @ self.beta))

    @property
    def weight_law(self) -> GigParams:
        return GigParams(self.lam, self.gamma, self.delta)

    def mahalanobis_sq(self, y):
        z = np.linalg.solve(self._chol, np.atleast_2d(y - self.mu).T)
        return np.sum(z * z, axis=0)

    def q(self, y):
        """``q(y) = sqrt(delta**2 + (y-mu)^T Sigma^-1 (y-mu))``."""
        return np.sqrt(self.delta**2 + self.mahalanobis_sq(y))

    def log_det_sigma(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self._chol))))


def _rotated(y, p: MsghParams):
    pts, single = as_points(y, p.dim)
    return (pts - p.mu) @ p.D, p.D.T @ p.beta, single


def _finish(values, single):
    return float(values[0]) if single else values


def msgh_log_density(y, p: MsghParams):
    """
    Log density of the multiple scaled GH distribution.

    ``y`` is a single point of shape ``(M,)`` or a batch ``(n, M)``; the return
    value is a float or an ``(n,)`` array accordingly.
    """
    u, b, single = _rotated(y, p)
    A, g, d, lam = p.A, p.gamma, p.delta_vec, p.lam
    alpha = np.sqrt(g * g + A * b * b)
    q = np.sqrt(d * d + u * u / A)
    terms = (
        -0.5 * _LOG_2PI
        - 0.5 * np.log(A)
        + lam * np.log(g / d)
        + (lam - 0.5) * (np.log(q) - np.log(alpha))
        + log_bessel_k(lam - 0.5, q * alpha)
        - log_bessel_k(lam, d * g)
        + u * b
    )
    return _finish(terms.sum(axis=1), single)


def msnig_log_density(y, p: MsghParams):
    """Log density of the multiple scaled NIG (all ``lam_m = -1/2``), using ``K_1``."""
    if not p.is_nig:
        raise UnsupportedOrderError("msnig_log_density needs every lam_m = -1/2")
    u, b, single = _rotated(y, p)
    A, g, d = p.A, p.gamma, p.delta_vec
    alpha = np.sqrt(g * g + A * b * b)
    q = np.sqrt(d * d + u * u / A)
    terms = (
        np.log(d)
        + d * g
        + u * b
        + np.log(alpha)
        - np.log(np.pi * q)
        + log_bessel_k(1.0, alpha * q)
        - 0.5 * np.log(A)
    )
    return _finish(terms.sum(axis=1), single)


def gh_log_density(y, p: GhParams):
    """Log density of the standard multivariate GH (NIG when ``lam = -1/2``)."""
    pts, single = as_points(y, p.dim)
    M = p.dim
    q = p.q(pts)
    alpha = p.alpha
    lin = (pts - p.mu) @ p.beta
    if p.lam == NIG_ORDER:
        out = (
            np.log(p.delta)
            - 0.5 * (M - 1) * np.log(2.0)
            + p.delta * p.gamma
            + lin
            + 0.5 * (M + 1) * (np.log(alpha) - np.log(np.pi * q))
            + log_bessel_k(0.5 * (M + 1), alpha * q)
            - 0.5 * p.log_det_sigma()
        )
    else:
        nu = p.lam - 0.5 * M
        out = (
            -0.5 * M * _LOG_2PI
            - 0.5 * p.log_det_sigma()
            + p.lam * np.log(p.gamma / p.delta)
            + nu * (np.log(q) - np.log(alpha))
            + log_bessel_k(nu, q * alpha)
            - log_bessel_k(p.lam, p.delta * p.gamma)
            + lin
        )
    return _finish(out, single)


def _sample_weights(p: MsghParams, n, rng):
    return np.column_stack([gig_sample(p.weight_law(m), n, rng) for m in range(p.dim)])


def msgh_sample(p: MsghParams, n: int, seed=None):
    """
    Draw ``n`` rows from the MSGH distribution via the weight representation.

    Returns an ``(n, M)`` array. A fixed integer ``seed`` gives identical draws.
    """
    rng = np.random.default_rng(seed)
    n = int(n)
    if n == 0:
        return np.empty((0, p.dim))
    w = _sample_weights(p, n, rng)
    x = rng.standard_normal((n, p.dim))
    b = p.D.T @ p.beta
    rotated = w * (p.A * b) + np.sqrt(p.A * w) * x
    return p.mu + rotated @ p.D.T


def gh_sample(p: GhParams, n: int, seed=None):
    """Draw ``n`` rows from the standard GH with one shared weight per row."""
    rng = np.random.default_rng(seed)
    n = int(n)
    if n == 0:
        return np.empty((0, p.dim))
    w = gig_sample(p.weight_law, n, rng)[:, None]
    x = rng.standard_normal((n, p.dim)) @ p._chol.T
    return p.mu + w * (p.Sigma @ p.beta) + np.sqrt(w) * x


def _weight_mean_var(law: GigParams):
    if law.is_nig:
        ratio = law.delta / law.gamma
        return ratio, ratio / law.gamma**2
    m1 = gig_moment(1, law)
    # Var W = E[W] (delta/gamma) (K_{l+2}/K_{l+1} - K_{l+1}/K_l)
    m2_over_m1 = gig_moment(2, law) / m1
    return m1, m1 * (m2_over_m1 - m1)


def msgh_mean(p: MsghParams):
    """``mu + D diag(E[W_m]) diag(A) D^T beta``."""
    ew = np.array([_weight_mean_var(p.weight_law(m))[0] for m in range(p.dim)])
    return p.mu + p.D @ (ew * p.A * (p.D.T @ p.beta))


def msgh_cov(p: MsghParams):
    """
    Covariance ``D diag(E[W_m] A_m + Var[W_m] A_m**2 [D^T beta]_m**2) D^T``.

    With ``D = I`` the result is exactly diagonal.
    """
    mv = np.array([_weight_mean_var(p.weight_law(m)) for m in range(p.dim)])
    b = p.D.T @ p.beta
    diag = mv[:, 0] * p.A + mv[:, 1] * (p.A * b) ** 2
    cov = (p.D * diag) @ p.D.T
    return 0.5 * (cov + cov.T)


def gh_mean(p: GhParams):
    ew, _ = _weight_mean_var(p.weight_law)
    return p.mu + ew * (p.Sigma @ p.beta)


def gh_cov(p: GhParams):
    """``E[W] Sigma + Var[W] Sigma beta beta^T Sigma``."""
    ew, vw = _weight_mean_var(p.weight_law)
    sb = p.Sigma @ p.beta
    return ew * p.Sigma + vw * np.outer(sb, sb)


def _nig_log_cf_weight(u, gamma, delta):
    return delta * gamma - delta * np.sqrt(gamma * gamma - 2j * u)


def msgh_cf(t, p: MsghParams):
    """
    Characteristic function ``E[exp(i t^T Y)]`` of the multiple scaled NIG.

    ``t`` has shape ``(M,)`` or ``(n, M)``. Only ``lam_m = -1/2`` is supported.
    """
    if not p.is_nig:
        raise UnsupportedOrderError("characteristic function only for lam_m = -1/2")
    pts, single = as_points(t, p.dim)
    root_a = np.sqrt(p.A)
    a = (pts @ p.D) * root_a
    c = root_a * (p.D.T @ p.beta)
    u = a * (c + 0.5j * a)
    log_phi = 1j * (pts @ p.mu) + _nig_log_cf_weight(u, p.gamma, p.delta_vec).sum(axis=1)
    out = np.exp(log_phi)
    return complex(out[0]) if single else out


def gh_cf(t, p: GhParams):
    """Characteristic function of the standard multivariate NIG."""
    if p.lam != NIG_ORDER:
        raise UnsupportedOrderError("characteristic function only for lam = -1/2")
    pts, single = as_points(t, p.dim)
    u = pts @ (p.Sigma @ p.beta) + 0.5j * np.einsum("ij,jk,ik->i", pts, p.Sigma, pts)
    out = np.exp(1j * (pts @ p.mu) + _nig_log_cf_weight(u, p.gamma, p.delta))
    return complex(out[0]) if single else out


CF_CUTOFF = 1e-12


def _cf_radius(cf_abs, dim, n_angles=64):
    """Radius beyond which ``|phi| < CF_CUTOFF`` along every probed direction."""
    if dim == 1:
        dirs = np.array([[1.0]])
    else:
        th = np.linspace(0.0, np.pi, n_angles, endpoint=False)
        dirs = np.column_stack([np.cos(th), np.sin(th)])
    r = 1.0
    while True:
        # cf magnitude is even in t, so half of the directions suffice
        if np.max(cf_abs(r * dirs)) < CF_CUTOFF and np.max(cf_abs(2 * r * dirs)) < CF_CUTOFF:
            return r
        r *= 1.5
        if r > 1e8:
            raise DomainError("characteristic function does not decay; cannot invert")


def marginal_pdf(p: MsghParams, indices, points, *, rtol=1e-10, atol=1e-12):
    """
    Density of the marginal ``Y_I`` by Fourier inversion of its characteristic function.

    Parameters
    ----------
    p : MsghParams
        Multiple scaled NIG parameters.
    indices : sequence of int
        One or two coordinates to keep.
    points : array_like
        ``(n,)`` values for a univariate marginal, ``(n, 2)`` for a bivariate one.

    Returns
    -------
    ndarray of shape (n,)
        Marginal density values (clipped at 0 against round-off).

    Notes
    -----
    The univariate case integrates ``Re(exp(-ity) phi(t)) / pi`` over
    ``t > 0``; the bivariate case integrates over a half plane and doubles,
    using ``phi(-t) = conj(phi(t))``. The integrals are truncated where
    ``|phi|`` drops below ``1e-12`` and evaluated adaptively, vectorised over
    all requested points.
    """
    if not p.is_nig:
        raise UnsupportedOrderError("marginal inversion only for lam_m = -1/2")
    idx = [int(i) for i in np.atleast_1d(indices)]
    k = len(idx)
    if k not in (1, 2):
        raise ValueError("marginals by inversion are limited to one or two coordinates")
    if len(set(idx)) != k or min(idx) < 0 or max(idx) >= p.dim:
        raise ValueError(f"invalid coordinate indices {idx} for dimension {p.dim}")
    pts, _ = as_points(points, k)

    def cf(t_sub):
        t_full = np.zeros((t_sub.shape[0], p.dim))
        t_full[:, idx] = t_sub
        return msgh_cf(t_full, p)

    radius = _cf_radius(lambda t: np.abs(cf(t)), k)

    if k == 1:
        y = pts[:, 0]

        def integrand(t):
            phi = cf(np.array([[t]]))[0]
            return (np.exp(-1j * t * y) * phi).real

        val, _ = integrate.quad_vec(integrand, 0.0, radius, epsabs=atol, epsrel=rtol, limit=20000)
        dens = val / np.pi
    else:

        def integrand(t):
            phi = cf(t)
            return (np.exp(-1j * (t @ pts.T)) * phi[:, None]).real

        res = integrate.cubature(
            integrand, [0.0, -radius], [radius, radius], rtol=rtol, atol=atol
        )
        dens = 2.0 * res.estimate / (2.0 * np.pi) ** 2
    return np.maximum(dens, 0.0)


def canonicalize(p: MsghParams) -> MsghParams:
    """
    Fold per-direction ``delta_m`` and ``|A|`` into the identifiable form.

    Uses the rescaling ``A_m -> k_m**2 A_m``, ``delta_m -> delta_m / k_m``,
    ``gamma_m -> k_m gamma_m`` (density invariant) with ``k_m`` chosen so that
    every ``delta_m`` becomes the same ``delta`` and ``prod(A) == 1``.
    """
    d = p.delta_vec
    if np.ndim(p.delta) == 0 and abs(np.sum(np.log(p.A))) <= 1e-13 * p.dim:
        return p
    log_delta = (np.sum(2.0 * np.log(d) + np.log(p.A))) / (2.0 * p.dim)
    delta = float(np.exp(log_delta))
    k = d / delta
    A = k * k * p.A
    A = A / np.exp(np.mean(np.log(A)))
    return p.replace(A=A, gamma=k * p.gamma, delta=delta)


def canonicalize_gh(p: GhParams) -> GhParams:
    """Rescale to ``det(Sigma) = 1`` using ``(k**2 Sigma, k gamma, delta / k)``."""
    k = np.exp(-p.log_det_sigma() / (2.0 * p.dim))
    return GhParams(p.mu, k * k * p.Sigma, p.beta, k * p.gamma, p.delta / k, p.lam)
