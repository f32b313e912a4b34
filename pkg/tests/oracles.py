"""
Independent reference computations used by the tests.

Nothing here calls the library under test: Bessel values come from the
integral representation, GIG quantities from direct quadrature of the
unnormalised density, densities from quadrature over the latent weight.
"""

import numpy as np
from scipy import integrate, optimize, stats


def log_bessel_k_quad(order, x):
    """``log K_order(x)`` from ``int_0^inf exp(-x cosh t) cosh(order t) dt``."""
    r = abs(float(order))
    x = float(x)
    peak = np.arcsinh(r / x)

    def expo(t):
        return -x * np.cosh(t) + r * t

    fmax = expo(peak)
    hi = peak + 1.0
    while expo(hi) > fmax - 80.0:
        hi = peak + 2.0 * (hi - peak)
    width = 1.0 / np.sqrt(x * np.cosh(peak))
    pts = sorted({p for p in (peak - 5 * width, peak, peak + 5 * width) if 0 < p < hi})

    def g(t):
        return np.exp(expo(t) - fmax) * 0.5 * (1.0 + np.exp(-2.0 * r * t))

    val, _ = integrate.quad(g, 0.0, hi, points=pts or None, epsabs=0, epsrel=1e-13, limit=500)
    return np.log(val) + fmax


def bessel_k_quad(order, x):
    return float(np.exp(log_bessel_k_quad(order, x)))


def _gig_log_kernel(w, lam, gamma, delta):
    return (lam - 1.0) * np.log(w) - 0.5 * (delta**2 / w + gamma**2 * w)


def _gig_mode(lam, gamma, delta):
    a = lam - 1.0
    return (a + np.sqrt(a * a + gamma**2 * delta**2)) / gamma**2


def _log_space_integral(log_f, centre):
    """``int_0^inf exp(log_f(w)) dw`` via ``w = centre * e^x``, rescaled at the peak."""

    def log_h(x):
        w = centre * np.exp(x)
        return log_f(w) + np.log(w)

    top = max(log_h(x) for x in np.linspace(-5, 5, 201))
    lo, hi = -1.0, 1.0
    while log_h(lo) > top - 80.0:
        lo *= 2.0
    while log_h(hi) > top - 80.0:
        hi *= 2.0
    val, _ = integrate.quad(lambda x: np.exp(log_h(x) - top), lo, hi, points=[0.0],
                            epsabs=0, epsrel=1e-13, limit=500)
    return val, top


def gig_moment_quad(r, lam, gamma, delta):
    """``E[W**r]`` as a ratio of two quadratures of the unnormalised density."""
    centre = _gig_mode(lam, gamma, delta)
    num, tn = _log_space_integral(lambda w: _gig_log_kernel(w, lam + r, gamma, delta), centre)
    den, td = _log_space_integral(lambda w: _gig_log_kernel(w, lam, gamma, delta), centre)
    return num / den * np.exp(tn - td)


def gig_log_norm_quad(lam, gamma, delta):
    """Log of the normalising constant ``int w^(lam-1) exp(...) dw``."""
    val, top = _log_space_integral(
        lambda w: _gig_log_kernel(w, lam, gamma, delta), _gig_mode(lam, gamma, delta))
    return np.log(val) + top


class GigCdfOracle:
    """Tabulated CDF of the GIG by piecewise quadrature, with its inverse."""

    def __init__(self, lam, gamma, delta, n_grid=4000):
        mode = _gig_mode(lam, gamma, delta)
        log_c = gig_log_norm_quad(lam, gamma, delta)

        def pdf(w):
            return np.exp(_gig_log_kernel(w, lam, gamma, delta) - log_c)

        grid = mode * np.exp(np.linspace(np.log(1e-6), np.log(1e3), n_grid))
        grid = np.concatenate([[0.0], grid])
        pieces = [integrate.quad(pdf, a, b, epsabs=1e-15, epsrel=1e-12)[0]
                  for a, b in zip(grid[:-1], grid[1:])]
        self.grid = grid
        self.cdf_values = np.concatenate([[0.0], np.cumsum(pieces)])

    def cdf(self, w):
        return np.interp(w, self.grid, self.cdf_values)

    def ppf(self, u):
        return np.interp(u, self.cdf_values, self.grid)


def gig_cf_quad(t, lam, gamma, delta):
    """``E[exp(i t W)]`` by quadrature of cos and sin parts."""
    log_c = gig_log_norm_quad(lam, gamma, delta)

    def pdf(w):
        return np.exp(_gig_log_kernel(w, lam, gamma, delta) - log_c)

    hi = _gig_mode(lam, gamma, delta)
    while _gig_log_kernel(hi, lam, gamma, delta) - log_c > -60.0:
        hi *= 2.0
    re = integrate.quad(lambda w: np.cos(t * w) * pdf(w), 0, hi, epsabs=1e-13, limit=2000)[0]
    im = integrate.quad(lambda w: np.sin(t * w) * pdf(w), 0, hi, epsabs=1e-13, limit=2000)[0]
    return complex(re, im)


def nig1d_density_mixture(y, mu, beta, gamma, delta, a=1.0):
    """
    One-dimensional NIG density from ``int N(y; mu + w a beta, w a) IG(w) dw``.

    The weight law is the inverse Gaussian with mean ``delta/gamma`` and
    shape ``delta**2``.
    """
    ig = stats.invgauss(mu=1.0 / (delta * gamma), scale=delta**2)

    def f(w):
        return stats.norm.pdf(y, mu + w * a * beta, np.sqrt(w * a)) * ig.pdf(w)

    return integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12, limit=500)[0]


def integrate_2d(f, centre=(0.0, 0.0), rtol=1e-9, atol=1e-12):
    """Integral over the plane of a vectorised ``f(points)`` via adaptive cubature."""
    c = np.asarray(centre, dtype=float)
    res = integrate.cubature(lambda x: f(x + c), [-np.inf, -np.inf], [np.inf, np.inf],
                             rtol=rtol, atol=atol, max_subdivisions=100000)
    return float(res.estimate), res.status


def minimize_quadratic(fun, x0):
    """Numerical minimiser with tight tolerances for small smooth problems."""
    res = optimize.minimize(fun, x0, method="Powell",
                            options={"xtol": 1e-13, "ftol": 1e-16, "maxiter": 100000})
    res = optimize.minimize(fun, res.x, method="Nelder-Mead",
                            options={"xatol": 1e-13, "fatol": 1e-16, "maxiter": 200000})
    return res.x


def best_angle(objective, n_grid=10_000):
    """Exhaustive scan of ``objective(theta)`` over ``[0, pi)``."""
    thetas = np.linspace(0.0, np.pi, n_grid, endpoint=False)
    vals = np.array([objective(t) for t in thetas])
    i = int(np.argmin(vals))
    return thetas[i], vals[i]
