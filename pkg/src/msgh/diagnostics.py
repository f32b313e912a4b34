"""
Quantile-level dependence ``chi(q)`` for bivariate samples.

``chi(q) = 2 - log P(U < q, V < q) / log q`` with ``U, V`` the probability
integral transforms of the two margins. It is 1 under comonotonicity and 0
under independence, and its limit as ``q -> 1`` measures tail dependence.
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .exceptions import DomainError

__all__ = ["ChiCurve", "chi_q", "chi_bounds"]

N_BOOT = 200
LEVEL = 0.95
MIN_SAMPLES = 50


@dataclass(frozen=True, eq=False)
class ChiCurve:
    """
    Estimated ``chi(q)`` with a bootstrap band.

    Entries where the joint empirical probability is zero are NaN and listed
    in ``undefined``.
    """

    q: np.ndarray
    chi_hat: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    bound_lower: np.ndarray
    bound_upper: np.ndarray
    n: int
    undefined: tuple = ()


def chi_bounds(q):
    """
    Range of attainable ``chi(q)``.

    Returns ``(lower, upper)`` with ``upper = 1`` and
    ``lower = 2 - log(2q - 1) / log(q)`` for ``q > 1/2``, ``-inf`` otherwise.

    Examples
    --------
    >>> lo, hi = chi_bounds(0.9)
    >>> round(lo, 4), hi
    (-0.1179, 1.0)
    """
    q_arr = np.asarray(q, dtype=float)
    if np.any(~((q_arr > 0) & (q_arr < 1))):
        raise DomainError("q must lie strictly between 0 and 1")
    with np.errstate(invalid="ignore", divide="ignore"):
        lower = np.where(q_arr > 0.5, 2.0 - np.log(np.maximum(2 * q_arr - 1, 1e-300)) / np.log(q_arr), -np.inf)
    upper = np.ones_like(q_arr)
    if q_arr.ndim == 0:
        return float(lower), 1.0
    return lower, upper


def _pseudo_obs(x):
    return stats.rankdata(x, method="average") / (x.size + 1)


def _chi_from_uniforms(u, v, q):
    joint = np.mean((u[:, None] < q) & (v[:, None] < q), axis=0)
    with np.errstate(divide="ignore"):
        return np.where(joint > 0, 2.0 - np.log(joint) / np.log(q), np.nan)


def chi_q(x, y, q_grid, n_boot=N_BOOT, level=LEVEL, seed=0, clamp=True):
    """
    Empirical ``chi(q)`` on a grid of quantile levels.

    Margins are replaced by ranks ``/(N + 1)``, so the estimate is invariant
    under strictly increasing transforms of either variable. The band is the
    percentile bootstrap over resampled pairs.

    Parameters
    ----------
    x, y : array_like, shape (N,)
        Paired observations, ``N >= 50``.
    q_grid : array_like
        Levels in ``(0, 1)``.
    n_boot : int
        Bootstrap resamples (0 disables the band).
    level : float
        Coverage of the band.
    seed : int
    clamp : bool
        Clip estimates to the attainable range from :func:`chi_bounds`.

    Returns
    -------
    ChiCurve
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != y.size:
        raise ValueError("x and y must have the same length")
    if x.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} pairs, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("x and y must be finite")
    q = np.asarray(q_grid, dtype=float).reshape(-1)
    lo_b, hi_b = chi_bounds(q)
    lo_b, hi_b = np.atleast_1d(lo_b), np.atleast_1d(hi_b)

    def estimate(u, v):
        chi = _chi_from_uniforms(u, v, q)
        return np.clip(chi, lo_b, hi_b) if clamp else chi

    chi = estimate(_pseudo_obs(x), _pseudo_obs(y))
    if n_boot > 0:
        rng = np.random.default_rng(seed)
        boot = np.empty((n_boot, q.size))
        for b in range(n_boot):
            idx = rng.integers(0, x.size, x.size)
            boot[b] = estimate(_pseudo_obs(x[idx]), _pseudo_obs(y[idx]))
        tail = 50.0 * (1.0 - level)
        with np.errstate(invalid="ignore"):
            lower = np.nanpercentile(boot, tail, axis=0)
            upper = np.nanpercentile(boot, 100.0 - tail, axis=0)
    else:
        lower = upper = np.full(q.size, np.nan)
    undefined = tuple(float(v) for v in q[np.isnan(chi)])
    return ChiCurve(q, chi, lower, upper, lo_b, hi_b, x.size, undefined)
