"""
Modified Bessel function of the third kind, ``K_r(x)``, for real order.

Both functions broadcast over ``order`` and ``x``. Evaluation is delegated to
the exponentially scaled AMOS routine (:func:`scipy.special.kve`), which is
accurate to a few ulps for real order and positive argument. The log version
works on the scaled value so that it stays finite far beyond the point where
``K_r(x)`` itself underflows.

Since ``K_{-r} = K_r`` the absolute order is always used, which makes the
symmetry exact.
"""

import numpy as np
from scipy.special import gammaln, k0e, k1e, kv, kve

from .exceptions import DomainError

__all__ = ["bessel_k", "log_bessel_k", "bessel_k_ratio"]


def _check_args(order, x):
    order = np.asarray(order, dtype=float)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(order)):
        raise DomainError("Bessel order must be finite")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("Bessel argument must be finite and strictly positive")
    order = np.abs(order)
    # K is smooth in the order; subnormal orders trip up the AMOS kernel
    return np.where(order < 1e-150, 0.0, order), x


def _kve(v, z):
    # integer orders 0-2 (the EM hot path) go through the faster Cephes kernels
    if np.ndim(v) == 0:
        if v == 0:
            return k0e(z)
        if v == 1:
            return k1e(z)
        if v == 2:
            return k0e(z) + (2.0 / z) * k1e(z)
    return kve(v, z)


def _scalar_or_array(value, *inputs):
    if all(np.ndim(a) == 0 for a in inputs):
        return float(value)
    return value


def bessel_k(order, x):
    """
    Modified Bessel function of the third kind ``K_order(x)``.

    Parameters
    ----------
    order : float or array_like
        Real order. Negative orders are mapped to their absolute value.
    x : float or array_like
        Strictly positive argument.

    Returns
    -------
    float or ndarray
        ``K_order(x)``, broadcast over the inputs.

    Raises
    ------
    DomainError
        If any ``x <= 0`` or any input is not finite.

    Examples
    --------
    >>> round(bessel_k(0.5, 1.0), 7)
    0.4610685
    """
    v, z = _check_args(order, x)
    return _scalar_or_array(kv(v, z), order, x)


def log_bessel_k(order, x):
    """
    Natural log of ``K_order(x)``.

    Computed as ``log(kve(order, x)) - x``. Where the scaled value overflows
    (large order, tiny argument) the leading small-argument term
    ``Gamma(r) 2^(r-1) x^(-r)`` is used instead.
    """
    v, z = _check_args(order, x)
    with np.errstate(over="ignore", divide="ignore"):
        out = np.log(_kve(v, z)) - z
    v, z, out = np.broadcast_arrays(v, z, out)
    bad = np.isposinf(out)
    if np.any(bad):
        vb, zb = v[bad], z[bad]
        out = np.array(out, dtype=float)
        out[bad] = gammaln(vb) + (vb - 1.0) * np.log(2.0) - vb * np.log(zb)
    return _scalar_or_array(out, order, x)


def bessel_k_ratio(order_num, order_den, x):
    """Ratio ``K_order_num(x) / K_order_den(x)`` without over- or underflow."""
    a, z = _check_args(order_num, x)
    b, _ = _check_args(order_den, x)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ratio = _kve(a, z) / _kve(b, z)
    bad = ~np.isfinite(ratio)
    if np.any(bad):
        a, b, z, ratio = np.broadcast_arrays(a, b, z, np.array(ratio, dtype=float))
        ratio = ratio.copy()
        ratio[bad] = np.exp(log_bessel_k(a[bad], z[bad]) - log_bessel_k(b[bad], z[bad]))
    return _scalar_or_array(ratio, order_num, order_den, x)
