import numpy as np


def mean_z(x, expected):
    """Componentwise z-scores of the sample mean."""
    se = x.std(axis=0, ddof=1) / np.sqrt(x.shape[0])
    return (x.mean(axis=0) - expected) / se


def cov_z(x, expected):
    """Entrywise z-scores of the sample covariance (delta-method standard errors)."""
    c = x - x.mean(axis=0)
    prods = c[:, :, None] * c[:, None, :]
    se = prods.std(axis=0, ddof=1) / np.sqrt(x.shape[0])
    return (prods.mean(axis=0) - expected) / se
