"""Gaussian likelihood machinery: SPD factorization, REML, and GLS.

All solves and log-determinants go through a lower-triangular Cholesky
factor; explicit inverses are never formed.  Replicated data columns share
one spatial covariance, so log-determinant terms scale with the replicate
count while quadratic forms sum over columns.
"""

import numpy as np
from scipy import linalg

from .errors import NotPositiveDefiniteError, RankDeficiencyError

JITTER_FACTOR = 1e-8


class SPDFactor:
    """Lower-triangular Cholesky factor of a symmetric positive-definite matrix."""

    __slots__ = ("lower", "jitter")

    def __init__(self, lower, jitter=0.0):
        self.lower = lower
        self.jitter = jitter

    @property
    def n(self):
        return self.lower.shape[0]

    def logdet(self):
        return 2.0 * float(np.sum(np.log(np.diag(self.lower))))

    def half_solve(self, b):
        """Solve ``L x = b`` (whitening transform)."""
        return linalg.solve_triangular(self.lower, b, lower=True, check_finite=False)

    def solve(self, b):
        """Solve ``(L L^T) x = b``."""
        y = linalg.solve_triangular(self.lower, b, lower=True, check_finite=False)
        return linalg.solve_triangular(
            self.lower, y, lower=True, trans="T", check_finite=False
        )


def spd_factor(matrix, jitter=False):
    """Factor a symmetric matrix, optionally retrying once with jitter.

    With ``jitter=True``, a failed factorization is retried after adding
    ``1e-8`` times the mean diagonal to the diagonal; a second failure
    raises.
    """
    try:
        return SPDFactor(linalg.cholesky(matrix, lower=True, check_finite=False))
    except linalg.LinAlgError:
        if not jitter:
            raise NotPositiveDefiniteError(
                "covariance matrix is not positive definite"
            ) from None
    eps = JITTER_FACTOR * float(np.mean(np.diag(matrix)))
    bumped = matrix + eps * np.eye(matrix.shape[0])
    try:
        return SPDFactor(linalg.cholesky(bumped, lower=True, check_finite=False), eps)
    except linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            "covariance matrix is not positive definite even after jitter"
        ) from None


def _as_columns(data):
    z = np.asarray(data, dtype=float)
    return z.reshape(-1, 1) if z.ndim == 1 else z


def full_loglik(beta, factor, design, data):
    """Gaussian log-likelihood of the mean coefficients and covariance.

    Computes ``-0.5 log|C| - 0.5 r^T C^{-1} r`` per replicate column with
    residuals ``r = z - X beta``, summed over columns.  Additive constants
    are omitted.
    """
    z = _as_columns(data)
    x = np.asarray(design, dtype=float)
    resid = z - (x @ np.asarray(beta, dtype=float))[:, None]
    white = factor.half_solve(resid)
    q = z.shape[1]
    return float(-0.5 * q * factor.logdet() - 0.5 * np.sum(white * white))


def _whitened_design(factor, design, data):
    x = np.asarray(design, dtype=float)
    z = _as_columns(data)
    n, p = x.shape
    if p >= n:
        raise RankDeficiencyError(
            f"design with {p} columns needs more than {n} observations"
        )
    wx = factor.half_solve(x)
    wz = factor.half_solve(z)
    gram = wx.T @ wx
    try:
        gram_lower = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise RankDeficiencyError(
            f"whitened design of shape {x.shape} is rank deficient"
        ) from None
    return wx, wz, gram_lower


def restricted_loglik(factor, design, data):
    """Restricted (REML) log-likelihood of the covariance parameters.

    Evaluates ``-0.5 log|C| - 0.5 log|X^T C^{-1} X| - 0.5 z^T P z`` with the
    mean-profiling projector ``P``, per replicate column, summed over
    columns.  Additive constants are omitted.
    """
    wx, wz, gram_lower = _whitened_design(factor, design, data)
    q = wz.shape[1]
    logdet_gram = 2.0 * float(np.sum(np.log(np.diag(gram_lower))))
    w = wx.T @ wz
    u = linalg.solve_triangular(gram_lower, w, lower=True, check_finite=False)
    quad = np.sum(wz * wz) - np.sum(u * u)
    return float(-0.5 * (q * (factor.logdet() + logdet_gram) + quad))


def gls(factor, design, data):
    """Generalized least squares coefficients and their covariance.

    For replicated data the coefficient estimate is the average of the
    per-column solutions, which equals GLS against the column mean.

    Returns
    -------
    (ndarray, ndarray)
        The length-p coefficient vector and the (p, p) matrix
        ``(X^T C^{-1} X)^{-1}``.
    """
    wx, wz, gram_lower = _whitened_design(factor, design, data)
    w = wx.T @ wz
    y = linalg.solve_triangular(gram_lower, w, lower=True, check_finite=False)
    betas = linalg.solve_triangular(gram_lower, y, lower=True, trans="T", check_finite=False)
    p = wx.shape[1]
    eye = np.eye(p)
    yi = linalg.solve_triangular(gram_lower, eye, lower=True, check_finite=False)
    cov = linalg.solve_triangular(gram_lower, yi, lower=True, trans="T", check_finite=False)
    cov = 0.5 * (cov + cov.T)
    return betas.mean(axis=1), cov
