"""Out-of-sample evaluation: squared error and the Gaussian probability score.

The probability score follows the negative-orientation convention: values
are always nonpositive and larger (closer to zero) is better.
"""

import math

import numpy as np
from scipy import special

from .errors import InvalidParameterError

_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def mspe(holdout, pred_means):
    """Mean squared prediction error over held-out observations."""
    z = np.asarray(holdout, dtype=float).ravel()
    zhat = np.asarray(pred_means, dtype=float).ravel()
    if z.shape != zhat.shape or z.size == 0:
        raise InvalidParameterError(
            f"holdout and predictions must have equal nonzero length, "
            f"got {z.size} and {zhat.size}"
        )
    return float(np.mean((z - zhat) ** 2))


def crps_gaussian(obs, mean, sd):
    """Probability score of a Gaussian predictive distribution.

    Uses the closed form ``sd * (1/sqrt(pi) - 2 phi(u) - u (2 Phi(u) - 1))``
    with ``u = (obs - mean)/sd``, where ``phi`` and ``Phi`` are the standard
    normal density and distribution functions.  Vectorized over all
    arguments; the result is nonpositive.
    """
    sd_arr = np.asarray(sd, dtype=float)
    if np.any(sd_arr <= 0) or not np.all(np.isfinite(sd_arr)):
        raise InvalidParameterError("prediction standard deviations must be positive")
    u = (np.asarray(obs, dtype=float) - np.asarray(mean, dtype=float)) / sd_arr
    dens = _INV_SQRT_2PI * np.exp(-0.5 * u * u)
    cum = special.ndtr(u)
    out = sd_arr * (_INV_SQRT_PI - 2.0 * dens - u * (2.0 * cum - 1.0))
    return float(out) if np.ndim(out) == 0 else out


def evaluate_predictions(holdout, pred_means, pred_sds):
    """MSPE and mean probability score of predictions against held-out data.

    Returns
    -------
    dict
        Keys ``"mspe"`` and ``"crps"`` (the score averaged over holdouts).
    """
    z = np.asarray(holdout, dtype=float).ravel()
    sds = np.asarray(pred_sds, dtype=float).ravel()
    means = np.asarray(pred_means, dtype=float).ravel()
    if not (z.shape == means.shape == sds.shape):
        raise InvalidParameterError(
            "holdout, means, and standard deviations must have equal length"
        )
    return {
        "mspe": mspe(z, means),
        "crps": float(np.mean(crps_gaussian(z, means, sds))),
    }
