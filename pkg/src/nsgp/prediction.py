"""Kriging prediction with plug-in parameter estimates.

Prediction means and variances follow the conditional-Gaussian formulas with
the fitted covariance everywhere: cross-covariance terms carry no nugget,
while the prediction-site self-variance includes the local nugget.  Large
prediction sets run in batches against the stored training factorization;
results do not depend on the batch size.
"""

from dataclasses import dataclass

import numpy as np

from .covariance import ns_cross_cov
from .errors import ConfigurationError
from .geometry import as_locations

DEFAULT_BATCH_SIZE = 1024


@dataclass(frozen=True)
class PredictionResult:
    """Kriging means and standard errors at prediction locations.

    ``means`` has one column per training replicate (a flat vector when the
    model was fit to a single replicate); ``sds`` is shared across replicates
    because the plug-in covariance does not depend on the data column.
    """

    means: np.ndarray
    sds: np.ndarray

    def __len__(self):
        return self.sds.shape[0]


def predict(model, pred_coords, pred_design=None, batch_size=DEFAULT_BATCH_SIZE):
    """Predict at new locations from a fitted model.

    Parameters
    ----------
    model : FittedModel
    pred_coords : (m, 2) array_like
    pred_design : (m, p) array_like, optional
        Covariate design at the prediction locations.  May be omitted for
        intercept-only models.
    batch_size : int
        Number of prediction sites handled per block.

    Returns
    -------
    PredictionResult
    """
    pts = as_locations(pred_coords, "prediction locations")
    m = pts.shape[0]
    p = model.design.shape[1]
    if pred_design is None:
        if p != 1:
            raise ConfigurationError(
                f"model has {p} mean coefficients; a prediction design is required"
            )
        x_new = np.ones((m, 1))
    else:
        x_new = np.asarray(pred_design, dtype=float)
        if x_new.ndim == 1:
            x_new = x_new.reshape(-1, 1)
        if x_new.shape != (m, p):
            raise ConfigurationError(
                f"prediction design shape {x_new.shape} does not match "
                f"{m} locations and {p} coefficients"
            )
    if batch_size < 1:
        raise ConfigurationError("batch_size must be at least 1")

    train_fields = model.fields_at(model.coords)
    resid = model.data - (model.design @ model.beta)[:, None]
    alpha = model.factor.solve(resid)

    q = model.data.shape[1]
    means = np.empty((m, q))
    sds = np.empty(m)
    for start in range(0, m, int(batch_size)):
        stop = min(start + int(batch_size), m)
        block_pts = pts[start:stop]
        block_fields = model.fields_at(block_pts)
        cross = ns_cross_cov(
            block_pts, block_fields, model.coords, train_fields, model.family
        )
        means[start:stop] = x_new[start:stop] @ model.beta[:, None] + cross @ alpha
        white = model.factor.half_solve(cross.T)
        prior = block_fields.variances + block_fields.nuggets
        var = prior - np.sum(white * white, axis=0)
        sds[start:stop] = np.sqrt(np.maximum(var, 0.0))

    return PredictionResult(means=means[:, 0] if q == 1 else means, sds=sds)
