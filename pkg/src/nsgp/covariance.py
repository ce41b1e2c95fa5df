"""Stationary anisotropic and closed-form nonstationary covariance functions.

The nonstationary covariance between two locations combines the local
standard deviations, a determinant prefactor built from the two local kernel
matrices, and the base correlation evaluated at the kernel-scaled distance.
Matrix assembly works from per-location parameter fields so fitted mixtures,
constant-parameter reductions, and simulation truth all share one code path.
"""

import numpy as np

from .correlation import correlation, needs_smoothness
from .errors import ConfigurationError, NumericalError
from .geometry import (
    MixtureComponents,
    ParamFields,
    as_locations,
    check_kernel,
    kernel_determinants,
    param_fields,
    scaled_distance,
)


def resolve_fields(
    points,
    components,
    family,
    ns_variance=False,
    ns_nugget=False,
    ns_smoothness=False,
    variance=None,
    nugget=None,
    smoothness=None,
    require_nugget=True,
):
    """Per-location parameter fields with overrides for non-varying parts.

    Kernel matrices always vary spatially through the mixture; the variance,
    nugget, and smoothness either vary too (flag set) or take the supplied
    global override.  A missing override for a non-varying quantity is a
    configuration error.
    """
    base = param_fields(points, components)
    n = len(base)

    if ns_variance:
        variances = base.variances
    else:
        if variance is None:
            raise ConfigurationError(
                "variance is not spatially varying; a global value is required"
            )
        variances = np.full(n, float(variance))

    if ns_nugget:
        nuggets = base.nuggets
    elif nugget is not None:
        nuggets = np.full(n, float(nugget))
    elif require_nugget:
        raise ConfigurationError(
            "nugget is not spatially varying; a global value is required"
        )
    else:
        nuggets = np.zeros(n)

    smooth = None
    if needs_smoothness(family):
        if ns_smoothness:
            if base.smoothnesses is None:
                raise ConfigurationError(
                    "components carry no smoothness values to vary spatially"
                )
            smooth = base.smoothnesses
        else:
            if smoothness is None:
                raise ConfigurationError(
                    f"family {family!r} needs a global smoothness when it is "
                    "not spatially varying"
                )
            smooth = np.full(n, float(smoothness))

    return ParamFields(base.kernels, variances, nuggets, smooth)


def _pair_values(dx, dy, ka, kb, det_a, det_b, var_a, var_b, sm_a, sm_b, family):
    """Nonstationary covariance for flat arrays of location pairs."""
    m00 = 0.5 * (ka[..., 0, 0] + kb[..., 0, 0])
    m01 = 0.5 * (ka[..., 0, 1] + kb[..., 0, 1])
    m11 = 0.5 * (ka[..., 1, 1] + kb[..., 1, 1])
    det_m = m00 * m11 - m01 * m01
    if np.any(det_m <= 0.0):
        raise NumericalError("averaged kernel matrix is not positive definite")
    q = (m11 * dx * dx - 2.0 * m01 * dx * dy + m00 * dy * dy) / det_m
    np.maximum(q, 0.0, out=q)
    prefactor = np.sqrt(np.sqrt(det_a * det_b)) / np.sqrt(det_m)
    smooth = None if sm_a is None else 0.5 * (sm_a + sm_b)
    g = correlation(family, np.sqrt(q), smoothness=smooth)
    return np.sqrt(var_a * var_b) * prefactor * g


def ns_cov_matrix(coords, fields, family):
    """Symmetric covariance matrix (no nugget) from per-location fields.

    Only the strict upper triangle is evaluated and mirrored; the diagonal is
    set to the local variances exactly.
    """
    pts = as_locations(coords, "coords")
    n = pts.shape[0]
    out = np.zeros((n, n))
    if n > 1:
        iu, ju = np.triu_indices(n, k=1)
        dets = kernel_determinants(fields.kernels)
        sm = fields.smoothnesses
        vals = _pair_values(
            pts[iu, 0] - pts[ju, 0],
            pts[iu, 1] - pts[ju, 1],
            fields.kernels[iu],
            fields.kernels[ju],
            dets[iu],
            dets[ju],
            fields.variances[iu],
            fields.variances[ju],
            None if sm is None else sm[iu],
            None if sm is None else sm[ju],
            family,
        )
        out[iu, ju] = vals
        out[ju, iu] = vals
    np.fill_diagonal(out, fields.variances)
    return out


def ns_cross_cov(coords_a, fields_a, coords_b, fields_b, family):
    """Rectangular covariance block (no nugget) between two location sets."""
    pa = as_locations(coords_a, "coords_a")
    pb = as_locations(coords_b, "coords_b")
    na, nb = pa.shape[0], pb.shape[0]
    dets_a = kernel_determinants(fields_a.kernels)
    dets_b = kernel_determinants(fields_b.kernels)
    sm_a, sm_b = fields_a.smoothnesses, fields_b.smoothnesses
    vals = _pair_values(
        pa[:, None, 0] - pb[None, :, 0],
        pa[:, None, 1] - pb[None, :, 1],
        fields_a.kernels[:, None],
        fields_b.kernels[None, :],
        dets_a[:, None],
        dets_b[None, :],
        fields_a.variances[:, None],
        fields_b.variances[None, :],
        None if sm_a is None else sm_a[:, None],
        None if sm_b is None else sm_b[None, :],
        family,
    )
    return vals.reshape(na, nb)


def stationary_covariance(s1, s2, kernel, variance, family, smoothness=None):
    """Stationary anisotropic covariance (no nugget) between two points.

    Evaluates ``variance * g(||K^{-1/2}(s1 - s2)||)`` for a single kernel
    matrix ``K`` shared by both locations.
    """
    k = check_kernel(kernel)
    if variance < 0:
        raise ConfigurationError(f"variance must be nonnegative, got {variance}")
    q = scaled_distance(s1, s2, k, k)
    return float(variance * correlation(family, np.sqrt(q), smoothness=smoothness))


def nonstationary_covariance(
    s1,
    s2,
    components,
    family,
    ns_variance=False,
    ns_nugget=False,
    ns_smoothness=False,
    variance=None,
    nugget=None,
    smoothness=None,
):
    """Closed-form nonstationary covariance (no nugget) between two points.

    The kernel matrices always come from the mixture; variance and smoothness
    come from the mixture when the corresponding flag is set, otherwise from
    the global override.  For smoothness families the correlation is
    evaluated at the average of the two local smoothness values.
    """
    p1 = np.asarray(s1, dtype=float).reshape(1, 2)
    p2 = np.asarray(s2, dtype=float).reshape(1, 2)
    f1 = resolve_fields(
        p1, components, family, ns_variance, ns_nugget, ns_smoothness,
        variance, nugget, smoothness, require_nugget=False,
    )
    if np.array_equal(p1, p2):
        return float(f1.variances[0])
    f2 = resolve_fields(
        p2, components, family, ns_variance, ns_nugget, ns_smoothness,
        variance, nugget, smoothness, require_nugget=False,
    )
    return float(ns_cross_cov(p1, f1, p2, f2, family)[0, 0])


def covariance_matrix(
    coords,
    components,
    family,
    ns_variance=False,
    ns_nugget=False,
    ns_smoothness=False,
    variance=None,
    nugget=None,
    smoothness=None,
):
    """Assemble the full covariance over ``coords`` plus its nugget diagonal.

    Returns
    -------
    (ndarray, ndarray)
        The symmetric (n, n) process covariance with local variances on the
        diagonal, and the length-n vector of nugget variances.
    """
    pts = as_locations(coords, "coords")
    fields = resolve_fields(
        pts, components, family, ns_variance, ns_nugget, ns_smoothness,
        variance, nugget, smoothness,
    )
    return ns_cov_matrix(pts, fields, family), fields.nuggets.copy()


def constant_fields(n, kernel, variance, nugget=0.0, smoothness=None):
    """Fields with identical parameters at every location (stationary case)."""
    k = check_kernel(kernel)
    smooth = None if smoothness is None else np.full(n, float(smoothness))
    return ParamFields(
        np.broadcast_to(k, (n, 2, 2)).copy(),
        np.full(n, float(variance)),
        np.full(n, float(nugget)),
        smooth,
    )


def stationary_cor_matrix(coords, kernel, family, smoothness=None):
    """Unit-variance stationary correlation matrix over ``coords``."""
    pts = as_locations(coords, "coords")
    k = check_kernel(kernel)
    n = pts.shape[0]
    det = k[0, 0] * k[1, 1] - k[0, 1] * k[1, 0]
    out = np.zeros((n, n))
    if n > 1:
        iu, ju = np.triu_indices(n, k=1)
        dx = pts[iu, 0] - pts[ju, 0]
        dy = pts[iu, 1] - pts[ju, 1]
        q = (k[1, 1] * dx * dx - 2.0 * k[0, 1] * dx * dy + k[0, 0] * dy * dy) / det
        np.maximum(q, 0.0, out=q)
        vals = correlation(family, np.sqrt(q), smoothness=smoothness)
        out[iu, ju] = vals
        out[ju, iu] = vals
    np.fill_diagonal(out, 1.0)
    return out
