"""Plot-ready data artifacts: ellipses, correlation fields, variance surfaces.

No rendering happens here; every function returns arrays suitable for CSV
or JSON emission.  Ellipses are the 0.5-probability contours of a bivariate
Gaussian with the kernel matrix as covariance.
"""

import math

import numpy as np

from .covariance import ns_cross_cov
from .errors import InvalidParameterError
from .geometry import as_locations, check_kernel

# chi-square(2 dof) median: the 0.5-probability ellipse radius scaling
HALF_PROBABILITY_QUANTILE = 2.0 * math.log(2.0)

ELLIPSE_VERTICES = 100


def ellipse_polygon(kernel, center=(0.0, 0.0), n_vertices=ELLIPSE_VERTICES,
                    quantile=HALF_PROBABILITY_QUANTILE):
    """Vertices of a probability ellipse for one kernel matrix.

    Returns an (n_vertices, 2) closed polyline (closure implied; the first
    vertex is not repeated).
    """
    k = check_kernel(kernel)
    if n_vertices < 3:
        raise InvalidParameterError("an ellipse polygon needs at least 3 vertices")
    c = np.asarray(center, dtype=float).reshape(2)
    lower = np.linalg.cholesky(k)
    t = np.linspace(0.0, 2.0 * math.pi, int(n_vertices), endpoint=False)
    circle = np.stack([np.cos(t), np.sin(t)])
    return c + math.sqrt(quantile) * (lower @ circle).T


def component_ellipses(model, n_vertices=ELLIPSE_VERTICES):
    """One ellipse polygon per mixture component of a fitted model.

    Returns a list of ``(label, index, polygon)`` tuples; anisotropic models
    yield a single entry labeled ``"stationary"``.
    """
    label = "stationary" if model.kind == "anisotropic" else "component"
    out = []
    for i in range(model.components.n_components):
        poly = ellipse_polygon(
            model.components.kernels[i],
            model.components.locations[i],
            n_vertices,
        )
        out.append((label, i, poly))
    return out


def correlation_surface(model, ref_loc, locations):
    """Correlation between a reference location and each query location.

    Correlations are the model covariance normalized by the local standard
    deviations; the nugget plays no role.
    """
    ref = as_locations(ref_loc, "reference location")
    pts = as_locations(locations, "locations")
    ref_fields = model.fields_at(ref, require_nugget=False)
    pt_fields = model.fields_at(pts, require_nugget=False)
    cov = ns_cross_cov(ref, ref_fields, pts, pt_fields, model.family)[0]
    denom = np.sqrt(ref_fields.variances[0] * pt_fields.variances)
    return cov / denom


def variance_surfaces(model, locations=None):
    """Spatially-varying process variance and nugget at query locations.

    Defaults to the model's training locations.  Constant (global) values
    broadcast to every location.
    """
    pts = model.coords if locations is None else as_locations(locations)
    fields = model.fields_at(pts)
    return pts, fields.variances.copy(), fields.nuggets.copy()
