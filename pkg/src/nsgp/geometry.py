"""Planar geometry for mixture-based nonstationary spatial models.

Kernel matrices are 2x2 symmetric positive-definite matrices describing local
geometric anisotropy, parameterized by their spectral decomposition (two
eigenvalues in squared-range units plus a rotation angle).  Spatially-varying
parameter fields are convex combinations of per-component values, weighted by
a normalized Gaussian decay of the squared distance to a fixed set of
component anchor locations.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidParameterError, NumericalError

ANGLE_MAX = math.pi / 2.0


def as_locations(points, name="locations"):
    """Coerce input to an (n, 2) float array of finite planar coordinates."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidParameterError(
            f"{name} must have shape (n, 2), got {np.shape(points)}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} contains non-finite coordinates")
    return arr


def kernel_matrix(eig1, eig2, angle):
    """Build a 2x2 anisotropy kernel matrix from spectral parameters.

    Parameters
    ----------
    eig1, eig2 : float
        Positive eigenvalues, in squared-range units.
    angle : float
        Rotation of the principal axes, in radians, within [0, pi/2].

    Returns
    -------
    ndarray
        The symmetric positive-definite matrix with eigenvalues
        ``{eig1, eig2}`` whose first principal axis is rotated by ``angle``.
    """
    if not (np.isfinite(eig1) and eig1 > 0) or not (np.isfinite(eig2) and eig2 > 0):
        raise InvalidParameterError(
            f"kernel eigenvalues must be positive, got ({eig1}, {eig2})"
        )
    if not (np.isfinite(angle) and 0.0 <= angle <= ANGLE_MAX):
        raise InvalidParameterError(
            f"rotation angle must lie in [0, pi/2], got {angle}"
        )
    c, s = math.cos(angle), math.sin(angle)
    off = (eig1 - eig2) * c * s
    return np.array(
        [
            [eig1 * c * c + eig2 * s * s, off],
            [off, eig1 * s * s + eig2 * c * c],
        ]
    )


def spectral_params(kernel):
    """Recover (eig1, eig2, angle) with angle in [0, pi/2] from a 2x2 kernel."""
    k = check_kernel(kernel)
    angle = 0.5 * math.atan2(2.0 * k[0, 1], k[0, 0] - k[1, 1])
    c, s = math.cos(angle), math.sin(angle)
    first = c * c * k[0, 0] + 2.0 * c * s * k[0, 1] + s * s * k[1, 1]
    second = k[0, 0] + k[1, 1] - first
    if angle < 0.0:
        first, second, angle = second, first, angle + ANGLE_MAX
    return float(first), float(second), float(angle)


def check_kernel(kernel, name="kernel"):
    """Validate a single 2x2 symmetric positive-definite kernel matrix."""
    k = np.asarray(kernel, dtype=float)
    if k.shape != (2, 2):
        raise InvalidParameterError(f"{name} must be 2x2, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise InvalidParameterError(f"{name} has non-finite entries")
    scale = max(abs(k[0, 0]), abs(k[1, 1]), 1e-300)
    if abs(k[0, 1] - k[1, 0]) > 1e-9 * scale:
        raise InvalidParameterError(f"{name} is not symmetric")
    if k[0, 0] <= 0 or k[0, 0] * k[1, 1] - k[0, 1] * k[1, 0] <= 0:
        raise InvalidParameterError(f"{name} is not positive definite")
    return k


def kernel_determinants(kernels):
    """Determinants of a stacked (n, 2, 2) array of kernel matrices."""
    k = np.asarray(kernels, dtype=float)
    return k[..., 0, 0] * k[..., 1, 1] - k[..., 0, 1] * k[..., 1, 0]


def scaled_distance(s1, s2, kernel1, kernel2):
    """Squared distance between two points scaled by the averaged kernels.

    Computes ``d^T [(K1 + K2)/2]^{-1} d`` with ``d = s1 - s2``.  Symmetric in
    its argument pairs and zero only when the points coincide.
    """
    p1 = np.asarray(s1, dtype=float).reshape(2)
    p2 = np.asarray(s2, dtype=float).reshape(2)
    a = 0.5 * (np.asarray(kernel1, dtype=float) + np.asarray(kernel2, dtype=float))
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if det <= 0.0 or a[0, 0] <= 0.0:
        raise NumericalError("averaged kernel matrix is not positive definite")
    dx, dy = p1[0] - p2[0], p1[1] - p2[1]
    q = (a[1, 1] * dx * dx - 2.0 * a[0, 1] * dx * dy + a[0, 0] * dy * dy) / det
    return max(float(q), 0.0)


@dataclass(frozen=True)
class MixtureComponents:
    """A set of anchor locations with per-component covariance parameters.

    Parameters at an arbitrary location are convex combinations of the
    component values under :func:`mixture_weights`.  ``smoothnesses`` is only
    present for correlation families with a smoothness parameter.

    Attributes
    ----------
    locations : (K, 2) ndarray
    kernels : (K, 2, 2) ndarray
    variances : (K,) ndarray
        Process variances, nonnegative.
    nuggets : (K,) ndarray
        Nugget variances, nonnegative.
    weight_scale : float
        Positive decay scale of the weight function, in squared-distance
        units.
    smoothnesses : (K,) ndarray or None
    """

    locations: np.ndarray
    kernels: np.ndarray
    variances: np.ndarray
    nuggets: np.ndarray
    weight_scale: float
    smoothnesses: np.ndarray | None = None

    def __post_init__(self):
        locs = as_locations(self.locations, "component locations")
        kernels = np.asarray(self.kernels, dtype=float)
        variances = np.atleast_1d(np.asarray(self.variances, dtype=float))
        nuggets = np.atleast_1d(np.asarray(self.nuggets, dtype=float))
        k = locs.shape[0]
        if k < 1:
            raise InvalidParameterError("at least one mixture component required")
        if kernels.shape != (k, 2, 2):
            raise InvalidParameterError(
                f"kernels must have shape ({k}, 2, 2), got {kernels.shape}"
            )
        for i in range(k):
            check_kernel(kernels[i], f"kernel {i}")
        if variances.shape != (k,) or nuggets.shape != (k,):
            raise InvalidParameterError(
                "variances and nuggets must each have one entry per component"
            )
        if np.any(variances < 0) or np.any(nuggets < 0):
            raise InvalidParameterError("variances and nuggets must be nonnegative")
        if not (np.isfinite(self.weight_scale) and self.weight_scale > 0):
            raise InvalidParameterError(
                f"weight_scale must be positive, got {self.weight_scale}"
            )
        smooth = self.smoothnesses
        if smooth is not None:
            smooth = np.atleast_1d(np.asarray(smooth, dtype=float))
            if smooth.shape != (k,):
                raise InvalidParameterError(
                    "smoothnesses must have one entry per component"
                )
            if np.any(smooth <= 0):
                raise InvalidParameterError("smoothnesses must be positive")
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "nuggets", nuggets)
        object.__setattr__(self, "weight_scale", float(self.weight_scale))
        object.__setattr__(self, "smoothnesses", smooth)

    @property
    def n_components(self):
        return self.locations.shape[0]


def mixture_weights(points, component_locations, weight_scale):
    """Normalized Gaussian-decay weights of each component at each point.

    ``w_k(s)`` is proportional to ``exp(-||s - b_k||^2 / (2 * weight_scale))``
    and the K weights at each point sum to one.  Evaluation subtracts the
    per-point maximum exponent so normalization is stable arbitrarily far
    from all components.

    Returns
    -------
    ndarray
        Shape (n, K), or (K,) when ``points`` is a single location.
    """
    single = np.asarray(points).ndim == 1
    pts = as_locations(points, "points")
    comps = as_locations(component_locations, "component locations")
    if not (np.isfinite(weight_scale) and weight_scale > 0):
        raise InvalidParameterError(
            f"weight_scale must be positive, got {weight_scale}"
        )
    d2 = cdist(pts, comps, "sqeuclidean")
    log_w = -d2 / (2.0 * weight_scale)
    log_w -= log_w.max(axis=1, keepdims=True)
    w = np.exp(log_w)
    w /= w.sum(axis=1, keepdims=True)
    return w[0] if single else w


@dataclass(frozen=True)
class ParamFields:
    """Per-location covariance parameters evaluated from a mixture."""

    kernels: np.ndarray            # (n, 2, 2)
    variances: np.ndarray          # (n,)
    nuggets: np.ndarray            # (n,)
    smoothnesses: np.ndarray | None = None

    def __len__(self):
        return self.variances.shape[0]


def param_fields(points, components):
    """Evaluate the spatially-varying parameter fields at many points."""
    w = mixture_weights(points, components.locations, components.weight_scale)
    w = np.atleast_2d(w)
    kernels = np.einsum("nk,kij->nij", w, components.kernels)
    variances = w @ components.variances
    nuggets = w @ components.nuggets
    smooth = None
    if components.smoothnesses is not None:
        smooth = w @ components.smoothnesses
    return ParamFields(kernels, variances, nuggets, smooth)


def evaluate_param_field(point, components):
    """Parameter tuple (kernel, variance, nugget, smoothness) at one point."""
    fields = param_fields(np.asarray(point, dtype=float).reshape(1, 2), components)
    smooth = None if fields.smoothnesses is None else float(fields.smoothnesses[0])
    return fields.kernels[0], float(fields.variances[0]), float(fields.nuggets[0]), smooth


def neighborhood_counts(coords, component_locations, radius):
    """Number of observations within ``radius`` of each component location.

    The boundary is inclusive: a point exactly at distance ``radius`` counts.
    """
    if not (np.isfinite(radius) and radius > 0):
        raise InvalidParameterError(f"radius must be positive, got {radius}")
    comps = as_locations(component_locations, "component locations")
    if np.size(coords) == 0:
        return np.zeros(comps.shape[0], dtype=int)
    pts = as_locations(coords, "coords")
    d2 = cdist(pts, comps, "sqeuclidean")
    return (d2 <= radius * radius).sum(axis=0).astype(int)


def neighborhood_indices(coords, center, radius):
    """Indices of observations within ``radius`` of ``center`` (inclusive)."""
    pts = as_locations(coords, "coords")
    c = np.asarray(center, dtype=float).reshape(2)
    d2 = (pts[:, 0] - c[0]) ** 2 + (pts[:, 1] - c[1]) ** 2
    return np.nonzero(d2 <= radius * radius)[0]
