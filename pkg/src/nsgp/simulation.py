"""Ground-truth kernel fields and seeded simulation of nonstationary data.

Component kernels come from log-linear regressions of the two eigenvalues
and a scaled inverse-logit regression of the rotation angle on the planar
coordinates.  Field simulation draws replicates through a Cholesky square
root of the assembled covariance, with one child random stream per
replicate so outputs are reproducible and order-stable.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .correlation import validate_family
from .covariance import ns_cov_matrix
from .errors import ConfigurationError, InvalidParameterError
from .geometry import ParamFields, as_locations, check_kernel, kernel_matrix, mixture_weights
from .likelihood import spd_factor

EIG1_COEF_DEFAULT = (-1.3, 0.5, -0.6)
EIG2_COEF_DEFAULT = (-1.4, -0.1, 0.2)
ANGLE_COEF_DEFAULT = (0.0, -0.15, 0.15)


@dataclass(frozen=True)
class KernelGlmCoefs:
    """Regression coefficients (intercept, x-slope, y-slope) per parameter."""

    eig1: tuple = EIG1_COEF_DEFAULT
    eig2: tuple = EIG2_COEF_DEFAULT
    angle: tuple = ANGLE_COEF_DEFAULT

    def __post_init__(self):
        for name in ("eig1", "eig2", "angle"):
            c = np.asarray(getattr(self, name), dtype=float)
            if c.shape != (3,) or not np.all(np.isfinite(c)):
                raise InvalidParameterError(
                    f"{name} coefficients must be three finite numbers"
                )
            object.__setattr__(self, name, tuple(float(v) for v in c))


def validate_domain(domain):
    """Check an (x_min, x_max, y_min, y_max) rectangle is non-degenerate."""
    d = tuple(float(v) for v in domain)
    if len(d) != 4 or not all(math.isfinite(v) for v in d):
        raise ConfigurationError("domain must be (x_min, x_max, y_min, y_max)")
    if not (d[0] < d[1] and d[2] < d[3]):
        raise ConfigurationError(f"domain rectangle is degenerate: {d}")
    return d


def grid_locations(domain, nx, ny):
    """Regular grid over the domain, x varying fastest (expand-grid order)."""
    d = validate_domain(domain)
    if nx < 2 or ny < 2:
        raise ConfigurationError("grid needs at least 2 points per axis")
    x = np.linspace(d[0], d[1], int(nx))
    y = np.linspace(d[2], d[3], int(ny))
    return np.column_stack([np.tile(x, int(ny)), np.repeat(y, int(nx))])


def component_grid(domain, n_components):
    """Evenly spaced component anchors over the domain.

    ``n_components`` must be a perfect square so the anchors form a grid.
    """
    k = int(n_components)
    side = math.isqrt(k)
    if side * side != k or k < 1:
        raise ConfigurationError(
            f"number of grid components must be a perfect square, got {k}"
        )
    if side == 1:
        d = validate_domain(domain)
        return np.array([[0.5 * (d[0] + d[1]), 0.5 * (d[2] + d[3])]])
    return grid_locations(domain, side, side)


def glm_kernels(domain, component_locations=None, coefs=None, n_components=9):
    """Component kernel matrices from coordinate regressions.

    Both eigenvalues follow log-linear models in the coordinates; the
    rotation angle is ``pi/2`` times the inverse logit of its linear
    predictor.  When ``component_locations`` is omitted they default to an
    evenly spaced grid over the domain.

    Returns
    -------
    (ndarray, ndarray)
        Component locations (K, 2) and kernels (K, 2, 2).
    """
    validate_domain(domain)
    if component_locations is None:
        component_locations = component_grid(domain, n_components)
    locs = as_locations(component_locations, "component locations")
    coefs = coefs or KernelGlmCoefs()
    design = np.column_stack([np.ones(locs.shape[0]), locs])
    eig1 = np.exp(design @ np.asarray(coefs.eig1))
    eig2 = np.exp(design @ np.asarray(coefs.eig2))
    angle = 0.5 * math.pi * expit(design @ np.asarray(coefs.angle))
    kernels = np.stack(
        [kernel_matrix(a, b, t) for a, b, t in zip(eig1, eig2, angle)]
    )
    return locs, kernels


def default_weight_scale(component_locations):
    """Square of half the minimum spacing between component anchors.

    A single component has no spacing; its weight is one everywhere, so any
    positive value works and 1.0 is returned.
    """
    locs = as_locations(component_locations, "component locations")
    k = locs.shape[0]
    if k == 1:
        return 1.0
    diff = locs[:, None, :] - locs[None, :, :]
    d2 = (diff**2).sum(axis=2)
    d2[np.diag_indices(k)] = np.inf
    return 0.25 * float(d2.min())


@dataclass(frozen=True)
class SimOutput:
    """Everything produced by one simulation run."""

    locations: np.ndarray          # (n, 2)
    component_locations: np.ndarray
    component_kernels: np.ndarray
    site_kernels: np.ndarray       # (n, 2, 2) kernels at the data locations
    cov: np.ndarray                # (n, n) true covariance including nugget
    data: np.ndarray               # (n, q)
    seed: int
    weight_scale: float = field(default=1.0)


def _site_kernels(locations, component_locations, component_kernels, weight_scale,
                  kernel_mode, coefs):
    if kernel_mode == "mixture":
        w = mixture_weights(locations, component_locations, weight_scale)
        return np.einsum("nk,kij->nij", np.atleast_2d(w), component_kernels)
    if kernel_mode == "glm":
        if coefs is None:
            raise ConfigurationError("kernel_mode='glm' requires regression coefs")
        design = np.column_stack([np.ones(locations.shape[0]), locations])
        eig1 = np.exp(design @ np.asarray(coefs.eig1))
        eig2 = np.exp(design @ np.asarray(coefs.eig2))
        angle = 0.5 * math.pi * expit(design @ np.asarray(coefs.angle))
        return np.stack(
            [kernel_matrix(a, b, t) for a, b, t in zip(eig1, eig2, angle)]
        )
    raise ConfigurationError(f"unknown kernel_mode {kernel_mode!r}")


def simulate_field(
    locations,
    component_locations,
    component_kernels,
    nugget=0.1,
    variance=1.0,
    beta=(4.0,),
    smoothness=None,
    family="exponential",
    design=None,
    replicates=1,
    seed=0,
    weight_scale=None,
    kernel_mode="mixture",
    coefs=None,
):
    """Draw seeded replicates of a nonstationary Gaussian field.

    Kernels at the data locations are mixture-weighted component kernels by
    default (``kernel_mode="glm"`` re-evaluates the coordinate regressions
    instead).  The covariance is the nonstationary form with constant
    variance plus a constant nugget on the diagonal; each replicate comes
    from an independent child stream of the seed, and locations are
    canonicalized by coordinate order internally so a permutation of the
    input produces the same permutation of the output.

    Returns
    -------
    SimOutput
    """
    locs = as_locations(locations, "locations")
    comp_locs = as_locations(component_locations, "component locations")
    kernels = np.asarray(component_kernels, dtype=float)
    n = locs.shape[0]
    if kernels.shape != (comp_locs.shape[0], 2, 2):
        raise ConfigurationError(
            "component kernels must be one 2x2 matrix per component location"
        )
    for i in range(kernels.shape[0]):
        check_kernel(kernels[i], f"component kernel {i}")
    if nugget < 0 or variance < 0:
        raise InvalidParameterError("nugget and variance must be nonnegative")
    q = int(replicates)
    if q < 1:
        raise InvalidParameterError("replicates must be at least 1")
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if design is None:
        if beta.shape != (1,):
            raise ConfigurationError(
                "a design matrix is required when beta has more than one entry"
            )
        design = np.ones((n, 1))
    design = np.asarray(design, dtype=float)
    if design.shape != (n, beta.shape[0]):
        raise ConfigurationError(
            f"design shape {design.shape} does not match {n} locations and "
            f"{beta.shape[0]} coefficients"
        )
    if weight_scale is None:
        weight_scale = default_weight_scale(comp_locs)

    order = np.lexsort((locs[:, 1], locs[:, 0]))
    sorted_locs = locs[order]

    site_kernels = _site_kernels(
        sorted_locs, comp_locs, kernels, weight_scale, kernel_mode, coefs
    )
    validate_family(family, smoothness)
    fields = ParamFields(
        site_kernels,
        np.full(n, float(variance)),
        np.full(n, float(nugget)),
        None if smoothness is None else np.full(n, float(smoothness)),
    )
    cov = ns_cov_matrix(sorted_locs, fields, family)
    total = cov + float(nugget) * np.eye(n)

    mean = design[order] @ beta
    if variance == 0.0 and nugget == 0.0:
        draws = np.tile(mean[:, None], (1, q))
    else:
        factor = spd_factor(total, jitter=True)
        streams = np.random.SeedSequence(int(seed)).spawn(q)
        draws = np.empty((n, q))
        for j, stream in enumerate(streams):
            eps = np.random.Generator(np.random.PCG64(stream)).standard_normal(n)
            draws[:, j] = mean + factor.lower @ eps

    inverse = np.empty(n, dtype=int)
    inverse[order] = np.arange(n)
    return SimOutput(
        locations=locs,
        component_locations=comp_locs,
        component_kernels=kernels,
        site_kernels=site_kernels[inverse],
        cov=total[np.ix_(inverse, inverse)],
        data=draws[inverse],
        seed=int(seed),
        weight_scale=float(weight_scale),
    )
