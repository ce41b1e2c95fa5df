"""Model fitting: local REML per component, global variances, and GLS mean.

The nonstationary fit runs a box-constrained REML maximization of the
stationary anisotropic model over the neighborhood of each mixture
component, assembles the component parameter set, re-estimates whichever
variance quantities are not spatially varying by a second REML step with the
spatially-varying structure held fixed, and finishes with generalized least
squares for the mean coefficients.  The anisotropic fit is the degenerate
case with a single neighborhood covering everything.

Eigenvalues and variances are optimized on the log scale internally;
rotation angle and smoothness stay on their natural bounded scales.  All
bounds in configurations are on the natural scale.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg, optimize
from scipy.spatial.distance import pdist

from .correlation import FAMILIES, correlation, needs_smoothness
from .covariance import ns_cov_matrix, resolve_fields
from .errors import (
    ConfigurationError,
    InvalidParameterError,
    NotPositiveDefiniteError,
    RankDeficiencyError,
    SkipComponentError,
    UnfittableConfigurationError,
)
from .geometry import (
    ANGLE_MAX,
    MixtureComponents,
    ParamFields,
    as_locations,
    kernel_matrix,
    mixture_weights,
    neighborhood_indices,
    param_fields,
    spectral_params,
)
from .likelihood import SPDFactor, gls, restricted_loglik, spd_factor
from .simulation import default_weight_scale

# Natural-scale order of the bound/init vectors, mirroring the interface
# convention: local vectors cover (eig1, eig2, nugget, variance, smoothness),
# global vectors cover (nugget, variance, smoothness).
LOCAL_PARAM_ORDER = ("eig1", "eig2", "nugget", "variance", "smoothness")
GLOBAL_PARAM_ORDER = ("nugget", "variance", "smoothness")

_PENALTY = 1e10


@dataclass(frozen=True)
class OptimizerSettings:
    """Stopping rules for the box-constrained quasi-Newton optimizer."""

    max_iters: int = 500
    tol: float = 1e-8          # relative objective change
    grad_tol: float = 1e-6     # projected-gradient infinity norm
    fd_step: float = 1e-6      # finite-difference step on the internal scale


@dataclass
class FitConfig:
    """Everything a fit needs besides the data.

    Bound and initial-value vectors follow :data:`LOCAL_PARAM_ORDER` and
    :data:`GLOBAL_PARAM_ORDER` on the natural scale.  ``weight_scale=None``
    selects the default rule (square of half the minimum component spacing).
    """

    family: str = "exponential"
    component_locations: np.ndarray | None = None
    fit_radius: float | None = None
    weight_scale: float | None = None
    ns_nugget: bool = False
    ns_variance: bool = False
    local_lower: np.ndarray | None = None
    local_upper: np.ndarray | None = None
    global_lower: np.ndarray | None = None
    global_upper: np.ndarray | None = None
    local_init: np.ndarray | None = None
    global_init: np.ndarray | None = None
    angle_init: float = math.pi / 4.0
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    min_neighborhood: int = 10

    def validate(self, need_components=True):
        if self.family not in FAMILIES:
            raise ConfigurationError(
                f"unknown correlation family {self.family!r}; choose from {FAMILIES}"
            )
        for name in ("local_lower", "local_upper", "local_init"):
            v = getattr(self, name)
            if v is None or np.asarray(v).shape != (5,):
                raise ConfigurationError(f"{name} must be a length-5 vector")
        for name in ("global_lower", "global_upper", "global_init"):
            v = getattr(self, name)
            if v is None or np.asarray(v).shape != (3,):
                raise ConfigurationError(f"{name} must be a length-3 vector")
        for lo_name, hi_name, init_name in (
            ("local_lower", "local_upper", "local_init"),
            ("global_lower", "global_upper", "global_init"),
        ):
            lo = np.asarray(getattr(self, lo_name), dtype=float)
            hi = np.asarray(getattr(self, hi_name), dtype=float)
            init = np.asarray(getattr(self, init_name), dtype=float)
            if np.any(lo >= hi):
                raise ConfigurationError(
                    f"{lo_name} must be strictly below {hi_name} elementwise"
                )
            if np.any(init < lo) or np.any(init > hi):
                raise ConfigurationError(f"{init_name} must lie inside the bounds")
            if np.any(lo <= 0):
                raise ConfigurationError(f"{lo_name} entries must be positive")
        if not (0.0 <= self.angle_init <= ANGLE_MAX):
            raise ConfigurationError("angle_init must lie in [0, pi/2]")
        if self.min_neighborhood < 1:
            raise ConfigurationError("min_neighborhood must be at least 1")
        if need_components:
            if self.component_locations is None:
                raise ConfigurationError("component locations are required")
            if self.fit_radius is None or not self.fit_radius > 0:
                raise ConfigurationError("fit_radius must be positive")
            if self.weight_scale is not None and not self.weight_scale > 0:
                raise ConfigurationError("weight_scale must be positive")


def _as_columns(data):
    z = np.asarray(data, dtype=float)
    return z.reshape(-1, 1) if z.ndim == 1 else z


def ols_variance(design, data):
    """Residual variance of an ordinary least squares fit, pooled over replicates."""
    x = np.asarray(design, dtype=float)
    z = _as_columns(data)
    n, p = x.shape
    if n <= p:
        raise ConfigurationError(f"need more than {p} observations for OLS defaults")
    coef, *_ = np.linalg.lstsq(x, z, rcond=None)
    resid = z - x @ coef
    return float(np.sum(resid * resid) / (z.shape[1] * (n - p)))


def default_config(
    coords,
    design,
    data,
    component_locations=None,
    family="exponential",
    fit_radius=None,
    **overrides,
):
    """Build a configuration with the documented default rules.

    Lower bounds sit at 1e-5; variance-type upper bounds at four times the
    OLS residual variance; eigenvalue upper bounds at one quarter of the
    maximum interpoint distance; smoothness capped at 30.  Initial values are
    a tenth of the maximum interpoint distance for the eigenvalues, a 10/90
    split of the OLS variance for nugget/variance, and 1 for smoothness.
    """
    pts = as_locations(coords, "coords")
    s2 = ols_variance(design, data)
    max_dist = float(pdist(pts).max()) if pts.shape[0] > 1 else 1.0
    lower = np.full(5, 1e-5)
    upper = np.array([max_dist / 4.0, max_dist / 4.0, 4.0 * s2, 4.0 * s2, 30.0])
    init = np.array([max_dist / 10.0, max_dist / 10.0, 0.1 * s2, 0.9 * s2, 1.0])
    config = FitConfig(
        family=family,
        component_locations=None if component_locations is None
        else as_locations(component_locations, "component locations"),
        fit_radius=fit_radius,
        local_lower=lower,
        local_upper=upper,
        local_init=init,
        global_lower=lower[2:].copy(),
        global_upper=upper[2:].copy(),
        global_init=init[2:].copy(),
    )
    return replace(config, **overrides) if overrides else config


@dataclass(frozen=True)
class LocalFitResult:
    """Stationary model estimates over one component neighborhood."""

    index: int
    n_neighbors: int
    eig1: float
    eig2: float
    angle: float
    nugget: float
    variance: float
    smoothness: float | None
    reml: float
    converged: bool
    skipped: bool = False
    message: str = ""
    dropped_columns: tuple = ()


def _independent_columns(x):
    """Indices of a maximal linearly independent column subset (pivoted QR)."""
    if x.shape[1] == 0:
        return np.array([], dtype=int)
    _, r, piv = linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.array([], dtype=int)
    rank = int(np.sum(diag > diag[0] * max(x.shape) * np.finfo(float).eps))
    return np.sort(piv[:rank])


def _stationary_objective(pts, x, z, family):
    """Negative restricted log-likelihood on the internal (log) scale."""
    n = pts.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    dx = pts[iu, 0] - pts[ju, 0]
    dy = pts[iu, 1] - pts[ju, 1]
    with_smooth = needs_smoothness(family)

    def negative(zvec):
        eig1, eig2 = math.exp(zvec[0]), math.exp(zvec[1])
        angle = zvec[2]
        nugget, variance = math.exp(zvec[3]), math.exp(zvec[4])
        smooth = zvec[5] if with_smooth else None
        k = kernel_matrix(eig1, eig2, angle)
        det = k[0, 0] * k[1, 1] - k[0, 1] * k[1, 0]
        q = (k[1, 1] * dx * dx - 2.0 * k[0, 1] * dx * dy + k[0, 0] * dy * dy) / det
        np.maximum(q, 0.0, out=q)
        g = correlation(family, np.sqrt(q), smoothness=smooth)
        c = np.zeros((n, n))
        vals = variance * g
        c[iu, ju] = vals
        c[ju, iu] = vals
        np.fill_diagonal(c, variance + nugget)
        try:
            value = restricted_loglik(spd_factor(c), x, z)
        except (NotPositiveDefiniteError, RankDeficiencyError):
            return _PENALTY
        return -value if np.isfinite(value) else _PENALTY

    return negative


def _local_bounds(config):
    """Transformed optimizer bounds in (eig1, eig2, angle, nugget, variance[, smoothness]) order."""
    lo = np.asarray(config.local_lower, dtype=float)
    hi = np.asarray(config.local_upper, dtype=float)
    bounds = [
        (math.log(lo[0]), math.log(hi[0])),
        (math.log(lo[1]), math.log(hi[1])),
        (0.0, ANGLE_MAX),
        (math.log(lo[2]), math.log(hi[2])),
        (math.log(lo[3]), math.log(hi[3])),
    ]
    if needs_smoothness(config.family):
        bounds.append((lo[4], hi[4]))
    return bounds


def _maximize_stationary_reml(pts, x, z, config):
    """Box-constrained REML maximization of the stationary anisotropic model."""
    init = np.asarray(config.local_init, dtype=float)
    start = [
        math.log(init[0]),
        math.log(init[1]),
        config.angle_init,
        math.log(init[2]),
        math.log(init[3]),
    ]
    if needs_smoothness(config.family):
        start.append(init[4])
    bounds = _local_bounds(config)
    objective = _stationary_objective(pts, x, z, config.family)
    opts = config.optimizer
    res = optimize.minimize(
        objective,
        np.asarray(start),
        method="L-BFGS-B",
        bounds=bounds,
        options=dict(
            maxiter=opts.max_iters,
            ftol=opts.tol,
            gtol=opts.grad_tol,
            eps=opts.fd_step,
        ),
    )
    lo = np.asarray(config.local_lower, dtype=float)
    hi = np.asarray(config.local_upper, dtype=float)
    natural = np.array([
        math.exp(res.x[0]),
        math.exp(res.x[1]),
        res.x[2],
        math.exp(res.x[3]),
        math.exp(res.x[4]),
    ])
    # undo exp/log roundoff at the box edges
    natural[[0, 1]] = np.clip(natural[[0, 1]], lo[0:2], hi[0:2])
    natural[2] = min(max(natural[2], 0.0), ANGLE_MAX)
    natural[[3, 4]] = np.clip(natural[[3, 4]], lo[2:4], hi[2:4])
    smooth = None
    if needs_smoothness(config.family):
        smooth = float(np.clip(res.x[5], lo[4], hi[4]))
    return natural, smooth, -float(res.fun), bool(res.success)


def local_fit(index, coords, design, data, config):
    """Fit the stationary anisotropic model on one component neighborhood.

    Mean coefficients are profiled out by REML, so only variance and
    covariance parameters are estimated.  Raises
    :class:`~nsgp.errors.SkipComponentError` when the neighborhood is smaller
    than ``max(min_neighborhood, p + 2)``.  Columns of the local design that
    are linearly dependent inside the neighborhood are dropped with a
    warning.
    """
    pts = as_locations(coords, "coords")
    x = np.asarray(design, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    z = _as_columns(data)
    center = as_locations(config.component_locations, "component locations")[index]
    idx = neighborhood_indices(pts, center, config.fit_radius)
    required = max(config.min_neighborhood, x.shape[1] + 2)
    if idx.size < required:
        raise SkipComponentError(index, int(idx.size), required)
    sub_x = x[idx]
    keep = _independent_columns(sub_x)
    dropped = tuple(int(j) for j in range(x.shape[1]) if j not in set(keep.tolist()))
    if dropped:
        warnings.warn(
            f"component {index}: dropping locally dependent design columns {dropped}",
            stacklevel=2,
        )
        sub_x = sub_x[:, keep]
    natural, smooth, reml, converged = _maximize_stationary_reml(
        pts[idx], sub_x, z[idx], config
    )
    return LocalFitResult(
        index=index,
        n_neighbors=int(idx.size),
        eig1=float(natural[0]),
        eig2=float(natural[1]),
        angle=float(natural[2]),
        nugget=float(natural[3]),
        variance=float(natural[4]),
        smoothness=smooth,
        reml=reml,
        converged=converged,
        dropped_columns=dropped,
    )


def _inherit_skipped(results, comp_locs, weight_scale):
    """Fill skipped components with weighted averages of fitted neighbors."""
    fitted = [r for r in results if not r.skipped]
    fitted_locs = comp_locs[[r.index for r in fitted]]
    kernels = np.stack([kernel_matrix(r.eig1, r.eig2, r.angle) for r in fitted])
    out = list(results)
    for i, r in enumerate(results):
        if not r.skipped:
            continue
        w = mixture_weights(comp_locs[i], fitted_locs, weight_scale)
        kern = np.einsum("k,kij->ij", w, kernels)
        eig1, eig2, angle = spectral_params(kern)
        smooth = None
        if fitted[0].smoothness is not None:
            smooth = float(w @ np.array([f.smoothness for f in fitted]))
        out[i] = replace(
            r,
            eig1=eig1,
            eig2=eig2,
            angle=angle,
            nugget=float(w @ np.array([f.nugget for f in fitted])),
            variance=float(w @ np.array([f.variance for f in fitted])),
            smoothness=smooth,
        )
    return out


def _components_from_results(results, comp_locs, weight_scale, family):
    kernels = np.stack([kernel_matrix(r.eig1, r.eig2, r.angle) for r in results])
    smooth = None
    if needs_smoothness(family):
        smooth = np.array([r.smoothness for r in results])
    return MixtureComponents(
        locations=comp_locs,
        kernels=kernels,
        variances=np.array([r.variance for r in results]),
        nuggets=np.array([r.nugget for r in results]),
        weight_scale=weight_scale,
        smoothnesses=smooth,
    )


def _global_step(pts, x, z, components, config, progress):
    """REML over the variance quantities that are not spatially varying."""
    family = config.family
    free = []
    if not config.ns_nugget:
        free.append("nugget")
    if not config.ns_variance:
        free.append("variance")
    if needs_smoothness(family):
        free.append("smoothness")
    if not free:
        return {"skipped": True, "free": ()}, {}
    progress("estimating global variance parameters")

    n = pts.shape[0]
    mix = param_fields(pts, components)
    var_base = mix.variances if config.ns_variance else np.ones(n)

    def base_matrix(smooth_value):
        smooth_field = None if smooth_value is None else np.full(n, smooth_value)
        fields = ParamFields(mix.kernels, var_base, np.zeros(n), smooth_field)
        return ns_cov_matrix(pts, fields, family)

    cached = None if needs_smoothness(family) else base_matrix(None)

    def cov_at(values):
        base = cached if cached is not None else base_matrix(values["smoothness"])
        if config.ns_variance:
            c = base.copy()
        else:
            c = values["variance"] * base
        d = mix.nuggets if config.ns_nugget else np.full(n, values["nugget"])
        c[np.diag_indices(n)] += d
        return c

    lo = np.asarray(config.global_lower, dtype=float)
    hi = np.asarray(config.global_upper, dtype=float)
    init = np.asarray(config.global_init, dtype=float)
    slot = {"nugget": 0, "variance": 1, "smoothness": 2}
    is_log = {"nugget": True, "variance": True, "smoothness": False}

    def decode(zvec):
        return {
            name: (math.exp(v) if is_log[name] else float(v))
            for name, v in zip(free, zvec)
        }

    start = [
        math.log(init[slot[name]]) if is_log[name] else init[slot[name]]
        for name in free
    ]
    bounds = [
        (math.log(lo[slot[name]]), math.log(hi[slot[name]]))
        if is_log[name]
        else (lo[slot[name]], hi[slot[name]])
        for name in free
    ]

    def negative(zvec):
        try:
            value = restricted_loglik(spd_factor(cov_at(decode(zvec))), x, z)
        except (NotPositiveDefiniteError, RankDeficiencyError):
            return _PENALTY
        return -value if np.isfinite(value) else _PENALTY

    start = np.asarray(start)
    initial_value = -negative(start)
    opts = config.optimizer
    res = optimize.minimize(
        negative,
        start,
        method="L-BFGS-B",
        bounds=bounds,
        options=dict(
            maxiter=opts.max_iters,
            ftol=opts.tol,
            gtol=opts.grad_tol,
            eps=opts.fd_step,
        ),
    )
    values = decode(res.x)
    for name in free:
        values[name] = float(np.clip(values[name], lo[slot[name]], hi[slot[name]]))
    diagnostics = {
        "skipped": False,
        "free": tuple(free),
        "initial": float(initial_value),
        "optimum": -float(res.fun),
        "converged": bool(res.success),
        "n_evals": int(res.nfev),
    }
    return diagnostics, values


@dataclass
class FittedModel:
    """A fitted spatial model, ready for prediction and inspection.

    ``nugget``, ``variance``, and ``smoothness`` hold the global estimates;
    a ``None`` nugget or variance means the quantity is spatially varying
    through the mixture components.  ``factor`` is the Cholesky factor of
    the training covariance including the nugget diagonal.
    """

    kind: str
    family: str
    components: MixtureComponents
    local_table: tuple
    ns_nugget: bool
    ns_variance: bool
    nugget: float | None
    variance: float | None
    smoothness: float | None
    beta: np.ndarray
    beta_cov: np.ndarray
    coords: np.ndarray
    design: np.ndarray
    data: np.ndarray
    factor: SPDFactor
    config: FitConfig | None = None
    global_fit: dict | None = None
    coord_names: tuple = ("x", "y")
    covariate_names: tuple = ()
    data_names: tuple = ()

    @property
    def n_replicates(self):
        return self.data.shape[1]

    def fields_at(self, points, require_nugget=True):
        """Per-location parameter fields under this model's configuration."""
        return resolve_fields(
            points,
            self.components,
            self.family,
            ns_variance=self.ns_variance,
            ns_nugget=self.ns_nugget,
            ns_smoothness=False,
            variance=self.variance,
            nugget=self.nugget,
            smoothness=self.smoothness,
            require_nugget=require_nugget,
        )

    @property
    def aniso_params(self):
        """Spectral anisotropy parameters (anisotropic models only)."""
        if self.kind != "anisotropic":
            raise InvalidParameterError(
                "aniso_params is only defined for anisotropic models"
            )
        r = self.local_table[0]
        return r.eig1, r.eig2, r.angle

    @property
    def aniso_matrix(self):
        if self.kind != "anisotropic":
            raise InvalidParameterError(
                "aniso_matrix is only defined for anisotropic models"
            )
        return self.components.kernels[0].copy()

    @classmethod
    def from_components(
        cls,
        coords,
        design,
        data,
        components,
        family,
        ns_variance=True,
        ns_nugget=True,
        variance=None,
        nugget=None,
        smoothness=None,
        beta=None,
    ):
        """Assemble a model directly from known component parameters.

        Computes the training covariance, its factorization, and (unless
        ``beta`` is given) the GLS mean coefficients; no optimization runs.
        """
        pts = as_locations(coords, "coords")
        x = np.asarray(design, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        z = _as_columns(data)
        fields = resolve_fields(
            pts, components, family,
            ns_variance=ns_variance, ns_nugget=ns_nugget, ns_smoothness=False,
            variance=variance, nugget=nugget, smoothness=smoothness,
        )
        cov = ns_cov_matrix(pts, fields, family)
        cov[np.diag_indices(pts.shape[0])] += fields.nuggets
        factor = spd_factor(cov, jitter=True)
        beta_hat, beta_cov = gls(factor, x, z)
        if beta is not None:
            beta_hat = np.asarray(beta, dtype=float)
        return cls(
            kind="nonstationary",
            family=family,
            components=components,
            local_table=(),
            ns_nugget=ns_nugget,
            ns_variance=ns_variance,
            nugget=None if ns_nugget else float(nugget),
            variance=None if ns_variance else float(variance),
            smoothness=None if smoothness is None else float(smoothness),
            beta=beta_hat,
            beta_cov=beta_cov,
            coords=pts,
            design=x,
            data=z,
            factor=factor,
        )


def _validated_inputs(coords, design, data):
    pts = as_locations(coords, "coords")
    x = np.asarray(design, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    z = _as_columns(data)
    n = pts.shape[0]
    if x.shape[0] != n or z.shape[0] != n:
        raise ConfigurationError(
            f"coords ({n}), design ({x.shape[0]}), and data ({z.shape[0]}) "
            "must have matching row counts"
        )
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(z)):
        raise ConfigurationError("design and data must be finite")
    keep = _independent_columns(x)
    if keep.size < x.shape[1]:
        missing = sorted(set(range(x.shape[1])) - set(keep.tolist()))
        raise RankDeficiencyError(
            f"design matrix is rank deficient; dependent columns {missing}"
        )
    return pts, x, z


def fit_nonstationary(coords, design, data, config, threads=1, progress=None):
    """Fit the nonstationary model end to end.

    Local fits across components are independent and run concurrently when
    ``threads > 1`` with results identical to sequential execution.  The
    ``progress`` callable, when given, receives one line per component and
    one for the global step.
    """
    progress = progress or (lambda message: None)
    pts, x, z = _validated_inputs(coords, design, data)
    config.validate(need_components=True)
    comp_locs = as_locations(config.component_locations, "component locations")
    n_comp = comp_locs.shape[0]
    weight_scale = (
        config.weight_scale
        if config.weight_scale is not None
        else default_weight_scale(comp_locs)
    )

    def run(k):
        try:
            count = neighborhood_indices(pts, comp_locs[k], config.fit_radius).size
            progress(f"[component {k + 1}/{n_comp}] fitting with {count} observations")
            return local_fit(k, pts, x, z, config)
        except SkipComponentError as err:
            warnings.warn(str(err), stacklevel=2)
            progress(f"[component {k + 1}/{n_comp}] skipped: {err}")
            return LocalFitResult(
                index=k,
                n_neighbors=err.count,
                eig1=math.nan,
                eig2=math.nan,
                angle=math.nan,
                nugget=math.nan,
                variance=math.nan,
                smoothness=None,
                reml=math.nan,
                converged=False,
                skipped=True,
                message=str(err),
            )

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            results = list(pool.map(run, range(n_comp)))
    else:
        results = [run(k) for k in range(n_comp)]

    if all(r.skipped for r in results):
        raise UnfittableConfigurationError(
            "every component neighborhood was below the minimum size; "
            "increase fit_radius or adjust the component grid"
        )
    results = _inherit_skipped(results, comp_locs, weight_scale)
    components = _components_from_results(
        results, comp_locs, weight_scale, config.family
    )

    global_fit, values = _global_step(pts, x, z, components, config, progress)
    nugget = values.get("nugget")
    variance = values.get("variance")
    smoothness = values.get("smoothness")

    fields = resolve_fields(
        pts, components, config.family,
        ns_variance=config.ns_variance, ns_nugget=config.ns_nugget,
        ns_smoothness=False,
        variance=variance, nugget=nugget, smoothness=smoothness,
    )
    cov = ns_cov_matrix(pts, fields, config.family)
    cov[np.diag_indices(pts.shape[0])] += fields.nuggets
    factor = spd_factor(cov, jitter=True)
    beta, beta_cov = gls(factor, x, z)

    return FittedModel(
        kind="nonstationary",
        family=config.family,
        components=components,
        local_table=tuple(results),
        ns_nugget=config.ns_nugget,
        ns_variance=config.ns_variance,
        nugget=nugget,
        variance=variance,
        smoothness=smoothness,
        beta=beta,
        beta_cov=beta_cov,
        coords=pts,
        design=x,
        data=z,
        factor=factor,
        config=config,
        global_fit=global_fit,
    )


def fit_anisotropic(coords, design, data, config=None, progress=None):
    """Fit the stationary anisotropic model to the full data set.

    The whole data set acts as a single neighborhood: one box-constrained
    REML maximization over (eig1, eig2, angle, nugget, variance) plus the
    smoothness for families that have one, followed by GLS for the mean.
    """
    progress = progress or (lambda message: None)
    pts, x, z = _validated_inputs(coords, design, data)
    if config is None:
        config = default_config(pts, x, z)
    config.validate(need_components=False)
    progress(f"fitting anisotropic model with {pts.shape[0]} observations")
    natural, smooth, reml, converged = _maximize_stationary_reml(pts, x, z, config)
    eig1, eig2, angle, nugget, variance = (float(v) for v in natural)
    table = LocalFitResult(
        index=0,
        n_neighbors=pts.shape[0],
        eig1=eig1,
        eig2=eig2,
        angle=angle,
        nugget=nugget,
        variance=variance,
        smoothness=smooth,
        reml=reml,
        converged=converged,
    )
    kernel = kernel_matrix(eig1, eig2, angle)
    components = MixtureComponents(
        locations=pts.mean(axis=0).reshape(1, 2),
        kernels=kernel.reshape(1, 2, 2),
        variances=np.array([variance]),
        nuggets=np.array([nugget]),
        weight_scale=1.0,
        smoothnesses=None if smooth is None else np.array([smooth]),
    )
    fields = resolve_fields(
        pts, components, config.family,
        ns_variance=False, ns_nugget=False, ns_smoothness=False,
        variance=variance, nugget=nugget, smoothness=smooth,
    )
    cov = ns_cov_matrix(pts, fields, config.family)
    cov[np.diag_indices(pts.shape[0])] += fields.nuggets
    factor = spd_factor(cov, jitter=True)
    beta, beta_cov = gls(factor, x, z)
    return FittedModel(
        kind="anisotropic",
        family=config.family,
        components=components,
        local_table=(table,),
        ns_nugget=False,
        ns_variance=False,
        nugget=nugget,
        variance=variance,
        smoothness=smooth,
        beta=beta,
        beta_cov=beta_cov,
        coords=pts,
        design=x,
        data=z,
        factor=factor,
        config=config,
    )
