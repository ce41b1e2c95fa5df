"""Isotropic correlation families on the unit-range scale.

Every family satisfies ``g(0) = 1`` and ``|g(h)| <= 1``.  Distances are
already scaled by the anisotropy machinery, so no range parameter appears
here.  The smoothness parameter applies to the matern and cauchy families
only.
"""

import numpy as np
from scipy import special

from .errors import InvalidParameterError

FAMILIES = (
    "exponential",
    "gaussian",
    "matern",
    "cauchy",
    "spherical",
    "circular",
    "cubic",
    "wave",
)

SMOOTHNESS_FAMILIES = ("matern", "cauchy")

# Upper fit bound on the smoothness; evaluation itself only requires > 0.
SMOOTHNESS_MAX = 30.0


def needs_smoothness(family):
    return family in SMOOTHNESS_FAMILIES


def validate_family(family, smoothness=None, fit_bound=False):
    """Check a family tag and its smoothness against the allowed set."""
    if family not in FAMILIES:
        raise InvalidParameterError(
            f"unknown correlation family {family!r}; choose from {FAMILIES}"
        )
    if needs_smoothness(family):
        if smoothness is None:
            raise InvalidParameterError(f"family {family!r} requires a smoothness")
        s = np.asarray(smoothness, dtype=float)
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise InvalidParameterError("smoothness must be positive and finite")
        if fit_bound and np.any(s > SMOOTHNESS_MAX):
            raise InvalidParameterError(
                f"smoothness above the fit bound {SMOOTHNESS_MAX}"
            )
    elif smoothness is not None:
        raise InvalidParameterError(
            f"family {family!r} does not take a smoothness parameter"
        )


def _check_smoothness(smoothness, family):
    kap = np.asarray(smoothness, dtype=float)
    if not np.all(np.isfinite(kap)) or np.any(kap <= 0):
        raise InvalidParameterError(f"{family} smoothness must be positive")
    return kap


def _matern(h, kap):
    h, kap = np.broadcast_arrays(h, kap)
    out = np.ones(h.shape)
    mask = h > 0
    hm, km = h[mask], kap[mask]
    with np.errstate(over="ignore", invalid="ignore"):
        vals = (2.0 ** (1.0 - km) / special.gamma(km)) * hm**km * special.kv(km, hm)
    # Overflow in kv occurs only for h tiny relative to the order, where the
    # correlation is 1 to double precision; underflow products at large h are
    # exactly 0.
    bad = ~np.isfinite(vals)
    if np.any(bad):
        vals[bad] = np.where(hm[bad] < 1.0, 1.0, 0.0)
    out[mask] = vals
    return out


def _compact(h, values_inside):
    out = np.zeros(h.shape)
    inside = h <= 1.0
    out[inside] = values_inside(h[inside])
    return out


def correlation(family, h, smoothness=None):
    """Evaluate a correlation family at nonnegative scaled distances.

    Parameters
    ----------
    family : str
        One of :data:`FAMILIES`.
    h : array_like
        Nonnegative scaled distances.
    smoothness : array_like, optional
        Required for matern and cauchy; broadcastable against ``h`` so that
        pairwise-averaged smoothness fields pass through directly.

    Returns
    -------
    float or ndarray
        Correlation values in [-1, 1]; scalar when ``h`` is scalar.
    """
    if family not in FAMILIES:
        raise InvalidParameterError(
            f"unknown correlation family {family!r}; choose from {FAMILIES}"
        )
    scalar = np.ndim(h) == 0 and np.ndim(smoothness if smoothness is not None else 0) == 0
    harr = np.atleast_1d(np.asarray(h, dtype=float))
    if np.any(harr < 0) or not np.all(np.isfinite(harr)):
        raise InvalidParameterError("distances must be finite and nonnegative")
    if family in SMOOTHNESS_FAMILIES:
        if smoothness is None:
            raise InvalidParameterError(f"family {family!r} requires a smoothness")
        kap = _check_smoothness(smoothness, family)
    elif smoothness is not None:
        raise InvalidParameterError(
            f"family {family!r} does not take a smoothness parameter"
        )

    if family == "exponential":
        out = np.exp(-harr)
    elif family == "gaussian":
        out = np.exp(-harr * harr)
    elif family == "matern":
        out = _matern(harr, kap)
    elif family == "cauchy":
        with np.errstate(over="ignore"):
            out = (1.0 + harr * harr) ** (-kap)
    elif family == "spherical":
        out = _compact(harr, lambda x: 1.0 - 1.5 * x + 0.5 * x**3)
    elif family == "circular":
        out = _compact(
            harr,
            lambda x: (2.0 / np.pi) * (np.arccos(x) - x * np.sqrt(1.0 - x * x)),
        )
    elif family == "cubic":
        out = _compact(
            harr,
            lambda x: 1.0 - (7.0 * x**2 - 8.75 * x**3 + 3.5 * x**5 - 0.75 * x**7),
        )
    else:  # wave
        out = np.sinc(harr / np.pi)

    return float(out[0]) if scalar else out
