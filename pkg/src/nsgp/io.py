"""File formats: CSV datasets, JSON configuration, and model artifacts.

CSV files are RFC-4180 style with a header row; every column is numeric and
rows with missing or non-finite entries are rejected with their line
numbers.  Floats serialize through ``repr`` so parse/emit round trips are
lossless.  Model artifacts are JSON documents that round-trip byte
identically; provenance timestamps honor ``SOURCE_DATE_EPOCH`` so runs can
be made reproducible.
"""

import csv
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import ConfigurationError, DataError
from .fitting import FitConfig, FittedModel, LocalFitResult, OptimizerSettings
from .geometry import MixtureComponents
from .likelihood import SPDFactor

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# CSV

def _format_value(value):
    return repr(float(value))


def read_csv_columns(path):
    """Read a numeric CSV with a header row into named columns.

    Returns
    -------
    (list of str, dict of str -> ndarray)

    Raises
    ------
    DataError
        On missing headers, ragged rows, or missing/non-numeric/non-finite
        values; messages carry 1-based file line numbers.
    """
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as err:
        raise DataError(f"cannot read {path}: {err}") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        header = [name.strip() for name in header]
        if len(set(header)) != len(header) or any(not name for name in header):
            raise DataError(f"{path}: header has empty or duplicate column names")
        columns = [[] for _ in header]
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path} line {line_no}: expected {len(header)} fields, "
                    f"got {len(row)}"
                )
            for j, token in enumerate(row):
                token = token.strip()
                if token == "":
                    raise DataError(
                        f"{path} line {line_no}: missing value in column "
                        f"{header[j]!r}"
                    )
                try:
                    value = float(token)
                except ValueError:
                    raise DataError(
                        f"{path} line {line_no}: non-numeric value {token!r} "
                        f"in column {header[j]!r}"
                    ) from None
                if not np.isfinite(value):
                    raise DataError(
                        f"{path} line {line_no}: non-finite value in column "
                        f"{header[j]!r}"
                    )
                columns[j].append(value)
    return header, {name: np.asarray(col) for name, col in zip(header, columns)}


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, columns):
    """Write named columns as CSV, atomically and at full float precision.

    Columns are numeric arrays except that string columns (labels) pass
    through unchanged.
    """
    arrays = []
    for col in columns:
        arr = np.asarray(col)
        arrays.append(arr if arr.dtype.kind in "US" else arr.astype(float).ravel())
    if len(arrays) != len(header):
        raise ConfigurationError("one column per header name is required")
    if arrays and any(a.shape[0] != arrays[0].shape[0] for a in arrays):
        raise ConfigurationError("all columns must have equal length")
    import io as _io

    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(header)
    n = arrays[0].shape[0] if arrays else 0
    for i in range(n):
        writer.writerow(
            [a[i] if a.dtype.kind in "US" else _format_value(a[i]) for a in arrays]
        )
    _atomic_write(path, buffer.getvalue())


# ---------------------------------------------------------------------------
# Datasets

@dataclass(frozen=True)
class Dataset:
    """Coordinates, named covariate columns, and named replicate columns."""

    coords: np.ndarray
    covariates: np.ndarray
    data: np.ndarray
    coord_names: tuple
    covariate_names: tuple
    data_names: tuple

    @property
    def design(self):
        """Mean design matrix: an intercept column plus the covariates."""
        return np.column_stack([np.ones(self.coords.shape[0]), self.covariates])


def _require_columns(path, available, wanted, what):
    missing = [name for name in wanted if name not in available]
    if missing:
        raise DataError(
            f"{path}: missing {what} column(s) {missing}; available: "
            f"{sorted(available)}"
        )


def read_dataset(path, coord_names=("x", "y"), covariate_names=(), data_names=None):
    """Load a dataset CSV, selecting coordinate, covariate, and data columns.

    ``data_names=None`` selects every column that is neither a coordinate
    nor a covariate.
    """
    header, cols = read_csv_columns(path)
    coord_names = tuple(coord_names)
    covariate_names = tuple(covariate_names)
    _require_columns(path, cols, coord_names, "coordinate")
    _require_columns(path, cols, covariate_names, "covariate")
    if len(coord_names) != 2:
        raise ConfigurationError("exactly two coordinate columns are required")
    if data_names is None:
        taken = set(coord_names) | set(covariate_names)
        data_names = tuple(name for name in header if name not in taken)
    else:
        data_names = tuple(data_names)
        _require_columns(path, cols, data_names, "data")
    if not data_names:
        raise DataError(f"{path}: no data columns left after coordinates/covariates")
    coords = np.column_stack([cols[name] for name in coord_names])
    if covariate_names:
        covariates = np.column_stack([cols[name] for name in covariate_names])
    else:
        covariates = np.empty((coords.shape[0], 0))
    data = np.column_stack([cols[name] for name in data_names])
    return Dataset(coords, covariates, data, coord_names, covariate_names, data_names)


# ---------------------------------------------------------------------------
# JSON helpers

def load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as err:
        raise ConfigurationError(f"cannot read {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"{path}: invalid JSON ({err})") from None


def dump_json(obj, path):
    _atomic_write(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def sha256_digest(path):
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def timestamp():
    """ISO-8601 UTC creation time; SOURCE_DATE_EPOCH overrides the clock."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(tz=timezone.utc)
    return moment.isoformat()


def _opt_float(value):
    if value is None:
        return None
    value = float(value)
    return value if np.isfinite(value) else None


# ---------------------------------------------------------------------------
# Model artifacts

def _config_to_dict(config):
    if config is None:
        return None
    return {
        "family": config.family,
        "component_locations": None
        if config.component_locations is None
        else np.asarray(config.component_locations).tolist(),
        "fit_radius": _opt_float(config.fit_radius),
        "weight_scale": _opt_float(config.weight_scale),
        "ns_nugget": bool(config.ns_nugget),
        "ns_variance": bool(config.ns_variance),
        "local_lower": np.asarray(config.local_lower).tolist(),
        "local_upper": np.asarray(config.local_upper).tolist(),
        "global_lower": np.asarray(config.global_lower).tolist(),
        "global_upper": np.asarray(config.global_upper).tolist(),
        "local_init": np.asarray(config.local_init).tolist(),
        "global_init": np.asarray(config.global_init).tolist(),
        "angle_init": float(config.angle_init),
        "optimizer": {
            "max_iters": int(config.optimizer.max_iters),
            "tol": float(config.optimizer.tol),
            "grad_tol": float(config.optimizer.grad_tol),
            "fd_step": float(config.optimizer.fd_step),
        },
        "min_neighborhood": int(config.min_neighborhood),
    }


def _config_from_dict(doc):
    if doc is None:
        return None
    return FitConfig(
        family=doc["family"],
        component_locations=None
        if doc["component_locations"] is None
        else np.asarray(doc["component_locations"], dtype=float),
        fit_radius=doc["fit_radius"],
        weight_scale=doc["weight_scale"],
        ns_nugget=doc["ns_nugget"],
        ns_variance=doc["ns_variance"],
        local_lower=np.asarray(doc["local_lower"], dtype=float),
        local_upper=np.asarray(doc["local_upper"], dtype=float),
        global_lower=np.asarray(doc["global_lower"], dtype=float),
        global_upper=np.asarray(doc["global_upper"], dtype=float),
        local_init=np.asarray(doc["local_init"], dtype=float),
        global_init=np.asarray(doc["global_init"], dtype=float),
        angle_init=doc["angle_init"],
        optimizer=OptimizerSettings(**doc["optimizer"]),
        min_neighborhood=doc["min_neighborhood"],
    )


def _local_result_to_dict(result):
    return {
        "index": result.index,
        "n_neighbors": result.n_neighbors,
        "eig1": _opt_float(result.eig1),
        "eig2": _opt_float(result.eig2),
        "angle": _opt_float(result.angle),
        "nugget": _opt_float(result.nugget),
        "variance": _opt_float(result.variance),
        "smoothness": _opt_float(result.smoothness),
        "reml": _opt_float(result.reml),
        "converged": bool(result.converged),
        "skipped": bool(result.skipped),
        "message": result.message,
        "dropped_columns": list(result.dropped_columns),
    }


def _local_result_from_dict(doc):
    def _or_nan(value):
        return float("nan") if value is None else float(value)

    return LocalFitResult(
        index=doc["index"],
        n_neighbors=doc["n_neighbors"],
        eig1=_or_nan(doc["eig1"]),
        eig2=_or_nan(doc["eig2"]),
        angle=_or_nan(doc["angle"]),
        nugget=_or_nan(doc["nugget"]),
        variance=_or_nan(doc["variance"]),
        smoothness=None if doc["smoothness"] is None else float(doc["smoothness"]),
        reml=_or_nan(doc["reml"]),
        converged=doc["converged"],
        skipped=doc["skipped"],
        message=doc["message"],
        dropped_columns=tuple(doc["dropped_columns"]),
    )


def model_to_dict(model):
    """Serialize a fitted model to plain JSON-compatible types."""
    comp = model.components
    n = model.factor.n
    tril = np.tril_indices(n)
    return {
        "kind": model.kind,
        "family": model.family,
        "ns_nugget": bool(model.ns_nugget),
        "ns_variance": bool(model.ns_variance),
        "nugget": _opt_float(model.nugget),
        "variance": _opt_float(model.variance),
        "smoothness": _opt_float(model.smoothness),
        "components": {
            "locations": comp.locations.tolist(),
            "kernels": comp.kernels.tolist(),
            "variances": comp.variances.tolist(),
            "nuggets": comp.nuggets.tolist(),
            "weight_scale": comp.weight_scale,
            "smoothnesses": None
            if comp.smoothnesses is None
            else comp.smoothnesses.tolist(),
        },
        "local_table": [_local_result_to_dict(r) for r in model.local_table],
        "beta": model.beta.tolist(),
        "beta_cov": model.beta_cov.tolist(),
        "coords": model.coords.tolist(),
        "design": model.design.tolist(),
        "data": model.data.tolist(),
        "factor": {
            "lower_triangle": model.factor.lower[tril].tolist(),
            "jitter": float(model.factor.jitter),
        },
        "global_fit": model.global_fit,
        "config": _config_to_dict(model.config),
        "coord_names": list(model.coord_names),
        "covariate_names": list(model.covariate_names),
        "data_names": list(model.data_names),
    }


def model_from_dict(doc):
    """Rebuild a fitted model from its serialized form."""
    comp_doc = doc["components"]
    components = MixtureComponents(
        locations=np.asarray(comp_doc["locations"], dtype=float),
        kernels=np.asarray(comp_doc["kernels"], dtype=float),
        variances=np.asarray(comp_doc["variances"], dtype=float),
        nuggets=np.asarray(comp_doc["nuggets"], dtype=float),
        weight_scale=comp_doc["weight_scale"],
        smoothnesses=None
        if comp_doc["smoothnesses"] is None
        else np.asarray(comp_doc["smoothnesses"], dtype=float),
    )
    coords = np.asarray(doc["coords"], dtype=float)
    n = coords.shape[0]
    lower = np.zeros((n, n))
    lower[np.tril_indices(n)] = np.asarray(doc["factor"]["lower_triangle"])
    return FittedModel(
        kind=doc["kind"],
        family=doc["family"],
        components=components,
        local_table=tuple(_local_result_from_dict(r) for r in doc["local_table"]),
        ns_nugget=doc["ns_nugget"],
        ns_variance=doc["ns_variance"],
        nugget=doc["nugget"],
        variance=doc["variance"],
        smoothness=doc["smoothness"],
        beta=np.asarray(doc["beta"], dtype=float),
        beta_cov=np.asarray(doc["beta_cov"], dtype=float),
        coords=coords,
        design=np.asarray(doc["design"], dtype=float),
        data=np.asarray(doc["data"], dtype=float),
        factor=SPDFactor(lower, doc["factor"]["jitter"]),
        config=_config_from_dict(doc["config"]),
        global_fit=doc["global_fit"],
        coord_names=tuple(doc["coord_names"]),
        covariate_names=tuple(doc["covariate_names"]),
        data_names=tuple(doc["data_names"]),
    )


def save_model(path, model, inputs=None, extra=None):
    """Write a model artifact with schema version and provenance."""
    provenance = {
        "tool": f"nsgp {__version__}",
        "created": timestamp(),
        "inputs": {
            name: sha256_digest(p) for name, p in (inputs or {}).items()
        },
    }
    if extra:
        provenance.update(extra)
    artifact = {
        "schema_version": SCHEMA_VERSION,
        "provenance": provenance,
        "model": model_to_dict(model),
    }
    dump_json(artifact, path)


def load_model(path):
    """Read a model artifact; returns ``(model, artifact_dict)``."""
    artifact = load_json(path)
    version = artifact.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigurationError(
            f"{path}: unsupported artifact schema version {version!r}"
        )
    return model_from_dict(artifact["model"]), artifact
