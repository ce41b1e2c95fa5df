"""Command-line interface.

Subcommands: ``simulate``, ``fit``, ``fit-aniso``, ``predict``, ``evaluate``,
and ``plot-data``.  Progress goes to standard error; results go to files (or
standard output for ``evaluate``).  Exit codes: 0 success, 2 usage or
configuration error, 3 data error, 4 numerical failure.
"""

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import __version__
from .errors import (
    ConfigurationError,
    DataError,
    InvalidParameterError,
    NsgpError,
    NumericalError,
    UnfittableConfigurationError,
)
from .fitting import OptimizerSettings, default_config, fit_anisotropic, fit_nonstationary
from .geometry import as_locations, neighborhood_counts
from .io import (
    dump_json,
    load_json,
    load_model,
    read_csv_columns,
    read_dataset,
    save_model,
    sha256_digest,
    timestamp,
    write_csv,
)
from .plotdata import component_ellipses, correlation_surface, variance_surfaces
from .prediction import predict as predict_model
from .scoring import evaluate_predictions
from .simulation import (
    KernelGlmCoefs,
    component_grid,
    glm_kernels,
    grid_locations,
    simulate_field,
    validate_domain,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _progress(message):
    print(message, file=sys.stderr, flush=True)


# ---------------------------------------------------------------------------
# simulate

def _sim_locations(doc, domain, rng_seed):
    if "grid" in doc:
        nx, ny = (int(v) for v in doc["grid"])
        return grid_locations(domain, nx, ny)
    if "random" in doc:
        n = int(doc["random"])
        if n < 1:
            raise ConfigurationError("random location count must be positive")
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(
            [int(rng_seed), 0x10C5])))
        x = rng.uniform(domain[0], domain[1], n)
        y = rng.uniform(domain[2], domain[3], n)
        return np.column_stack([x, y])
    raise ConfigurationError("simulation config needs 'grid' or 'random' locations")


def _sim_components(doc, domain, coefs):
    spec = doc.get("components", {"grid_size": 3})
    if "locations" in spec:
        locs = as_locations(spec["locations"], "component locations")
        return glm_kernels(domain, locs, coefs)
    if "grid_size" in spec:
        side = int(spec["grid_size"])
        return glm_kernels(domain, component_grid(domain, side * side), coefs)
    raise ConfigurationError("components spec needs 'locations' or 'grid_size'")


def cmd_simulate(args):
    doc = load_json(args.config)
    seed = args.seed if args.seed is not None else doc.get("seed")
    if seed is None:
        raise ConfigurationError("a seed is required (--seed flag or config 'seed')")
    seed = int(seed)
    domain = validate_domain(doc.get("domain", (0.0, 5.0, 0.0, 5.0)))
    coef_doc = doc.get("kernel_coefs")
    coefs = KernelGlmCoefs(**coef_doc) if coef_doc else KernelGlmCoefs()
    comp_locs, comp_kernels = _sim_components(doc, domain, coefs)
    locations = _sim_locations(doc, domain, seed)

    beta = np.atleast_1d(np.asarray(doc.get("beta", [4.0]), dtype=float))
    covariates = doc.get("covariates", "coords" if beta.shape[0] == 3 else "none")
    if covariates == "coords":
        design = np.column_stack([np.ones(locations.shape[0]), locations])
        covariate_names = ["x", "y"]
    elif covariates == "none":
        design = np.ones((locations.shape[0], 1))
        covariate_names = []
    else:
        raise ConfigurationError("covariates must be 'coords' or 'none'")
    if design.shape[1] != beta.shape[0]:
        raise ConfigurationError(
            f"beta has {beta.shape[0]} entries but the design has "
            f"{design.shape[1]} columns"
        )

    replicates = int(doc.get("replicates", 1))
    sim = simulate_field(
        locations,
        comp_locs,
        comp_kernels,
        nugget=float(doc.get("nugget", 0.1)),
        variance=float(doc.get("variance", 1.0)),
        beta=beta,
        smoothness=doc.get("smoothness"),
        family=doc.get("family", "exponential"),
        design=design,
        replicates=replicates,
        seed=seed,
        weight_scale=doc.get("weight_scale"),
        kernel_mode=doc.get("site_kernels", "mixture"),
        coefs=coefs,
    )

    os.makedirs(args.out_dir, exist_ok=True)
    data_path = os.path.join(args.out_dir, "data.csv")
    kernels_path = os.path.join(args.out_dir, "kernels.json")
    manifest_path = os.path.join(args.out_dir, "manifest.json")

    data_names = [f"z{j + 1}" for j in range(replicates)]
    columns = [sim.locations[:, 0], sim.locations[:, 1]]
    columns += [sim.data[:, j] for j in range(replicates)]
    write_csv(data_path, ["x", "y"] + data_names, columns)

    dump_json(
        {
            "component_locations": sim.component_locations.tolist(),
            "component_kernels": sim.component_kernels.tolist(),
            "site_kernels": sim.site_kernels.tolist(),
            "weight_scale": sim.weight_scale,
            "seed": sim.seed,
        },
        kernels_path,
    )
    dump_json(
        {
            "tool": f"nsgp {__version__}",
            "command": "simulate",
            "created": timestamp(),
            "seed": seed,
            "config": doc,
            "outputs": {
                "data.csv": sha256_digest(data_path),
                "kernels.json": sha256_digest(kernels_path),
            },
        },
        manifest_path,
    )
    _progress(f"wrote {data_path}, {kernels_path}, {manifest_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit

def _dataset_from_args(args, doc):
    columns = doc.get("columns", {})
    return read_dataset(
        args.data,
        coord_names=columns.get("coords", ("x", "y")),
        covariate_names=columns.get("covariates", ()),
        data_names=columns.get("data"),
    )


def _bbox(coords):
    return (
        float(coords[:, 0].min()),
        float(coords[:, 0].max()),
        float(coords[:, 1].min()),
        float(coords[:, 1].max()),
    )


def _component_locations(doc, dataset):
    spec = doc.get("components")
    if spec is None:
        warnings.warn(
            "no component locations supplied; using a 3x3 grid over the data "
            "bounding box (supply locations for non-rectangular domains)"
        )
        return component_grid(_bbox(dataset.coords), 9)
    if "locations" in spec:
        return as_locations(spec["locations"], "component locations")
    if "grid_size" in spec:
        side = int(spec["grid_size"])
        warnings.warn(
            "gridding components over the data bounding box; supply locations "
            "for non-rectangular domains"
        )
        return component_grid(_bbox(dataset.coords), side * side)
    raise ConfigurationError("components spec needs 'locations' or 'grid_size'")


def _fit_config(doc, dataset, anisotropic):
    overrides = {}
    if "weight_scale" in doc and doc["weight_scale"] is not None:
        overrides["weight_scale"] = float(doc["weight_scale"])
    for flag in ("ns_nugget", "ns_variance"):
        if flag in doc:
            overrides[flag] = bool(doc[flag])
    bounds = doc.get("bounds", {})
    for key in ("local_lower", "local_upper", "global_lower", "global_upper"):
        if key in bounds:
            overrides[key] = np.asarray(bounds[key], dtype=float)
    init = doc.get("init", {})
    if "local" in init:
        overrides["local_init"] = np.asarray(init["local"], dtype=float)
    if "global" in init:
        overrides["global_init"] = np.asarray(init["global"], dtype=float)
    if "angle" in init:
        overrides["angle_init"] = float(init["angle"])
    if "min_neighborhood" in doc:
        overrides["min_neighborhood"] = int(doc["min_neighborhood"])
    if "optimizer" in doc:
        overrides["optimizer"] = OptimizerSettings(**doc["optimizer"])

    if anisotropic:
        component_locations = None
        fit_radius = None
    else:
        component_locations = _component_locations(doc, dataset)
        if "fit_radius" not in doc:
            raise ConfigurationError("fit_radius is required to fit the model")
        fit_radius = float(doc["fit_radius"])

    return default_config(
        dataset.coords,
        dataset.design,
        dataset.data,
        component_locations=component_locations,
        family=doc.get("family", "exponential"),
        fit_radius=fit_radius,
        **overrides,
    )


def _finish_fit(args, model, dataset):
    model.coord_names = dataset.coord_names
    model.covariate_names = dataset.covariate_names
    model.data_names = dataset.data_names
    extra = {"command": "fit" if model.kind == "nonstationary" else "fit-aniso"}
    if args.seed is not None:
        extra["seed"] = int(args.seed)
    save_model(
        args.output,
        model,
        inputs={"data": args.data, "config": args.config},
        extra=extra,
    )
    _progress(f"wrote {args.output}")
    return EXIT_OK


def cmd_fit(args):
    doc = load_json(args.config)
    dataset = _dataset_from_args(args, doc)
    config = _fit_config(doc, dataset, anisotropic=False)
    if args.preflight:
        counts = neighborhood_counts(
            dataset.coords, config.component_locations, config.fit_radius
        )
        for k, count in enumerate(counts):
            print(f"component {k + 1}: {int(count)} observations")
        return EXIT_OK
    model = fit_nonstationary(
        dataset.coords,
        dataset.design,
        dataset.data,
        config,
        threads=args.threads,
        progress=_progress,
    )
    return _finish_fit(args, model, dataset)


def cmd_fit_aniso(args):
    doc = load_json(args.config)
    dataset = _dataset_from_args(args, doc)
    config = _fit_config(doc, dataset, anisotropic=True)
    model = fit_anisotropic(
        dataset.coords, dataset.design, dataset.data, config, progress=_progress
    )
    return _finish_fit(args, model, dataset)


# ---------------------------------------------------------------------------
# predict

def cmd_predict(args):
    model, _ = load_model(args.model)
    header, cols = read_csv_columns(args.locations)
    for name in model.coord_names:
        if name not in cols:
            raise DataError(
                f"{args.locations}: missing coordinate column {name!r}"
            )
    coords = np.column_stack([cols[name] for name in model.coord_names])
    parts = [np.ones(coords.shape[0])]
    for name in model.covariate_names:
        if name not in cols:
            raise DataError(
                f"{args.locations}: missing covariate column {name!r} "
                "required by the model"
            )
        parts.append(cols[name])
    design = np.column_stack(parts)
    result = predict_model(model, coords, design, batch_size=args.batch_size)
    means = result.means if result.means.ndim == 2 else result.means[:, None]
    names = list(model.coord_names)
    columns = [coords[:, 0], coords[:, 1]]
    if means.shape[1] == 1:
        names.append("pred_mean")
        columns.append(means[:, 0])
    else:
        for j, data_name in enumerate(model.data_names):
            names.append(f"pred_mean_{data_name}")
            columns.append(means[:, j])
    names.append("pred_sd")
    columns.append(result.sds)
    write_csv(args.output, names, columns)
    _progress(f"wrote {args.output} ({coords.shape[0]} locations)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate

def cmd_evaluate(args):
    h_header, h_cols = read_csv_columns(args.holdout)
    p_header, p_cols = read_csv_columns(args.predictions)
    value_name = args.data_column
    if value_name is None:
        candidates = [n for n in h_header if n not in ("x", "y")]
        if not candidates:
            raise DataError(f"{args.holdout}: no data column found")
        value_name = candidates[0]
    if value_name not in h_cols:
        raise DataError(f"{args.holdout}: missing data column {value_name!r}")
    if "pred_mean" in p_cols:
        mean_name = "pred_mean"
    elif f"pred_mean_{value_name}" in p_cols:
        mean_name = f"pred_mean_{value_name}"
    else:
        raise DataError(f"{args.predictions}: no prediction mean column found")
    if "pred_sd" not in p_cols:
        raise DataError(f"{args.predictions}: missing column 'pred_sd'")
    holdout = h_cols[value_name]
    means = p_cols[mean_name]
    sds = p_cols["pred_sd"]
    if holdout.shape[0] != means.shape[0]:
        raise DataError(
            f"holdout has {holdout.shape[0]} rows but predictions have "
            f"{means.shape[0]}"
        )
    shared = [n for n in ("x", "y") if n in h_cols and n in p_cols]
    for name in shared:
        if np.max(np.abs(h_cols[name] - p_cols[name])) > 1e-8:
            raise DataError(
                f"holdout and prediction {name!r} coordinates do not match"
            )
    metrics = evaluate_predictions(holdout, means, sds)
    text = json.dumps(metrics, indent=2)
    print(text)
    if args.output:
        dump_json(metrics, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# plot-data

def _parse_pair(text, what):
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigurationError(f"{what} must be two comma-separated numbers")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigurationError(f"{what} must be numeric") from None


def _plot_locations(args, model):
    if args.locations:
        header, cols = read_csv_columns(args.locations)
        for name in model.coord_names:
            if name not in cols:
                raise DataError(f"{args.locations}: missing column {name!r}")
        return np.column_stack([cols[name] for name in model.coord_names])
    grid_spec = args.grid if args.grid else "101,101"
    nx, ny = (int(v) for v in _parse_pair(grid_spec, "--grid"))
    if args.bounds:
        parts = args.bounds.split(",")
        if len(parts) != 4:
            raise ConfigurationError("--bounds must be x0,x1,y0,y1")
        domain = validate_domain([float(v) for v in parts])
    else:
        domain = validate_domain(_bbox(model.coords))
    return grid_locations(domain, nx, ny)


def cmd_plot_data(args):
    model, _ = load_model(args.model)
    if args.mode == "ellipses":
        series, vertex, xs, ys = [], [], [], []
        entries = component_ellipses(model)
        if args.stationary_model:
            stationary, _ = load_model(args.stationary_model)
            entries += component_ellipses(stationary)
        for label, index, poly in entries:
            name = "stationary" if label == "stationary" else f"component-{index}"
            for v in range(poly.shape[0]):
                series.append(name)
                vertex.append(float(v))
                xs.append(poly[v, 0])
                ys.append(poly[v, 1])
        write_csv(
            args.output,
            ["series", "vertex", "x", "y"],
            [np.asarray(series), vertex, xs, ys],
        )
    elif args.mode == "correlation":
        if not args.ref:
            raise ConfigurationError("correlation mode requires --ref 'x,y'")
        ref = _parse_pair(args.ref, "--ref")
        pts = _plot_locations(args, model)
        corr = correlation_surface(model, ref, pts)
        write_csv(args.output, ["x", "y", "correlation"], [pts[:, 0], pts[:, 1], corr])
    elif args.mode == "surfaces":
        pts = _plot_locations(args, model) if (args.locations or args.grid) else None
        pts, variances, nuggets = variance_surfaces(model, pts)
        write_csv(
            args.output,
            ["x", "y", "variance", "nugget"],
            [pts[:, 0], pts[:, 1], variances, nuggets],
        )
    else:
        raise ConfigurationError(f"unknown plot-data mode {args.mode!r}")
    _progress(f"wrote {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument(
        "--threads", type=int, default=1,
        help="worker threads for component fits (results are thread-invariant)",
    )

    parser = argparse.ArgumentParser(
        prog="nsgp",
        description="Nonstationary spatial Gaussian process modeling",
    )
    parser.add_argument("--version", action="version", version=f"nsgp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common],
                       help="simulate a nonstationary field")
    p.add_argument("--config", required=True, help="simulation config JSON")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", parents=[common], help="fit the nonstationary model")
    p.add_argument("--data", required=True, help="training data CSV")
    p.add_argument("--config", required=True, help="fit config JSON")
    p.add_argument("--output", required=True, help="model artifact path")
    p.add_argument(
        "--preflight", action="store_true",
        help="print neighborhood counts per component and exit",
    )
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("fit-aniso", parents=[common],
                       help="fit the stationary anisotropic model")
    p.add_argument("--data", required=True, help="training data CSV")
    p.add_argument("--config", required=True, help="fit config JSON")
    p.add_argument("--output", required=True, help="model artifact path")
    p.set_defaults(func=cmd_fit_aniso)

    p = sub.add_parser("predict", parents=[common],
                       help="kriging prediction at new locations")
    p.add_argument("--model", required=True, help="model artifact path")
    p.add_argument("--locations", required=True, help="prediction locations CSV")
    p.add_argument("--output", required=True, help="output CSV path")
    p.add_argument("--batch-size", type=int, default=1024)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common],
                       help="score predictions against held-out data")
    p.add_argument("--holdout", required=True, help="held-out data CSV")
    p.add_argument("--predictions", required=True, help="prediction CSV")
    p.add_argument("--data-column", default=None,
                   help="holdout value column (default: first non-coordinate)")
    p.add_argument("--output", default=None, help="optional metrics JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plot-data", parents=[common],
                       help="emit plot-ready CSV artifacts")
    p.add_argument("mode", choices=("ellipses", "correlation", "surfaces"))
    p.add_argument("--model", required=True, help="model artifact path")
    p.add_argument("--output", required=True, help="output CSV path")
    p.add_argument("--stationary-model", default=None,
                   help="overlay the ellipse of a stationary model artifact")
    p.add_argument("--ref", default=None, help="reference location 'x,y'")
    p.add_argument("--grid", default=None, help="grid resolution 'nx,ny'")
    p.add_argument("--bounds", default=None, help="grid bounds 'x0,x1,y0,y1'")
    p.add_argument("--locations", default=None, help="query locations CSV")
    p.set_defaults(func=cmd_plot_data)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, InvalidParameterError, UnfittableConfigurationError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NsgpError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
