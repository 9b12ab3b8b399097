"""
Convergence studies and verification suites, with their command-line entry point.

    reggecurv converge --metric-degree 2 --lift-offset 0 --levels 1:5 --out k2.csv
    reggecurv verify --level 2 --metric-degree 1
    reggecurv dofs --metric-degree 3 --levels 0:5
"""

import argparse
import dataclasses
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional

import jinja2
import numpy as np
import pandas as pds

from .benchmark import PolynomialMetric, flat_metric, get_metric
from .curvature import (
    assemble_gauss_functional,
    assemble_neumann_functional,
    distributional_inc,
    distributional_rotrot,
    error_representation_check,
    gauss_bonnet_total,
    lift_curvature,
)
from .errors import ConfigurationError, ReggeCurvError
from .fields import LagrangeFunction, ReggeFunction, moment_residual
from .mesh import unit_square
from .norms import ErrorRecord, eoc, fit_order, hminus1_error, l2_error
from .quadrature import triangle_rule
from .spaces import LagrangeSpace, ReggeSpace


LIFT_OFFSETS = (-1, 0, 1, 2)
CSV_COLUMNS = ["level", "h", "ndof_metric", "ndof_lift"] + list(ErrorRecord.ERROR_COLUMNS)

# Quadrature used where an identity must hold to round-off
IDENTITY_ORDER = 40

# Random metrics for the identity checks stay this far from degenerate
MIN_RANDOM_DET = 0.5

env = jinja2.Environment()

_EOC_TEMPLATE = env.from_string(
    """{% for name, rates in columns %}# eoc_{{ name }}:{% for rate in rates %} {{ rate }}{% endfor %}
{% endfor %}"""
)


# Configuration
########################################


@dataclass
class StudyConfig:
    """Parameters of one convergence study.

    The lifting degree is ``metric_degree + lift_offset``; levels run from
    ``level_min`` to ``level_max`` inclusive.
    """

    metric_degree: int = 1
    lift_offset: int = 0
    level_min: int = 1
    level_max: int = 4
    seed: int = 0
    perturb: bool = True
    quad_order: Optional[int] = None
    error_quad_order: int = 20
    metric: str = "benchmark"
    out: Optional[str] = None
    verbosity: int = 3

    @property
    def lifting_degree(self):
        return self.metric_degree + self.lift_offset

    @property
    def levels(self):
        return range(self.level_min, self.level_max + 1)

    def validate(self):
        """Raise ConfigurationError for inconsistent parameters; return self otherwise."""
        k, d = self.metric_degree, self.lift_offset
        if k < 0:
            raise ConfigurationError("Metric degree must be nonnegative, got {}".format(k))
        if d not in LIFT_OFFSETS:
            raise ConfigurationError("Lift offset must be one of {}, got {}".format(LIFT_OFFSETS, d))
        if k + d < 1:
            raise ConfigurationError(
                "Lifting degree k + d = {} + {} = {} is invalid: the curvature is lifted into continuous "
                "Lagrange elements, which need degree >= 1".format(k, d, k + d)
            )
        if d == -1 and k < 2:
            raise ConfigurationError("Lift offset -1 requires metric degree >= 2, got {}".format(k))
        if self.level_min < 0 or self.level_max < self.level_min:
            raise ConfigurationError("Invalid level range {}:{}".format(self.level_min, self.level_max))
        if self.quad_order is not None and self.quad_order < 0:
            raise ConfigurationError("Quadrature order must be nonnegative, got {}".format(self.quad_order))
        try:
            get_metric(self.metric)
        except ValueError as error:
            raise ConfigurationError(str(error)) from error
        return self

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def save(self, path):
        """Append this configuration as a row of the CSV file at ``path``."""
        current = dataclasses.asdict(self)
        current["time"] = time.ctime()
        current_DF = pds.DataFrame(data=current, index=[1])
        if os.path.isfile(path):
            previous = pds.read_csv(path, index_col=0)
            current_DF = pds.concat([previous, current_DF], ignore_index=True)
        current_DF.to_csv(path)

    @classmethod
    def load(cls, path):
        """Configuration from the last row of a CSV file written by :meth:`save`."""
        try:
            saved = pds.read_csv(path, index_col=0)
        except (OSError, pds.errors.ParserError) as error:
            raise ConfigurationError("Cannot read configuration '{}': {}".format(path, error)) from error
        if len(saved) == 0:
            raise ConfigurationError("Configuration file '{}' is empty".format(path))

        row = saved.iloc[-1]
        kwargs = {}
        for field in dataclasses.fields(cls):
            if field.name not in row or pds.isna(row[field.name]):
                continue
            value = row[field.name]
            if field.name in ("metric", "out"):
                kwargs[field.name] = str(value)
            elif field.name == "perturb":
                kwargs[field.name] = str(value).strip().lower() in ("true", "1")
            else:
                kwargs[field.name] = int(value)
        return cls(**kwargs)


# Convergence study
########################################


def study_level(config, level):
    """Interpolate, lift and measure the errors on one refinement level.

    Returns
    -------
    record : ErrorRecord
    lifted : LiftedCurvature
    """
    exact = get_metric(config.metric)
    mesh = unit_square(level, perturb=config.perturb, seed=config.seed + level)

    regge = ReggeSpace(mesh, config.metric_degree)
    metric_h = ReggeFunction(regge, regge.interpolate(exact))
    lifted = lift_curvature(
        metric_h, exact, config.lifting_degree, order=config.quad_order, verbosity=config.verbosity
    )

    q = config.error_quad_order
    record = ErrorRecord(
        level=level,
        h=mesh.h,
        ndof_metric=regge.ndofs,
        ndof_lift=lifted.space.ndofs,
        err_L2_K=l2_error(lifted, densitized=False, order=q),
        err_L2_Kw=l2_error(lifted, densitized=True, order=q),
        err_Hm1_K=hminus1_error(lifted, densitized=False, order=q),
        err_Hm1_Kw=hminus1_error(lifted, densitized=True, order=q),
    )
    return record, lifted


def run_convergence(config):
    """Run all levels of a study.

    Returns
    -------
    records : list of ErrorRecord
    rates : pandas.DataFrame
        Pairwise orders of convergence, one row per refinement interval.
    """
    config.validate()
    records = []
    for level in config.levels:
        if config.verbosity >= 3:
            print(
                "[converge] level {} (k = {}, lifting degree {})".format(
                    level, config.metric_degree, config.lifting_degree
                )
            )
        try:
            record, _ = study_level(config, level)
        except ReggeCurvError as error:
            raise ReggeCurvError("Level {} failed: {}".format(level, error)) from error
        records.append(record)
        if config.verbosity >= 4:
            print("[converge]    {}".format(record))

    return records, eoc_table(records)


def averaged_rates(config, seeds):
    """Orders of convergence averaged over several perturbation seeds.

    Each seed runs the whole study of ``config``; the pairwise rates of the
    runs are averaged interval by interval.

    Returns
    -------
    records : dict
        Seed -> list of ErrorRecord.
    rates : pandas.DataFrame
        Mean pairwise orders, one row per refinement interval.
    """
    seeds = [int(s) for s in seeds]
    if len(seeds) == 0:
        raise ConfigurationError("At least one seed is needed to average convergence rates")

    records, tables = {}, []
    for seed in seeds:
        if config.verbosity >= 3:
            print("[converge] seed {}".format(seed))
        records[seed], rates = run_convergence(config.replace(seed=seed))
        tables.append(rates)
    combined = pds.concat(tables)
    return records, combined.groupby(level=0, sort=False).mean()


def _rates(errors, hs):
    try:
        return eoc(errors, hs)
    except ValueError:
        return np.full(max(len(errors) - 1, 0), np.nan)


def eoc_table(records):
    """Pairwise orders of convergence of every error column."""
    hs = [r.h for r in records]
    data = {name: _rates([getattr(r, name) for r in records], hs) for name in ErrorRecord.ERROR_COLUMNS}
    index = ["{}-{}".format(a.level, b.level) for a, b in zip(records[:-1], records[1:])]
    return pds.DataFrame(data, index=index)


def fitted_orders(records):
    """Least-squares orders over all levels, one per error column."""
    hs = [r.h for r in records]
    orders = {}
    for name in ErrorRecord.ERROR_COLUMNS:
        errors = np.array([getattr(r, name) for r in records])
        orders[name] = fit_order(errors, hs)[0] if len(records) > 1 and np.all(errors > 0) else np.nan
    return orders


def emit_csv(records, path=None):
    """Render the records as CSV followed by ``# eoc_<column>:`` comment lines.

    Writes to ``path`` when given and returns the text.
    """
    if len(records) == 0:
        raise ValueError("Cannot write an empty convergence table")

    table = pds.DataFrame([r.as_dict() for r in records], columns=CSV_COLUMNS)
    text = table.to_csv(index=False, float_format="%.17g", lineterminator="\n")

    rates = eoc_table(records)
    columns = [(name, ["{:.6f}".format(r) for r in rates[name].values]) for name in ErrorRecord.ERROR_COLUMNS]
    text += _EOC_TEMPLATE.render(columns=columns)

    if path is not None:
        with open(path, "w", newline="") as fout:
            fout.write(text)
    return text


def dof_table(metric_degree, lift_offset, levels):
    """Space dimensions per level (no assembly)."""
    rows = []
    for level in levels:
        mesh = unit_square(level)
        r = metric_degree + lift_offset
        rows.append(
            {
                "level": level,
                "h": mesh.h,
                "vertices": mesh.num_vertices,
                "edges": mesh.num_edges,
                "triangles": mesh.num_triangles,
                "ndof_metric": ReggeSpace(mesh, metric_degree).ndofs,
                "ndof_lift": LagrangeSpace(mesh, r).ndofs,
                "ndof_aux": LagrangeSpace(mesh, r + 2).ndofs,
            }
        )
    return pds.DataFrame(rows)


# Verification suites
########################################


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def __str__(self):
        return "{:<28s} {:>12.3e}  (tol {:.0e})  {}".format(
            self.name, self.residual, self.tolerance, "PASS" if self.passed else "FAIL"
        )


def relative_gap(a, b):
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0 else 0.0


def random_regge_metric(space, rng, amplitude=0.002, min_det=MIN_RANDOM_DET, attempts=20):
    """Perturbation of the identity: a smooth random polynomial metric plus discontinuous edge noise.

    Draws whose determinant falls below ``min_det`` at a quadrature point of
    some element are rejected and redrawn from the same generator.
    """
    k = space.degree
    edge_dofs = space.mesh.num_edges * space.per_edge
    points = triangle_rule(space.default_order()).points
    smallest = np.nan

    for _ in range(attempts):
        coeffs = [amplitude * rng.uniform(-1.0, 1.0, size=(k + 1, k + 1)) for _ in range(3)]
        for c in coeffs:
            c[np.add.outer(np.arange(k + 1), np.arange(k + 1)) > k] = 0.0
        coeffs[0][0, 0] += 1.0
        coeffs[2][0, 0] += 1.0

        values = space.interpolate(PolynomialMetric(*coeffs))
        values[:edge_dofs] += amplitude * space.mesh.h**2 * rng.uniform(-1.0, 1.0, size=edge_dofs)
        metric = ReggeFunction(space, values)
        smallest = float(np.linalg.det(metric.jet(points).value).min())
        if smallest >= min_det:
            return metric

    raise ReggeCurvError(
        "No random metric with det >= {} in {} attempts (last minimum {:.3e})".format(min_det, attempts, smallest)
    )


def random_lagrange(space, rng, vanish_on_boundary=True):
    values = rng.standard_normal(space.ndofs)
    if vanish_on_boundary:
        values[space.boundary_mask()] = 0.0
    return LagrangeFunction(space, values)


def check_adjointness(mesh, k, rng, order=IDENTITY_ORDER):
    """Relative gap between the distributional inc of sigma tested with u and rot rot of u tested with sigma."""
    regge = ReggeSpace(mesh, k)
    metric_h = random_regge_metric(regge, rng)
    sigma = ReggeFunction(regge, mesh.h**2 * rng.standard_normal(regge.ndofs))
    u = random_lagrange(LagrangeSpace(mesh, k + 1), rng)
    return relative_gap(
        distributional_inc(metric_h, sigma, u, order), distributional_rotrot(metric_h, u, sigma, order)
    )


def run_verify(level=2, metric_degree=1, seed=0, instances=10, verbosity=3):
    """Run the identity checks on one mesh level.

    Returns
    -------
    list of CheckResult
    """
    k = metric_degree
    rng = np.random.default_rng(seed)
    mesh = unit_square(level, perturb=True, seed=seed)
    exact = get_metric("benchmark")
    regge = ReggeSpace(mesh, k)
    results = []

    # flat metric: no curvature anywhere
    flat = flat_metric()
    flat_h = ReggeFunction(regge, regge.interpolate(flat))
    lift_space = LagrangeSpace(mesh, max(k, 1))
    functional = assemble_gauss_functional(flat_h, lift_space) - assemble_neumann_functional(flat, lift_space)
    free = ~lift_space.dirichlet_mask()
    results.append(CheckResult("flat functional", float(np.max(np.abs(functional.values[free]))), 1e-10))
    lifted = lift_curvature(flat_h, flat, max(k, 1), verbosity=0)
    results.append(CheckResult("flat lifted curvature", float(np.max(np.abs(lifted.coefficients))), 1e-10))

    # interpolant reproduces its own moments
    metric_h = ReggeFunction(regge, regge.interpolate(exact))
    results.append(CheckResult("interpolant moments", moment_residual(regge, metric_h.coefficients, exact), 1e-11))

    # total curvature of a disc
    results.append(
        CheckResult("Gauss-Bonnet", abs(gauss_bonnet_total(metric_h, order=IDENTITY_ORDER) - 2.0 * np.pi), 1e-9)
    )

    # inc and rot rot are adjoint
    gaps = [check_adjointness(mesh, max(k, 1), rng) for _ in range(instances)]
    results.append(CheckResult("adjointness", float(max(gaps)), 1e-10))

    # curvature error equals the integrated incompatibility along the metric path
    u_space = LagrangeSpace(mesh, max(k, 1))
    mismatch = []
    for _ in range(instances):
        lhs, rhs = error_representation_check(exact, metric_h, random_lagrange(u_space, rng), order=IDENTITY_ORDER)
        mismatch.append(relative_gap(lhs, rhs))
    results.append(CheckResult("integral representation", float(max(mismatch)), 1e-8))

    if verbosity >= 3:
        print("[verify] level {}, k = {}, seed {}".format(level, k, seed))
        for result in results:
            print("[verify]    {}".format(result))
    return results


# Command line
########################################


def _parse_levels(text):
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError as error:
        raise ConfigurationError("Levels must be given as A:B, got '{}'".format(text)) from error
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2:
        raise ConfigurationError("Levels must be given as A:B, got '{}'".format(text))
    return parts


def _parse_offsets(text):
    try:
        return [int(p) for p in str(text).split(",")]
    except ValueError as error:
        raise ConfigurationError("Lift offsets must be integers, got '{}'".format(text)) from error


def build_parser():
    parser = argparse.ArgumentParser(
        prog="reggecurv", description="Gauss curvature of Regge metrics: convergence studies and checks."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--metric-degree", type=int, default=None, help="Regge degree k of the metric")
        p.add_argument("--levels", default=None, help="refinement levels A:B (inclusive)")
        p.add_argument("--seed", type=int, default=None, help="seed of the vertex perturbation")
        p.add_argument("-v", "--verbosity", type=int, default=None)

    p = sub.add_parser("converge", help="run a convergence study and write the error table")
    common(p)
    p.add_argument(
        "--lift-offset",
        default=None,
        help="lifting degree minus k; a comma list (e.g. --lift-offset=-1,0,1,2) runs several studies",
    )
    p.add_argument("--no-perturb", action="store_true", help="use the structured mesh as is")
    p.add_argument(
        "--average-seeds",
        type=int,
        default=1,
        help="also report orders averaged over this many consecutive perturbation seeds",
    )
    p.add_argument("--quad-order", type=int, default=None, help="assembly quadrature exactness")
    p.add_argument("--metric", default=None, help="exact metric (benchmark, flat, sphere)")
    p.add_argument("--out", default=None, help="CSV output path (stdout if omitted)")
    p.add_argument("--config", default=None, help="load a configuration saved with --save-config")
    p.add_argument("--save-config", default=None, help="append the effective configuration to this CSV file")

    p = sub.add_parser("verify", help="run identity checks on one level")
    common(p)
    p.add_argument("--level", type=int, default=2)
    p.add_argument("--instances", type=int, default=10, help="random instances per randomized check")

    p = sub.add_parser("dofs", help="print space dimensions per level")
    common(p)
    p.add_argument("--lift-offset", default="0")

    return parser


def _config_from_args(args):
    config = StudyConfig.load(args.config) if getattr(args, "config", None) else StudyConfig()
    changes = {}
    if args.metric_degree is not None:
        changes["metric_degree"] = args.metric_degree
    if args.levels is not None:
        changes["level_min"], changes["level_max"] = _parse_levels(args.levels)
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.verbosity is not None:
        changes["verbosity"] = args.verbosity
    if getattr(args, "no_perturb", False):
        changes["perturb"] = False
    if getattr(args, "quad_order", None) is not None:
        changes["quad_order"] = args.quad_order
    if getattr(args, "metric", None) is not None:
        changes["metric"] = args.metric
    if getattr(args, "out", None) is not None:
        changes["out"] = args.out
    return config.replace(**changes)


def _offset_path(out, offset, several):
    if out is None or not several:
        return out
    stem, ext = os.path.splitext(out)
    return "{}_d{}{}".format(stem, offset, ext or ".csv")


def converge(args):
    config = _config_from_args(args)
    offsets = _parse_offsets(args.lift_offset) if args.lift_offset is not None else [config.lift_offset]
    configs = [config.replace(lift_offset=d).validate() for d in offsets]
    if args.save_config:
        config.replace(lift_offset=offsets[0]).save(args.save_config)

    if args.average_seeds < 1:
        raise ConfigurationError("--average-seeds must be positive, got {}".format(args.average_seeds))

    for cfg in configs:
        mean_rates = None
        if args.average_seeds > 1:
            runs, mean_rates = averaged_rates(cfg, range(cfg.seed, cfg.seed + args.average_seeds))
            records = runs[cfg.seed]
            rates = eoc_table(records)
        else:
            records, rates = run_convergence(cfg)
        path = _offset_path(cfg.out, cfg.lift_offset, len(configs) > 1)
        text = emit_csv(records, path)
        if path is None:
            sys.stdout.write(text)
        if cfg.verbosity >= 3:
            print("[converge] k = {}, lift offset {}: orders of convergence".format(cfg.metric_degree, cfg.lift_offset))
            print(rates.to_string(float_format="{:.3f}".format))
            if len(records) > 1:
                fitted = fitted_orders(records)
                print("[converge] fitted: " + ", ".join("{} {:.3f}".format(n, p) for n, p in fitted.items()))
            if mean_rates is not None:
                print("[converge] orders averaged over {} seeds from {}".format(args.average_seeds, cfg.seed))
                print(mean_rates.to_string(float_format="{:.3f}".format))
            if path is not None:
                print("[converge] wrote {}".format(path))
    return 0


def verify(args):
    config = _config_from_args(args)
    results = run_verify(
        level=args.level,
        metric_degree=config.metric_degree,
        seed=config.seed,
        instances=args.instances,
        verbosity=config.verbosity,
    )
    failed = [r for r in results if not r.passed]
    if failed:
        for result in failed:
            print("[verify] FAILED {}: residual {:.3e} exceeds {:.0e}".format(result.name, result.residual, result.tolerance))
        return 1
    return 0


def dofs(args):
    config = _config_from_args(args)
    offsets = _parse_offsets(args.lift_offset)
    for d in offsets:
        config.replace(lift_offset=d).validate()
        table = dof_table(config.metric_degree, d, config.levels)
        print("[dofs] k = {}, lift offset {}".format(config.metric_degree, d))
        print(table.to_string(index=False))
    return 0


COMMANDS = {"converge": converge, "verify": verify, "dofs": dofs}


def main(argv=None):
    """Command-line entry point; returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as error:
        print("[reggecurv] Configuration error: {}".format(error), file=sys.stderr)
        return 2
    except ReggeCurvError as error:
        print("[reggecurv] {}".format(error), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
