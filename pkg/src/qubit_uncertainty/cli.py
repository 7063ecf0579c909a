"""Command-line front end: bounds, regions, density tables, self-verification, witnesses.

Exit codes: 0 ok, 1 verification failure, 2 usage or parse error,
3 degenerate observable or rank error, 4 state-file error.
"""
import argparse
import io
import json
import math
import sys

import numpy as np
from scipy import stats

from . import __version__, bounds, densities, regions, states, witness
from .errors import (AngleConstraintViolated, DegenerateObservable, DimensionMismatch,
                     LinearlyDependentFamily)
from .observables import PAULI, QubitObservable

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_RANK, EXIT_STATE = 0, 1, 2, 3, 4
LOW_SAMPLE_WARNING = 10_000


class UsageError(Exception):
    pass


class StateFileError(Exception):
    pass


# ------------------------------------------------------------------ parsing

def parse_observable(text):
    """``"a0,a1,a2,a3"`` -> QubitObservable."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise UsageError(f"observable {text!r} needs 4 comma-separated numbers a0,a1,a2,a3")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"observable {text!r} contains a non-numeric entry") from None
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"observable {text!r} has non-finite entries")
    return QubitObservable.from_flat(vals)


def parse_site(text):
    """``"obs;obs[;obs]"`` -> list of observables for one site."""
    return [parse_observable(t) for t in text.split(";") if t.strip()]


def load_state_file(path):
    """Dense state from a JSON array of ``[re, im]`` pairs in row-major order."""
    try:
        with open(path) as fh:
            data = json.load(fh)
        arr = np.asarray(data, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("expected a flat list of [re, im] pairs")
        vals = arr[:, 0] + 1j * arr[:, 1]
        dim = int(round(math.sqrt(vals.size)))
        if dim * dim != vals.size:
            raise ValueError(f"{vals.size} entries do not form a square matrix")
        return witness.DenseState(vals.reshape(dim, dim))
    except (OSError, ValueError, TypeError) as exc:
        raise StateFileError(f"cannot use state file {path}: {exc}") from None


# ------------------------------------------------------------------ output

def _fmt_csv(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def render(table, fmt, meta):
    """Serialize ``table = (columns, rows, footer)``; footer rows are ``[label, value...]``."""
    columns, rows, footer = table
    if fmt == "json":
        data = {"columns": list(columns),
                "rows": [[_json_value(v) for v in r] for r in rows]}
        if footer:
            data["footer"] = [[_json_value(v) for v in r] for r in footer]
        return json.dumps({"meta": meta, "data": data}, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for r in list(rows) + list(footer):
        buf.write(",".join(_fmt_csv(v) for v in r) + "\n")
    return buf.getvalue()


def _point_text(p):
    return ";".join(format(float(v), ".17g") for v in p)


# ------------------------------------------------------------------ commands

def _need_obs(args, lo, hi=None):
    obs = [parse_observable(t) for t in (args.obs or [])]
    if len(obs) < lo or (hi is not None and len(obs) > hi):
        want = f"{lo}" if hi == lo else f"{lo}..{hi if hi else 'n'}"
        raise UsageError(f"this command needs {want} --obs flags, got {len(obs)}")
    return obs


def cmd_bounds(args):
    obs = _need_obs(args, 2)
    res = args.resolution
    rows = []
    if len(obs) == 2:
        var = bounds.variance_sum_bound_pair(*obs)
        dev = bounds.deviation_sum_bound_pair(*obs)
        checks = [(var, "sum_of_squares"), (dev, "sum")]
    else:
        var = bounds.variance_sum_bound_n(obs)
        checks = [(var, "sum_of_squares")]
    for rep, objective in checks:
        bf = bounds.brute_force_min(obs, objective, resolution=res)
        rows.append([rep.kind, rep.value, _point_text(rep.argmin_point), rep.method,
                     bf.value, bf.value - rep.value, rep.note])
    cols = ["quantity", "value", "witness", "method", "brute_force", "delta", "note"]
    return (cols, rows, []), EXIT_OK


def cmd_region(args):
    obs = _need_obs(args, 2, 3)
    spec = regions.region_spec(obs)
    if spec.rank < len(obs):
        raise LinearlyDependentFamily(f"region needs rank {len(obs)}, family has rank {spec.rank}")
    footer = []
    if args.grid:
        axes, inside = regions.membership_grid(spec, args.grid)
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(obs))
        flags = np.asarray(inside).reshape(-1)
        cols = ["x", "y", "z"][:len(obs)] + ["inside"]
        rows = [list(p) + [bool(f)] for p, f in zip(mesh, flags)]
        box = float(np.prod(spec.norms))
        footer.append(["grid_volume", float(flags.mean()) * box])
    else:
        if len(obs) != 2:
            raise UsageError("--boundary is available for two observables")
        pts = regions.boundary_pair(spec, args.boundary)
        resid = regions.pair_residual(spec, pts)
        cols = ["x", "y", "residual"]
        rows = [[p[0], p[1], r] for p, r in zip(pts, resid)]
    if len(obs) == 2:
        theta = regions.pair_angle(spec)
        th = min(theta, math.pi - theta)
        scale = float(np.prod(spec.norms))
        footer.append(["area_formula", scale * regions.area_pair(th)])
        rng = np.random.default_rng(args.seed)
        est, err = regions.volume_mc(spec, args.samples or 100_000, rng)
        footer.append(["mc_area", est])
        footer.append(["mc_stderr", err])
    return (cols, rows, footer), EXIT_OK


PDF_KINDS = {
    "mean": (1, lambda o: densities.pdf_mean(*o)),
    "unc": (1, lambda o: densities.pdf_uncertainty(*o)),
    "mean2": (2, lambda o: densities.pdf_mean_pair(*o)),
    "unc2": (2, lambda o: densities.pdf_uncertainty_pair(*o)),
    "mean3": (3, lambda o: densities.pdf_mean_triple(*o)),
    "unc3": (3, lambda o: densities.pdf_uncertainty_triple(*o)),
}


def cmd_pdf(args):
    k, build = PDF_KINDS[args.which]
    obs = _need_obs(args, k, k)
    desc = build(obs)
    if desc.kind != "continuous":
        raise LinearlyDependentFamily(f"{args.which} needs a rank-{k} family")
    axes = [np.linspace(lo, hi, args.points) for lo, hi in desc.box]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    vals = desc.eval(mesh)
    cols = ["x", "y", "z"][:k] + ["density"]
    rows = [list(p) + [float(v)] for p, v in zip(mesh, np.atleast_1d(vals))]
    footer = [["normalization", densities.normalization(desc)]]
    return (cols, rows, footer), EXIT_OK


def _verify_rows(seed, n):
    """Deterministic self-check suite; rows are (check, statistic, threshold, passed)."""
    rows = []

    def add(name, stat, thr, ok=None):
        rows.append([name, float(stat), float(thr), bool(stat < thr if ok is None else ok)])

    rng = np.random.default_rng(seed)
    pur = states.purified_bloch_vectors(rng, n)
    spec_r = states.spectral_bloch_vectors(rng, n)
    rad_p = np.linalg.norm(pur, axis=1)
    rad_s = np.linalg.norm(spec_r, axis=1)
    ks_u = stats.kstest(rad_p ** 3, "uniform").statistic
    add("ks_radius_cubed_uniform", ks_u, 1.63 / math.sqrt(n))
    ks2 = stats.ks_2samp(rad_p, rad_s)
    add("ks_two_sample_pvalue", ks2.pvalue, 1e-3, ks2.pvalue > 1e-3)
    lam1 = 0.5 * (1.0 - rad_p)
    ks_l = stats.kstest(lam1, states.small_eigenvalue_cdf).statistic
    add("ks_small_eigenvalue_cdf", ks_l, 1.63 / math.sqrt(n))

    fam = [QubitObservable(0.3, (1.0, 0.2, 0.0)), QubitObservable(-1.0, (0.4, 1.3, 0.2)),
           QubitObservable(0.5, (0.1, -0.3, 0.9))]
    for i, o in enumerate(fam):
        mc = complex(np.mean(np.exp(-1j * states.mean(o, pur))))
        add(f"char_fn_{i}", abs(mc - states.char_fn(o)), 4.0 / math.sqrt(n))

    means = np.stack([states.mean(o, pur) for o in fam], axis=-1)
    uncs = np.stack([states.uncertainty(o, pur) for o in fam], axis=-1)
    cases = [
        ("mean", densities.pdf_mean(fam[0]), means[:, :1], 40, 1e-10, 0.01),
        ("uncertainty", densities.pdf_uncertainty(fam[0]), uncs[:, :1], 40, 1e-8, 0.01),
        ("mean_pair", densities.pdf_mean_pair(*fam[:2]), means[:, :2], 15, 1e-6, 0.02),
        ("uncertainty_pair", densities.pdf_uncertainty_pair(*fam[:2]), uncs[:, :2], 20, 1e-6,
         0.02),
        ("mean_triple", densities.pdf_mean_triple(*fam), means, 10, 1e-4, 0.05),
        ("uncertainty_triple", densities.pdf_uncertainty_triple(*fam), uncs, 20, 1e-4, 0.05),
    ]
    for name, desc, sample, bins, ntol, ltol in cases:
        add(f"normalization_{name}", abs(densities.normalization(desc) - 1.0), ntol)
        edges = [np.linspace(lo, hi, bins + 1) for lo, hi in desc.box]
        l1, _, _ = densities.histogram_l1(desc, sample, edges)
        add(f"histogram_l1_{name}", l1, ltol)

    for lam in (0.0, 0.3, 0.6, 0.9, 1.5):
        target = math.sqrt(1.0 - lam * lam) if lam < 1 else 0.0
        add(f"bessel_{lam:g}", abs(densities.bessel_identity_check(lam) - target), 1e-3)

    brng = np.random.default_rng(seed + 1)
    worst_v = worst_d = 0.0
    for _ in range(10):
        a = QubitObservable(brng.normal(), brng.normal(size=3))
        b = QubitObservable(brng.normal(), brng.normal(size=3))
        worst_v = max(worst_v, abs(bounds.variance_sum_bound_pair(a, b).value
                                   - bounds.brute_force_min([a, b], "sum_of_squares", 100).value))
        worst_d = max(worst_d, abs(bounds.deviation_sum_bound_pair(a, b).value
                                   - bounds.brute_force_min([a, b], "sum", 100).value))
    add("bound_pair_variance_vs_grid", worst_v, 1e-3)
    add("bound_pair_deviation_vs_grid", worst_d, 1e-3)
    add("bound_pauli_triple", abs(bounds.variance_sum_bound_triple(*PAULI).value - 2.0), 1e-12)

    theta, area = regions.max_area()
    add("max_area_theta", abs(theta - 0.741758), 1e-4)
    add("max_area_value", abs(area - 0.572244), 1e-4)
    return rows


def cmd_verify(args):
    n = args.samples or 1_000_000
    if n < LOW_SAMPLE_WARNING:
        print(f"warning: {n} samples give KS and histogram checks too little power; "
              f"use at least {LOW_SAMPLE_WARNING}", file=sys.stderr)
    rows = _verify_rows(args.seed, n)
    passed = sum(r[3] for r in rows)
    ok = passed == len(rows)
    footer = [["summary", passed, len(rows), ok]]
    return (["check", "statistic", "threshold", "passed"], rows, footer), \
        EXIT_OK if ok else EXIT_VERIFY


def cmd_witness(args):
    if not args.site:
        raise UsageError("witness needs --site flags, one per party")
    fams = [parse_site(s) for s in args.site]
    if not 2 <= len(fams) <= 3:
        raise UsageError("witness supports 2 or 3 sites")
    counts = {len(f) for f in fams}
    if len(counts) != 1 or not counts <= {2, 3}:
        raise UsageError("every --site needs the same number (2 or 3) of observables")
    ms = [witness.CompositeObservable([f[i] for f in fams]) for i in range(counts.pop())]
    rng = np.random.default_rng(args.seed)
    if args.state == "singlet":
        state = witness.singlet()
    elif args.state == "ghz":
        state = witness.ghz()
    elif args.state == "product":
        state = witness.random_separable(len(fams), 1, rng)
    else:
        if not args.state_file:
            raise UsageError("--state file needs --state-file PATH")
        state = load_state_file(args.state_file)
    verdict = witness.evaluate_witness(ms, state)
    cols = ["lhs", "rhs", "violated", "margin"]
    row = [verdict.lhs, verdict.rhs, verdict.violated, verdict.margin]
    footer = []
    if args.composite_min:
        value, _, conv = witness.composite_minimum(ms, rng)
        footer = [["composite_minimum", value, conv]]
    return (cols, [row], footer), EXIT_OK


COMMANDS = {"bounds": cmd_bounds, "region": cmd_region, "pdf": cmd_pdf,
            "verify": cmd_verify, "witness": cmd_witness}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo sample count")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output path (default stdout)")

    parser = argparse.ArgumentParser(prog="qubit-uncertainty", parents=[common],
                                     description="Uncertainty regions, bounds and densities "
                                                 "for qubit observables.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def obs_arg(p):
        p.add_argument("--obs", action="append", metavar="a0,a1,a2,a3",
                       help="observable a0*I + a.sigma (repeatable)")

    p = sub.add_parser("bounds", parents=[common], help="variance and deviation bounds")
    obs_arg(p)
    p.add_argument("--resolution", type=int, default=200, help="brute-force grid resolution")

    p = sub.add_parser("region", parents=[common], help="boundary samples or membership grid")
    obs_arg(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid", type=int, help="N x N (x N) membership grid")
    g.add_argument("--boundary", type=int, default=256, help="boundary sample count")

    p = sub.add_parser("pdf", parents=[common], help="tabulate a density")
    obs_arg(p)
    p.add_argument("--which", choices=sorted(PDF_KINDS), required=True)
    p.add_argument("--points", type=int, default=21, help="grid points per axis")

    sub.add_parser("verify", parents=[common], help="run the Monte Carlo self-check suite")

    p = sub.add_parser("witness", parents=[common], help="entanglement witness verdict")
    p.add_argument("--site", action="append", metavar="OBS;OBS[;OBS]",
                   help="observables of one party (repeat per party)")
    p.add_argument("--state", choices=("singlet", "ghz", "product", "file"), default="singlet")
    p.add_argument("--state-file", help="JSON list of [re, im] pairs, row-major")
    p.add_argument("--composite-min", action="store_true",
                   help="also search the minimum of the composite variance sum")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.samples is not None and args.samples < 1:
        parser.error("--samples must be at least 1")
    for name in ("grid", "boundary", "points", "resolution"):
        val = getattr(args, name, None)
        if val is not None and val < 2:
            parser.error(f"--{name} must be at least 2")
    try:
        table, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DimensionMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateObservable, LinearlyDependentFamily, AngleConstraintViolated) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except StateFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATE
    meta = {"seed": args.seed, "version": __version__, "command": args.command}
    text = render(table, args.format, meta)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
