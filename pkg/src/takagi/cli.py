"""Command-line front end.

Exit codes: 0 success, 1 zero outside the inclusion region (or a failing
verification report), 2 numerical failure, 64 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import plotting
from .poly import Polynomial, complex_to_json, differential_compose, linear_factor_apply
from .region import convex_hull
from .roots import RootFindingError, cluster_multiplicities, find_roots
from .theorem import analyze, build_region, certificate, factor_operator, log_derivative_residual
from .verify import (
    SWEEP_CSV_COLUMNS,
    EnsembleConfig,
    TolerancePolicy,
    alpha_sweep,
    env_seed,
    parse_alpha_grid,
    run_verification,
    sweep_rows,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_NUMERICAL = 2
EXIT_USAGE = 64

EPILOG = """exit status:
  0   success / every zero inside the region / report passed
  1   a zero lies outside the region, or the verification report failed
  2   numerical failure (root finder could not meet its residual bound)
  64  usage error or malformed input file
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})")


def _load_poly(path: str) -> Polynomial:
    try:
        return Polynomial.from_json(_load_json(path))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}")


def _emit(obj, out: str | None = None):
    text = json.dumps(obj, indent=2, allow_nan=False)
    if out is None or out == "-":
        print(text)
    else:
        Path(out).write_text(text + "\n")


def _nonzero(p: Polynomial, path: str) -> Polynomial:
    if p.is_zero():
        raise UsageError(f"{path}: field 'coeffs' describes the zero polynomial")
    return p


def cmd_compose(args) -> int:
    f, g = _load_poly(args.f), _load_poly(args.g)
    h = differential_compose(f, g)
    _emit({"identically_zero": True} if h.is_zero() else h.to_json())
    return EXIT_OK


def cmd_roots(args) -> int:
    p = _nonzero(_load_poly(args.p), args.p)
    rs = find_roots(p)
    out = rs.to_json()
    out["clusters"] = [
        {"center": complex_to_json(c), "multiplicity": m}
        for c, m in cluster_multiplicities(rs, args.cluster_tol)
    ] if rs.roots else []
    _emit(out)
    return EXIT_OK


def cmd_region(args) -> int:
    g = _nonzero(_load_poly(args.g), args.g)
    if args.f is None:
        region = convex_hull(find_roots(g).roots)
    else:
        f = _nonzero(_load_poly(args.f), args.f)
        _, r, alphas = factor_operator(f)
        if r > g.degree():
            _emit({"identically_zero": True})
            return EXIT_OK
        region = build_region(g, r, alphas)
    _emit(region.to_json())
    return EXIT_OK


def _write_plot(ti, path: str):
    if path.lower().endswith(".svg"):
        plotting.write_svg(plotting.instance_plot_spec(ti), path)
    else:
        plotting.instance_figure(ti, path)


def cmd_analyze(args) -> int:
    f = _nonzero(_load_poly(args.f), args.f)
    g = _nonzero(_load_poly(args.g), args.g)
    ti = analyze(f, g, tol=args.tol, shrink_region=args.shrink_region)
    if args.json:
        _emit(ti.to_json(), args.json)
    if ti.identically_zero:
        print(f"f(D)g is identically zero (deg g = {ti.n} < r = {ti.r})")
        return EXIT_OK
    if args.plot:
        _write_plot(ti, args.plot)
    if ti.hull is not None and not ti.hull.is_empty():
        kd = ti.hull.diameter()
        if ti.region.diameter() > 1e6 * max(kd, 1e-300) and kd > 0:
            print("warning: region diameter exceeds 1e6 x diam(K)", file=sys.stderr)
    zeros = ti.h_zeros.roots
    print(f"h: degree {ti.h.degree()}, {len(zeros)} zero(s); region {ti.region.kind}, tol {ti.tol:.3e}")
    for z, m in zip(zeros, ti.margins):
        flag = "ok" if m <= ti.tol else "OUTSIDE"
        print(f"  z = {z.real:+.12g} {z.imag:+.12g}i   margin {m:+.3e}   {flag}")
    if ti.violations:
        print(f"{len(ti.violations)} zero(s) outside the region", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_certificate(args) -> int:
    g = _nonzero(_load_poly(args.g), args.g)
    beta = find_roots(g).roots
    zs = [args.z] if args.z is not None else list(find_roots(linear_factor_apply(g, args.alpha)).roots)
    out = []
    for z in zs:
        item = {"z": complex_to_json(z)}
        if any(z == b for b in beta):
            item["error"] = "certificate undefined at zero of g"
        else:
            cert = certificate(z, beta, args.alpha)
            item.update(cert.to_json())
            item["reconstruction_error"] = abs(cert.reconstruction - z)
            item["log_derivative_residual"] = log_derivative_residual(z, beta, args.alpha)
        out.append(item)
    _emit({"alpha": complex_to_json(args.alpha), "g_roots": [complex_to_json(b) for b in beta], "certificates": out})
    return EXIT_OK


def _load_ensembles(path: str):
    raw = _load_json(path)
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: expected a JSON object")
    if "ensembles" in raw:
        entries = raw["ensembles"]
        tol = raw.get("tolerances", {})
    else:
        entries, tol = [raw], {}
    if not isinstance(entries, list) or not entries:
        raise UsageError(f"{path}: field 'ensembles' must be a nonempty list")
    try:
        pol = TolerancePolicy(**tol)
    except TypeError as exc:
        raise UsageError(f"{path}: field 'tolerances': {exc}")
    cfgs = []
    for k, e in enumerate(entries):
        e = dict(e)
        name = e.pop("name", f"ensemble{k}")
        try:
            cfg = EnsembleConfig.from_json(e)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"{path}: ensembles[{k}]: {exc}")
        cfg.seed = env_seed(cfg.seed)
        cfgs.append((name, cfg))
    return cfgs, pol


def cmd_verify(args) -> int:
    cfgs, pol = _load_ensembles(args.config)
    results = {}
    ok = True
    for name, cfg in cfgs:
        rep = run_verification(cfg, pol, workers=args.workers)
        results[name] = rep
        ok &= rep.passed
        print(f"{name}: {rep.passed_count}/{len(rep.records)} passed, "
              f"max margin {rep.max_margin}, certificate failures {rep.certificate_failures}",
              file=sys.stderr)
        if args.figures:
            Path(args.figures).mkdir(parents=True, exist_ok=True)
            plotting.margin_histogram_figure(rep, Path(args.figures) / f"{name}_margins.png")
        if args.replay_dir:
            d = Path(args.replay_dir)
            d.mkdir(parents=True, exist_ok=True)
            for rec in rep.failures():
                (d / f"{name}_{rec.id}.json").write_text(json.dumps({"f": rec.f, "g": rec.g}, indent=2))
    payload = {"pass": ok, "ensembles": {k: _finite(v.to_json()) for k, v in results.items()}}
    if args.out:
        _emit(payload, args.out)
    else:
        _emit({"pass": ok, "ensembles": {k: _finite(v.to_json())["summary"] for k, v in results.items()}})
    return EXIT_OK if ok else EXIT_VIOLATION


def _finite(obj):
    # JSON has no infinities; report them as strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def cmd_sweep(args) -> int:
    g = _nonzero(_load_poly(args.g), args.g)
    try:
        grid = parse_alpha_grid(args.alpha_grid)
    except ValueError as exc:
        raise UsageError(str(exc))
    if not grid:
        raise UsageError("--alpha-grid produced an empty grid")
    if any(a == 0 for a in grid):
        raise UsageError("--alpha-grid must not contain 0")
    K = convex_hull(find_roots(g).roots)
    result = alpha_sweep(g, grid, K)
    rows = list(sweep_rows(result, K))
    fh = open(args.csv, "w", newline="") if args.csv and args.csv != "-" else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(SWEEP_CSV_COLUMNS)
        for row in rows:
            w.writerow([row[0], row[1], row[2], row[3], row[4], repr(row[5]), repr(row[6])])
    finally:
        if fh is not sys.stdout:
            fh.close()
    if args.figure:
        plotting.sweep_figure(result, args.figure)
    fit = result.fit
    print(f"far slope {fit.far_slope}, near slope {fit.near_slope}", file=sys.stderr)
    return EXIT_OK if not any(r.error for r in result.records) else EXIT_NUMERICAL


def cmd_plot(args) -> int:
    f = _nonzero(_load_poly(args.f), args.f)
    g = _nonzero(_load_poly(args.g), args.g)
    ti = analyze(f, g)
    if ti.identically_zero:
        raise UsageError("f(D)g is identically zero; nothing to plot")
    _write_plot(ti, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="takagi",
        description="Zeros of the differential composition f(D)g and their inclusion regions.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("compose", help="print h = f(D)g as polynomial JSON")
    s.add_argument("f")
    s.add_argument("g")
    s.set_defaults(func=cmd_compose)

    s = sub.add_parser("roots", help="zeros of a polynomial with residuals and clusters")
    s.add_argument("p")
    s.add_argument("--cluster-tol", type=float, default=None)
    s.set_defaults(func=cmd_roots)

    s = sub.add_parser("region", help="hull K of the zeros of g, widened by the zeros of f if given")
    s.add_argument("g")
    s.add_argument("--f", default=None)
    s.set_defaults(func=cmd_region)

    s = sub.add_parser("analyze", help="check every zero of f(D)g against the inclusion region",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    s.add_argument("f")
    s.add_argument("g")
    s.add_argument("--tol", type=float, default=None,
                   help="containment tolerance (default 1e-6 * (diam(region) + max|z|))")
    s.add_argument("--plot", default=None, help="figure path; .svg is written directly, other suffixes via matplotlib")
    s.add_argument("--json", default=None, help="write the full instance as JSON")
    s.add_argument("--shrink-region", type=float, default=None, help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("certificate", help="convex-combination certificates for zeros of g' - alpha g")
    s.add_argument("g")
    s.add_argument("--alpha", type=_complex_arg, required=True)
    s.add_argument("--z", type=_complex_arg, default=None, help="certify this point instead of every zero")
    s.set_defaults(func=cmd_certificate)

    s = sub.add_parser("verify", help="run randomized ensembles from a JSON config",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    s.add_argument("config")
    s.add_argument("--out", default=None, help="full report JSON (default: summary on stdout)")
    s.add_argument("--figures", default=None, help="directory for margin histograms")
    s.add_argument("--replay-dir", default=None, help="directory for failing-instance replay files")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="zeros of g' - alpha g over a grid of alphas, as CSV")
    s.add_argument("g")
    s.add_argument("--alpha-grid", required=True,
                   help="geom:START:STOP:COUNT, lin:START:STOP:COUNT or a comma list")
    s.add_argument("--csv", default=None, help="output CSV (default stdout)")
    s.add_argument("--figure", default=None, help="log-log figure path")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("plot", help="draw K, the region and the zeros")
    s.add_argument("f")
    s.add_argument("g")
    s.add_argument("out")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"takagi {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RootFindingError, ArithmeticError) as exc:
        print(f"takagi {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
