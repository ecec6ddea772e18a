"""Randomized batch verification and the small-alpha sweep experiment.

Random streams come from numpy's PCG64 bit generator seeded with the
configured 64-bit seed, so a seed reproduces an ensemble on any platform.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

import mpmath
import numpy as np
from scipy.optimize import linear_sum_assignment

from .poly import Polynomial, complex_to_json, derivative, linear_factor_apply
from .region import ConvexRegion, convex_hull, signed_distance
from .roots import RootFindingError, RootMultiset, find_roots
from .theorem import analyze, certificate, containment_tol, log_derivative_residual

ROOT_LAWS = ("unit_disc_uniform", "real_interval", "clustered")
FAR_FACTOR = 10.0
MARGIN_BUCKETS = (-math.inf, -1.0, -1e-1, -1e-2, -1e-3, -1e-6, 0.0, 1e-6, math.inf)


@dataclass
class EnsembleConfig:
    count: int = 100
    seed: int = 0
    deg_f: tuple[int, int] = (1, 4)
    deg_g: tuple[int, int] = (1, 8)
    root_law: str = "unit_disc_uniform"
    interval: tuple[float, float] = (-1.0, 1.0)
    centers: tuple[complex, ...] = (0j,)
    spread: float = 1e-2
    coefficient_law: str | None = None  # "complex_gaussian" replaces root sampling
    alpha_floor: float = 0.05
    gauss_lucas: bool = False  # force f = z**k with k <= deg g

    def __post_init__(self):
        self.deg_f = tuple(int(d) for d in self.deg_f)
        self.deg_g = tuple(int(d) for d in self.deg_g)
        self.centers = tuple(complex(c) for c in self.centers)
        self.interval = tuple(float(x) for x in self.interval)
        if self.count < 1:
            raise ValueError("count must be at least 1")
        for name, (lo, hi) in (("deg_f", self.deg_f), ("deg_g", self.deg_g)):
            if lo > hi or lo < 0:
                raise ValueError(f"{name} must be a nonempty range, got {lo}..{hi}")
        if self.deg_f[1] < 1:
            raise ValueError("deg_f must allow degree >= 1")
        if self.root_law not in ROOT_LAWS:
            raise ValueError(f"root_law must be one of {ROOT_LAWS}, got {self.root_law!r}")
        if self.coefficient_law not in (None, "complex_gaussian"):
            raise ValueError(f"unknown coefficient_law {self.coefficient_law!r}")
        if not self.centers:
            raise ValueError("clustered law needs at least one center")

    @classmethod
    def from_json(cls, obj: dict) -> "EnsembleConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        kw = dict(obj)
        if "centers" in kw:
            kw["centers"] = [complex(*c) if isinstance(c, list) else complex(c) for c in kw["centers"]]
        return cls(**kw)

    def to_json(self) -> dict:
        d = asdict(self)
        d["centers"] = [complex_to_json(c) for c in self.centers]
        d["deg_f"], d["deg_g"], d["interval"] = list(self.deg_f), list(self.deg_g), list(self.interval)
        return d


@dataclass(frozen=True)
class Instance:
    id: int
    f: Polynomial
    g: Polynomial
    g_roots: tuple[complex, ...] | None  # sampled, independent of the root finder
    alphas: tuple[complex, ...] | None
    r: int


def _sample_points(rng: np.random.Generator, cfg: EnsembleConfig, k: int) -> list[complex]:
    if cfg.root_law == "unit_disc_uniform":
        rad = np.sqrt(rng.random(k))
        ang = 2 * np.pi * rng.random(k)
        return [complex(z) for z in rad * np.exp(1j * ang)]
    if cfg.root_law == "real_interval":
        lo, hi = cfg.interval
        return [complex(x) for x in lo + (hi - lo) * rng.random(k)]
    idx = rng.integers(0, len(cfg.centers), size=k)
    rad = cfg.spread * np.sqrt(rng.random(k))
    ang = 2 * np.pi * rng.random(k)
    return [cfg.centers[i] + complex(z) for i, z in zip(idx, rad * np.exp(1j * ang))]


def _lift(alpha: complex, floor: float) -> complex:
    # push tiny factor zeros out to the floor radius, keeping the direction
    if abs(alpha) >= floor:
        return alpha
    if alpha == 0:
        return complex(floor)
    return floor * alpha / abs(alpha)


def _unit_lead(rng: np.random.Generator) -> complex:
    return complex((0.5 + 1.5 * rng.random()) * np.exp(2j * np.pi * rng.random()))


def generate_instances(cfg: EnsembleConfig) -> Iterator[Instance]:
    """Deterministic stream of ``(f, g)`` pairs with ``r <= deg g``."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    for k in range(cfg.count):
        n = int(rng.integers(cfg.deg_g[0], cfg.deg_g[1] + 1))
        m = int(rng.integers(max(cfg.deg_f[0], 1), cfg.deg_f[1] + 1))
        if cfg.gauss_lucas:
            r = min(m, n)
            f = Polynomial.monomial(r)
            alphas: tuple[complex, ...] | None = ()
        else:
            r = int(rng.integers(0, min(m, n) + 1))
            if cfg.coefficient_law == "complex_gaussian":
                body = rng.normal(size=m - r + 1) + 1j * rng.normal(size=m - r + 1)
                while abs(body[0]) < 1e-3 or abs(body[-1]) < 1e-3:
                    body = rng.normal(size=m - r + 1) + 1j * rng.normal(size=m - r + 1)
                f = Polynomial([0] * r + [complex(c) for c in body])
                alphas = None
            else:
                alphas = tuple(_lift(a, cfg.alpha_floor) for a in _sample_points(rng, cfg, m - r))
                f = Polynomial.from_roots((0j,) * r + alphas, lead=_unit_lead(rng))
        if cfg.coefficient_law == "complex_gaussian":
            c = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
            g = Polynomial(c)
            g_roots = None
        else:
            g_roots = tuple(_sample_points(rng, cfg, n))
            g = Polynomial.from_roots(g_roots, lead=_unit_lead(rng))
        yield Instance(k, f, g, g_roots, alphas, r)


@dataclass
class TolerancePolicy:
    containment_rtol: float = 1e-6
    certificate_gap: float = 1e-6
    certificate_rtol: float = 1e-7
    lambda_sum_tol: float = 1e-12
    kappa_slack: float = 1e-9
    oracle_tol: float = 1e-7
    shrink_region: float | None = None  # harness self-test only


@dataclass
class InstanceRecord:
    id: int
    passed: bool
    f: dict
    g: dict
    margins: list[float] = field(default_factory=list)
    tol: float = 0.0
    scale: float = 0.0  # diam(region) + max|z|
    worst_margin: float | None = None
    identically_zero: bool = False
    degree_law_ok: bool = True
    certificates_checked: int = 0
    certificate_failures: int = 0
    certificates_escalated: int = 0
    max_reconstruction_error: float = 0.0
    max_lambda_sum_error: float = 0.0
    min_lambda: float | None = None
    max_kappa_ratio: float = 0.0
    max_log_derivative_residual: float = 0.0
    oracle_error: float | None = None
    error: str | None = None


@dataclass
class VerificationReport:
    config: dict
    records: list[InstanceRecord]
    passed_count: int
    failed_count: int
    max_margin: float | None
    margin_histogram: dict
    certificate_failures: int
    oracle_mismatches: int

    @property
    def passed(self) -> bool:
        return self.failed_count == 0

    def failures(self) -> list[InstanceRecord]:
        return [r for r in self.records if not r.passed]

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "config": self.config,
            "summary": {
                "instances": len(self.records),
                "passed": self.passed_count,
                "failed": self.failed_count,
                "max_margin": self.max_margin,
                "margin_histogram": self.margin_histogram,
                "certificate_failures": self.certificate_failures,
                "oracle_mismatches": self.oracle_mismatches,
            },
            "records": [asdict(r) for r in self.records],
        }


def match_multisets(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Largest pairing distance under a minimum-cost perfect matching."""
    if len(a) != len(b):
        return math.inf
    if not a:
        return 0.0
    cost = np.abs(np.subtract.outer(np.asarray(a), np.asarray(b)))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


class _ExactChain:
    """The step polynomials ``D^r g`` and ``(D - alpha_i)`` images in mpmath.

    Built only when a double-precision certificate misses its tolerance;
    roots are then Newton-refined at ``MP_DIGITS`` so a certificate is never
    judged on root error the double-precision chain cannot resolve.
    """

    MP_DIGITS = 40

    def __init__(self, g: Polynomial, r: int, alphas: Sequence[complex]):
        self.ctx = mpmath.mp.clone()
        self.ctx.dps = self.MP_DIGITS
        mpc = self.ctx.mpc
        p = [mpc(c.real, c.imag) for c in g.coeffs]
        for _ in range(r):
            p = [k * p[k] for k in range(1, len(p))]
        self.steps = [p]
        for a in alphas:
            a = mpc(a.real, a.imag)
            dp = [k * p[k] for k in range(1, len(p))] + [mpc(0)]
            p = [dp[k] - a * p[k] for k in range(len(p))]
            self.steps.append(p)

    def refine(self, step: int, roots: Sequence[complex]) -> list[complex]:
        ctx = self.ctx
        cs = self.steps[step]
        out = []
        for z0 in roots:
            z = ctx.mpc(z0.real, z0.imag)
            for _ in range(200):
                val = dval = ctx.mpc(0)
                for c in reversed(cs):
                    dval = dval * z + val
                    val = val * z + c
                if dval == 0:
                    break
                dz = val / dval
                z -= dz
                if abs(dz) <= ctx.mpf(10) ** (-(self.MP_DIGITS - 5)) * (1 + abs(z)):
                    break
            out.append(complex(z))
        return out


def _certificate_ok(z, roots, alpha, n, pol: TolerancePolicy):
    cert = certificate(z, roots, alpha)
    err = abs(cert.reconstruction - z)
    lam_err = abs(math.fsum(cert.lambdas) - 1.0)
    ok = (
        min(cert.lambdas) > 0
        and lam_err <= pol.lambda_sum_tol
        and err <= pol.certificate_rtol * (1 + abs(z))
        and cert.kappa <= n / abs(alpha) ** 2 * (1 + pol.kappa_slack)
    )
    return ok, cert, err, lam_err


def _check_steps(rec: InstanceRecord, inst: Instance, alphas: Sequence[complex], r: int, pol: TolerancePolicy):
    """Certificates for each degree-1 factor step ``p -> p' - alpha p``."""
    p = derivative(inst.g, r)
    if p.degree() == 0:
        return
    p_roots = find_roots(p).roots
    exact = None
    for step, alpha in enumerate(alphas):
        q = linear_factor_apply(p, alpha)
        q_roots = find_roots(q).roots
        n = len(p_roots)
        refined_p = None
        for iz, z in enumerate(q_roots):
            if min(abs(z - b) for b in p_roots) <= pol.certificate_gap:
                continue
            ok, cert, err, lam_err = _certificate_ok(z, p_roots, alpha, n, pol)
            betas = p_roots
            if not ok:
                if exact is None:
                    exact = _ExactChain(inst.g, r, alphas)
                if refined_p is None:
                    refined_p = exact.refine(step, p_roots)
                (z,) = exact.refine(step + 1, [z])
                betas = refined_p
                ok, cert, err, lam_err = _certificate_ok(z, betas, alpha, n, pol)
                rec.certificates_escalated += 1
            rec.certificates_checked += 1
            rec.max_reconstruction_error = max(rec.max_reconstruction_error, err / (1 + abs(z)))
            rec.max_lambda_sum_error = max(rec.max_lambda_sum_error, lam_err)
            lo = min(cert.lambdas)
            rec.min_lambda = lo if rec.min_lambda is None else min(rec.min_lambda, lo)
            rec.max_kappa_ratio = max(rec.max_kappa_ratio, cert.kappa / cert.schwarz_bound)
            rec.max_log_derivative_residual = max(
                rec.max_log_derivative_residual,
                log_derivative_residual(z, betas, alpha) * cert.kappa / (1 + abs(z)),
            )
            if not ok:
                rec.certificate_failures += 1
        p, p_roots = q, q_roots


def verify_instance(inst: Instance, pol: TolerancePolicy | None = None) -> InstanceRecord:
    pol = pol or TolerancePolicy()
    rec = InstanceRecord(inst.id, False, inst.f.to_json(), inst.g.to_json())
    try:
        ti = analyze(inst.f, inst.g, shrink_region=pol.shrink_region)
        n, r = ti.n, ti.r
        if ti.identically_zero:
            rec.identically_zero = True
            rec.degree_law_ok = n < r
            rec.passed = rec.degree_law_ok
            return rec
        rec.degree_law_ok = ti.h.degree() == n - r
        zeros = ti.h_zeros.roots
        rec.scale = containment_tol(ti.region, zeros, rtol=1.0)
        rec.tol = pol.containment_rtol * rec.scale
        rec.margins = list(ti.margins)
        rec.worst_margin = max(ti.margins, default=None)
        contained = all(m <= rec.tol for m in ti.margins)
        if inst.g_roots is not None:
            rec.oracle_error = match_multisets(ti.g_roots.roots, inst.g_roots)
        _check_steps(rec, inst, ti.alphas.roots, r, pol)
        rec.passed = contained and rec.degree_law_ok and rec.certificate_failures == 0
    except (RootFindingError, ArithmeticError, ValueError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
        rec.passed = False
    return rec


def _histogram(records: Sequence[InstanceRecord]) -> dict:
    """Counts of per-zero margins normalised by the containment scale."""
    vals = []
    for rec in records:
        if rec.scale > 0:
            vals.extend(m / rec.scale for m in rec.margins)
    counts, _ = np.histogram(np.asarray(vals, dtype=float), bins=np.asarray(MARGIN_BUCKETS))
    labels = [f"[{lo:g}, {hi:g})" for lo, hi in zip(MARGIN_BUCKETS, MARGIN_BUCKETS[1:])]
    return dict(zip(labels, (int(c) for c in counts)))


def _verify_star(args):
    return verify_instance(*args)


def run_verification(
    cfg: EnsembleConfig, tol_policy: TolerancePolicy | None = None, workers: int = 1
) -> VerificationReport:
    """Analyze every generated instance and collect pass/fail records.

    A failing instance never aborts the batch; its record keeps ``f`` and
    ``g`` so :func:`replay` can reproduce it.
    """
    pol = tol_policy or TolerancePolicy()
    instances = list(generate_instances(cfg))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(_verify_star, [(i, pol) for i in instances], chunksize=32))
    else:
        records = [verify_instance(i, pol) for i in instances]
    records.sort(key=lambda r: r.id)
    margins = [m for r in records for m in r.margins]
    return VerificationReport(
        config=cfg.to_json(),
        records=records,
        passed_count=sum(r.passed for r in records),
        failed_count=sum(not r.passed for r in records),
        max_margin=max(margins, default=None),
        margin_histogram=_histogram(records),
        certificate_failures=sum(r.certificate_failures for r in records),
        oracle_mismatches=sum(
            1 for r in records if r.oracle_error is not None and r.oracle_error > pol.oracle_tol
        ),
    )


def replay(record: InstanceRecord | dict, tol_policy: TolerancePolicy | None = None) -> InstanceRecord:
    """Re-run one serialized instance (without the sampled-root oracle)."""
    data = record if isinstance(record, dict) else asdict(record)
    f = Polynomial.from_json(data["f"])
    g = Polynomial.from_json(data["g"])
    inst = Instance(int(data["id"]), f, g, None, None, 0)
    return verify_instance(inst, tol_policy)


# ---------------------------------------------------------------- alpha sweep


@dataclass
class SweepRecord:
    alpha: complex
    near: list[complex] = field(default_factory=list)
    far: list[complex] = field(default_factory=list)
    near_dist_to_K: list[float] = field(default_factory=list)
    near_displacement: list[float] = field(default_factory=list)
    far_scaled: list[float] = field(default_factory=list)  # |z| * |alpha|
    error: str | None = None


@dataclass
class SweepFit:
    near_slope: float | None
    near_residual: float | None
    far_slope: float | None
    far_residual: float | None


@dataclass
class SweepResult:
    records: list[SweepRecord]
    fit: SweepFit
    threshold: float


def _loglog_fit(xs: Sequence[float], ys: Sequence[float]):
    pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0 and math.isfinite(y)]
    if len(pts) < 2:
        return None, None
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    (slope, icpt), res, *_ = np.polyfit(lx, ly, 1, full=True)
    rms = math.sqrt(float(res[0]) / len(pts)) if len(res) else 0.0
    return float(slope), rms


def alpha_sweep(g: Polynomial, alpha_grid: Sequence[complex], K: ConvexRegion | None = None) -> SweepResult:
    """Track the zeros of ``g' - alpha g`` as ``alpha`` shrinks.

    A zero is *far* when ``|z| > 10 max(1, diam K)``.  Near zeros are measured
    by their distance to ``K`` and by their displacement from the nearest
    zero of ``g'`` (the alpha = 0 positions); the near-zero slope is fitted on
    the displacement because near zeros often sit inside ``K``.
    """
    if g.is_zero() or g.degree() < 1:
        raise ValueError("alpha sweep needs deg g >= 1")
    if any(complex(a) == 0 for a in alpha_grid):
        raise ValueError("alpha grid must not contain 0")
    if K is None:
        K = convex_hull(find_roots(g).roots)
    threshold = FAR_FACTOR * max(1.0, K.diameter())
    dg = derivative(g)
    crit = find_roots(dg).roots if dg.degree() >= 1 else ()
    records = []
    for alpha in alpha_grid:
        alpha = complex(alpha)
        rec = SweepRecord(alpha)
        try:
            zeros = find_roots(linear_factor_apply(g, alpha)).roots
        except RootFindingError as exc:
            rec.error = str(exc)
            records.append(rec)
            continue
        for z in zeros:
            if abs(z) > threshold:
                rec.far.append(z)
                rec.far_scaled.append(abs(z) * abs(alpha))
            else:
                rec.near.append(z)
                rec.near_dist_to_K.append(max(signed_distance(K, z), 0.0))
                rec.near_displacement.append(min((abs(z - c) for c in crit), default=math.nan))
        records.append(rec)
    mags = [abs(r.alpha) for r in records]
    near_y = [max(r.near_displacement, default=math.nan) for r in records]
    far_y = [max((abs(z) for z in r.far), default=math.nan) for r in records]
    ns, nr = _loglog_fit(mags, near_y)
    fs, fr = _loglog_fit(mags, far_y)
    return SweepResult(records, SweepFit(ns, nr, fs, fr), threshold)


SWEEP_CSV_COLUMNS = (
    "alpha_re", "alpha_im", "zero_re", "zero_im", "class", "dist_to_K", "abs_z_times_abs_alpha",
)


def sweep_rows(result: SweepResult, K: ConvexRegion):
    for rec in result.records:
        a = rec.alpha
        for z in rec.near:
            yield (a.real, a.imag, z.real, z.imag, "near",
                   max(signed_distance(K, z), 0.0), abs(z) * abs(a))
        for z in rec.far:
            yield (a.real, a.imag, z.real, z.imag, "far",
                   max(signed_distance(K, z), 0.0), abs(z) * abs(a))


def parse_alpha_grid(spec: str) -> list[complex]:
    """``geom:start:stop:count``, ``lin:start:stop:count`` or a comma list.

    Comma-list entries use Python complex syntax, e.g. ``0.1,1e-2+1e-3j``.
    """
    spec = spec.strip()
    if not spec:
        return []
    if spec.startswith(("geom:", "lin:")):
        kind, *parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec {spec!r} needs {kind}:start:stop:count")
        start, stop, count = complex(parts[0]), complex(parts[1]), int(parts[2])
        if count <= 0:
            return []
        if count == 1:
            return [start]
        if kind == "lin":
            return [start + (stop - start) * k / (count - 1) for k in range(count)]
        if start == 0 or stop == 0:
            raise ValueError("geometric grid endpoints must be nonzero")
        ratio = (stop / start) ** (1 / (count - 1))
        # real positive endpoints stay real
        if start.imag == 0 and stop.imag == 0 and start.real > 0 and stop.real > 0:
            lg = np.geomspace(start.real, stop.real, count)
            return [complex(x) for x in lg]
        return [start * ratio**k for k in range(count)]
    return [complex(tok.strip().replace(" ", "")) for tok in spec.split(",") if tok.strip()]


def env_seed(default: int) -> int:
    raw = os.environ.get("TAKAGI_SEED")
    return int(raw) if raw not in (None, "") else default

