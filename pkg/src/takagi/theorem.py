"""Inclusion regions for the zeros of f(D)g and per-zero convexity certificates.

The region for ``h = f(D) g`` is the hull ``K`` of the zeros of ``g`` widened
by one segment ``[0, (n - r) / alpha_i]`` per nonzero zero ``alpha_i`` of
``f``, where ``r`` is the order of the zero of ``f`` at the origin.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

from .poly import Polynomial, complex_from_json, complex_to_json, differential_compose, origin_multiplicity
from .region import ConvexRegion, Segment, convex_hull, minkowski_sum_segment, signed_distance
from .roots import RootMultiset, find_roots

CONTAINMENT_RTOL = 1e-6


@dataclass(frozen=True)
class Certificate:
    lambdas: tuple[float, ...]
    kappa: float
    reconstruction: complex
    schwarz_bound: float | None  # n / |alpha|^2, None when alpha == 0

    def to_json(self) -> dict:
        return {
            "lambdas": list(self.lambdas),
            "kappa": self.kappa,
            "reconstruction": complex_to_json(self.reconstruction),
            "schwarz_bound": self.schwarz_bound,
        }


@dataclass(frozen=True)
class TakagiInstance:
    f: Polynomial
    g: Polynomial
    lead: complex
    r: int
    alphas: RootMultiset
    n: int
    h: Polynomial
    identically_zero: bool
    g_roots: RootMultiset | None = None
    hull: ConvexRegion | None = None
    region: ConvexRegion | None = None
    h_zeros: RootMultiset | None = None
    margins: tuple[float, ...] = ()
    tol: float = 0.0
    violations: tuple[int, ...] = field(default=())

    @property
    def contained(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        def opt(x):
            return None if x is None else x.to_json()

        return {
            "f": self.f.to_json(),
            "g": self.g.to_json(),
            "lead": complex_to_json(self.lead),
            "r": self.r,
            "alphas": self.alphas.to_json(),
            "n": self.n,
            "h": self.h.to_json(),
            "identically_zero": self.identically_zero,
            "g_roots": opt(self.g_roots),
            "hull": opt(self.hull),
            "region": opt(self.region),
            "h_zeros": opt(self.h_zeros),
            "margins": list(self.margins),
            "tol": self.tol,
            "violations": list(self.violations),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TakagiInstance":
        def opt(key, typ):
            v = obj.get(key)
            return None if v is None else typ.from_json(v)

        return cls(
            f=Polynomial.from_json(obj["f"]),
            g=Polynomial.from_json(obj["g"]),
            lead=complex_from_json(obj["lead"], "lead"),
            r=int(obj["r"]),
            alphas=RootMultiset.from_json(obj["alphas"]),
            n=int(obj["n"]),
            h=Polynomial.from_json(obj["h"]),
            identically_zero=bool(obj["identically_zero"]),
            g_roots=opt("g_roots", RootMultiset),
            hull=opt("hull", ConvexRegion),
            region=opt("region", ConvexRegion),
            h_zeros=opt("h_zeros", RootMultiset),
            margins=tuple(float(m) for m in obj.get("margins", [])),
            tol=float(obj.get("tol", 0.0)),
            violations=tuple(int(i) for i in obj.get("violations", [])),
        )


def _factor_order(z: complex):
    return (abs(z), cmath.phase(z))


def factor_operator(f: Polynomial) -> tuple[complex, int, RootMultiset]:
    """Split ``f = lead * z**r * prod(z - alpha_i)``.

    The nonzero zeros come back sorted by modulus, then argument, which fixes
    the order in which factors are applied and logged.
    """
    r = origin_multiplicity(f)
    rest = Polynomial(f.coeffs[r:])
    found = find_roots(rest)
    pairs = sorted(zip(found.roots, found.residuals), key=lambda p: _factor_order(p[0]))
    alphas = RootMultiset(tuple(a for a, _ in pairs), tuple(e for _, e in pairs))
    return f.lead, r, alphas


def build_region(
    g: Polynomial,
    r: int,
    alphas: RootMultiset | Sequence[complex],
    g_roots: RootMultiset | None = None,
) -> ConvexRegion:
    """``K + sum_i [0, n - r] / alpha_i`` with ``K`` the hull of the zeros of ``g``."""
    if g.is_zero():
        raise ValueError("region undefined for the zero polynomial g")
    n = g.degree()
    if r > n:
        raise ValueError(f"r = {r} exceeds deg g = {n}: f(D)g vanishes identically")
    if g_roots is None:
        g_roots = find_roots(g)
    region = convex_hull(g_roots.roots)
    for alpha in alphas:
        region = minkowski_sum_segment(region, Segment.through_origin((n - r) / alpha))
    return region


def containment_tol(region: ConvexRegion, zeros: Sequence[complex], rtol: float = CONTAINMENT_RTOL) -> float:
    return rtol * (region.diameter() + max((abs(z) for z in zeros), default=0.0))


def analyze(
    f: Polynomial,
    g: Polynomial,
    tol: float | None = None,
    shrink_region: float | None = None,
) -> TakagiInstance:
    """Compose, locate the zeros of ``h = f(D) g`` and check them against the region.

    ``shrink_region`` scales the region about its centroid before checking;
    it exists only so tests can confirm that violations get reported.
    """
    if f.is_zero() or g.is_zero():
        raise ValueError("analyze requires nonzero f and g")
    lead, r, alphas = factor_operator(f)
    n = g.degree()
    h = differential_compose(f, g)
    if h.is_zero():
        if n >= r:
            raise ArithmeticError(
                f"h vanished although deg g = {n} >= r = {r}; coefficients cancelled numerically"
            )
        return TakagiInstance(f, g, lead, r, alphas, n, h, True)
    g_roots = find_roots(g)
    hull = convex_hull(g_roots.roots)
    region = build_region(g, r, alphas, g_roots)
    if shrink_region is not None:
        region = region.scaled(shrink_region)
    h_zeros = find_roots(h)
    if tol is None:
        tol = containment_tol(region, h_zeros.roots)
    if region.is_empty():
        margins = tuple(math.inf for _ in h_zeros.roots)
    else:
        margins = tuple(signed_distance(region, z) for z in h_zeros.roots)
    violations = tuple(i for i, m in enumerate(margins) if not m <= tol)
    return TakagiInstance(
        f, g, lead, r, alphas, n, h, False,
        g_roots=g_roots, hull=hull, region=region, h_zeros=h_zeros,
        margins=margins, tol=tol, violations=violations,
    )


def _inverse_square_distances(z: complex, g_roots: Sequence[complex]) -> list[float]:
    out = []
    for beta in g_roots:
        d2 = abs(z - beta) ** 2
        if d2 == 0:
            raise ValueError(f"certificate undefined at zero of g: z = {z}")
        out.append(1.0 / d2)
    return out


def certificate(z: complex, g_roots: RootMultiset | Sequence[complex], alpha: complex) -> Certificate:
    """Weights writing ``z`` as a convex combination of zeros of ``g`` plus ``kappa * conj(alpha)``.

    With ``w_i = |z - beta_i|^-2``: ``lambda_i = w_i / sum(w)``, ``kappa = 1 / sum(w)``.
    At a zero of ``g' - alpha g`` the reconstruction equals ``z`` and
    ``kappa <= n / |alpha|^2``.
    """
    z = complex(z)
    alpha = complex(alpha)
    betas = list(g_roots)
    if not betas:
        raise ValueError("certificate needs at least one zero of g")
    w = _inverse_square_distances(z, betas)
    total = math.fsum(w)
    lambdas = tuple(wi / total for wi in w)
    kappa = 1.0 / total
    recon = sum(l * b for l, b in zip(lambdas, betas)) + kappa * alpha.conjugate()
    bound = len(betas) / abs(alpha) ** 2 if alpha != 0 else None
    return Certificate(lambdas, kappa, recon, bound)


def log_derivative_residual(z: complex, g_roots: RootMultiset | Sequence[complex], alpha: complex) -> float:
    """``|sum_i 1/(z - beta_i) - alpha|``, which is ``|h(z)/g(z)|`` for ``h = g' - alpha g``."""
    z = complex(z)
    total = 0j
    for beta in g_roots:
        if z == beta:
            raise ValueError(f"log-derivative undefined at zero of g: z = {z}")
        total += 1.0 / (z - beta)
    return abs(total - complex(alpha))


def quadratic_closed_form(alpha: complex, beta: complex) -> tuple[complex, complex]:
    """Zeros of ``g' - alpha g`` for ``g = z^2 - beta^2``, as ``(near, far)``.

    The zeros are ``(1 +- sqrt(1 + alpha^2 beta^2)) / alpha``.  The larger one
    is formed without cancellation and the smaller from the product of the
    zeros, ``-beta^2``.  Labels go by distance to the hull of ``{beta, -beta}``.
    """
    alpha = complex(alpha)
    beta = complex(beta)
    if alpha == 0:
        raise ValueError("alpha must be nonzero; alpha = 0 is the Gauss-Lucas case")
    s = cmath.sqrt(1 + alpha * alpha * beta * beta)
    top = 1 + s if abs(1 + s) >= abs(1 - s) else 1 - s
    z1 = top / alpha
    z2 = -beta * beta / z1
    k = convex_hull([beta, -beta])
    d1, d2 = max(signed_distance(k, z1), 0.0), max(signed_distance(k, z2), 0.0)
    if d2 < d1 or (d2 == d1 and abs(z2) <= abs(z1)):
        return z2, z1
    return z1, z2
