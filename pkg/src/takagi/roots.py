"""Simultaneous polynomial root finding (Aberth-Ehrlich) with residual gating."""

from __future__ import annotations

import cmath
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

from .poly import Polynomial, complex_from_json, complex_to_json, derivative

EPS = sys.float_info.epsilon
RESIDUAL_RTOL = 1e-10
POLISH_MAXITER = 50
# grouping radius for multiple-root candidates; roughly eps**(1/4)
MULTIPLE_ROOT_RTOL = 1e-4
GOLDEN_ANGLE = math.pi * (3 - math.sqrt(5))
# natural log of the largest double, about 709.78
LOG_RANGE = math.log(sys.float_info.max)


class RootFindingError(RuntimeError):
    """Raised when the residual contract cannot be met.

    Carries the best iterate found so the caller can inspect or report it.
    """

    def __init__(self, message: str, roots: Sequence[complex], residuals: Sequence[float]):
        super().__init__(message)
        self.roots = list(roots)
        self.residuals = list(residuals)


@dataclass(frozen=True)
class RootMultiset:
    roots: tuple[complex, ...] = ()
    residuals: tuple[float, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def to_json(self) -> dict:
        return {
            "roots": [complex_to_json(z) for z in self.roots],
            "residuals": list(self.residuals),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RootMultiset":
        if not isinstance(obj, dict) or "roots" not in obj:
            raise ValueError("root multiset object is missing field 'roots'")
        roots = tuple(complex_from_json(z, f"roots[{k}]") for k, z in enumerate(obj["roots"]))
        residuals = tuple(float(r) for r in obj.get("residuals", [0.0] * len(roots)))
        if len(residuals) != len(roots):
            raise ValueError("field 'residuals' must align with 'roots'")
        return cls(roots, residuals)


def residual_tolerance(p: Polynomial, z: complex) -> float:
    deg = p.degree() or 0
    growth = deg * math.log(max(1.0, abs(z)))
    if growth > 700:
        return math.inf
    return RESIDUAL_RTOL * p.scale() * math.exp(growth)


def _eval_with_derivative(cs: Sequence[complex], z: complex):
    """Horner for p, p' and the running bound sum |c_k| |z|^k."""
    p = 0j
    dp = 0j
    bound = 0.0
    az = abs(z)
    for c in reversed(cs):
        dp = dp * z + p
        p = p * z + c
        bound = bound * az + abs(c)
    return p, dp, bound


def _newton_step(cs: Sequence[complex], z: complex):
    """Return ``(p/p', |p| / |z|^n, bound / |z|^n)`` with n scaling only when |z| > 1.

    Outside the unit disc the reversed polynomial is evaluated at ``1/z``, so
    nothing overflows for very large roots.  ``p/p'`` is ``None`` when the
    derivative vanishes.
    """
    if abs(z) <= 1:
        val, dval, bound = _eval_with_derivative(cs, z)
        return (val / dval if dval != 0 else None), abs(val), bound
    n = len(cs) - 1
    w = 1 / z
    q = 0j
    dq = 0j
    bound = 0.0
    aw = abs(w)
    for c in cs:
        dq = dq * w + q
        q = q * w + c
        bound = bound * aw + abs(c)
    if q == 0:
        return 0j, 0.0, bound
    denom = w * (n - w * dq / q)
    return (1 / denom if denom != 0 else None), abs(q), bound


def _scaled_residual(p: Polynomial, z: complex) -> float:
    """``|p(z)| / max(1, |z|)^deg`` evaluated without overflow."""
    return _newton_step(p.coeffs, z)[1]


def _residual(p: Polynomial, z: complex) -> float:
    deg = p.degree() or 0
    growth = deg * math.log(max(1.0, abs(z)))
    if growth <= 700:
        direct = abs(_eval_with_derivative(p.coeffs, z)[0])
        if math.isfinite(direct):
            return direct
    scaled = _scaled_residual(p, z)
    if growth > 700:
        return math.inf if scaled > 0 else 0.0
    return scaled * math.exp(growth)


def polish_root(p: Polynomial, z0: complex, maxiter: int = POLISH_MAXITER) -> complex:
    """Newton refinement that never returns a worse residual than ``z0``."""
    z0 = complex(z0)
    cs = p.coeffs
    if len(cs) < 2:
        return z0
    best, best_res = z0, _residual(p, z0)
    z = z0
    for _ in range(maxiter):
        step, res, bound = _newton_step(cs, z)
        if step is None or res == 0:
            break
        z = z - step
        res = _residual(p, z)
        if res < best_res:
            best, best_res = z, res
        if abs(step) <= 4 * EPS * abs(z) and res >= best_res:
            break
    return best


def _newton_polygon(cs: Sequence[complex]) -> list[tuple[int, int, float]]:
    """Edges ``(k0, k1, log radius)`` of the upper hull of ``(k, log|c_k|)``.

    Each edge predicts ``k1 - k0`` roots of modulus about ``exp(log radius)``.
    Working with logarithms keeps this finite even when the radius is not.
    """
    pts = [(k, math.log(abs(c))) for k, c in enumerate(cs) if c != 0]
    hull: list[tuple[int, float]] = []
    for pt in pts:
        while len(hull) >= 2:
            (k0, y0), (k1, y1) = hull[-2], hull[-1]
            if (k1 - k0) * (pt[1] - y0) - (pt[0] - k0) * (y1 - y0) >= 0:
                hull.pop()
            else:
                break
        hull.append(pt)
    return [(k0, k1, (y0 - y1) / (k1 - k0)) for (k0, y0), (k1, y1) in zip(hull, hull[1:])]


def _initial_guesses(cs: Sequence[complex]) -> list[complex]:
    """Starting points on circles whose radii come from the Newton polygon.

    Each hull edge carries as many guesses as the degrees it spans.  Radii are
    capped by the Cauchy bound ``1 + max|c_k / c_n|``.
    """
    lead = cs[-1]
    cauchy = 1.0 + max(abs(c / lead) for c in cs[:-1])
    guesses = []
    for edge, (k0, k1, log_r) in enumerate(_newton_polygon(cs)):
        count = k1 - k0
        radius = min(math.exp(log_r), cauchy)
        for j in range(count):
            # offset angle keeps guesses off the real axis and symmetry lines;
            # the golden-angle turn per edge keeps equal-radius circles apart
            theta = 2 * math.pi * j / count + GOLDEN_ANGLE * edge + 0.4
            guesses.append(radius * cmath.exp(1j * theta))
    return guesses


def _aberth(cs: Sequence[complex], maxiter: int) -> list[complex]:
    n = len(cs) - 1
    z = _initial_guesses(cs)
    done = [False] * n
    for _ in range(maxiter):
        if all(done):
            break
        for i in range(n):
            if done[i]:
                continue
            zi = z[i]
            ratio, res, bound = _newton_step(cs, zi)
            if res <= 8 * EPS * bound:
                done[i] = True
                continue
            if ratio is None:
                # saddle of |p|: nudge deterministically
                z[i] = zi + (1e-3 + 1e-3j) * max(1.0, abs(zi))
                continue
            s = 0j
            for j in range(n):
                if j != i:
                    d = zi - z[j]
                    if d != 0:
                        s += 1.0 / d
            denom = 1.0 - ratio * s
            step = ratio / denom if denom != 0 else ratio
            z[i] = zi - step
            if abs(step) <= 2 * EPS * abs(z[i]):
                done[i] = True
    return z


def find_roots(p: Polynomial, maxiter: int | None = None) -> RootMultiset:
    """All ``deg p`` complex roots of ``p`` with their residuals ``|p(z)|``.

    Exact zero roots are split off by inspecting low-order coefficients.  The
    remaining roots come from Aberth iteration followed by guarded Newton
    polishing.  Raises :class:`RootFindingError` if any root misses the
    residual bound ``1e-10 * max|c| * max(1, |z|)**deg``.
    """
    if p.is_zero():
        raise ValueError("cannot find roots of the zero polynomial")
    cs = list(p.coeffs)
    k = 0
    while cs[k] == 0:
        k += 1
    rest = cs[k:]
    roots: list[complex] = [0j] * k
    m = len(rest) - 1
    if m >= 1:
        # Newton-polygon radii are within a factor 2m of the true moduli
        log_r = max(e[2] for e in _newton_polygon(rest))
        if log_r > LOG_RANGE - math.log(2 * m):
            raise RootFindingError(
                f"a root has modulus near exp({log_r:.1f}), beyond double precision range",
                roots,
                [],
            )
    if m == 1:
        roots.append(-rest[0] / rest[1])
    elif m > 1:
        budget = maxiter if maxiter is not None else 200 + 20 * m
        found = _aberth(rest, budget)
        q = Polynomial(rest)
        for i, z in enumerate(found):
            others = [abs(z - w) for j, w in enumerate(found) if j != i]
            gap = min(others) if others else math.inf
            zp = polish_root(q, z)
            if abs(zp - z) <= 0.5 * gap:
                found[i] = zp
        roots.extend(_refine_multiple(q, found))
    residuals = [_residual(p, z) for z in roots]
    # the contract |p(z)| <= 1e-10 max|c| max(1,|z|)^deg, compared in scaled form
    bad = [i for i, z in enumerate(roots) if not _scaled_residual(p, z) <= RESIDUAL_RTOL * p.scale()]
    if bad:
        worst = max(bad, key=lambda i: residuals[i])
        raise RootFindingError(
            f"residual contract unmet for {len(bad)} root(s); worst |p(z)| = "
            f"{residuals[worst]:.3e} at z = {roots[worst]}",
            roots,
            residuals,
        )
    return RootMultiset(tuple(roots), tuple(residuals))


def _refine_multiple(q: Polynomial, roots: list[complex]) -> list[complex]:
    """Snap tight clusters onto the simple zero of ``q^(m-1)``.

    A root of multiplicity ``m`` is only resolved to about ``eps**(1/m)`` by
    any method working on ``q`` alone, but it is a simple zero of the
    ``(m-1)``-th derivative.  The snapped value replaces the cluster only when
    its scaled residual is within twice the worst member's, so
    genuinely distinct close roots are left alone.
    """
    groups: dict[int, list[int]] = {}
    for i, label in enumerate(_cluster_labels(roots, MULTIPLE_ROOT_RTOL * (1.0 + max(abs(z) for z in roots)))):
        groups.setdefault(label, []).append(i)
    out = list(roots)
    for members in groups.values():
        m = len(members)
        if m < 2:
            continue
        center = sum(roots[i] for i in members) / m
        zr = polish_root(derivative(q, m - 1), center)
        spread = max(abs(roots[i] - center) for i in members)
        if abs(zr - center) > 2 * spread + 4 * EPS * abs(center):
            continue
        res = _newton_step(q.coeffs, zr)[1]
        worst = max(_newton_step(q.coeffs, roots[i])[1] for i in members)
        if res <= 2 * worst:
            for i in members:
                out[i] = zr
    return out


def _cluster_labels(roots: Sequence[complex], tol: float) -> list[int]:
    parent = list(range(len(roots)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) <= tol:
                parent[find(j)] = find(i)
    return [find(i) for i in range(len(roots))]


def default_cluster_tol(roots: Sequence[complex]) -> float:
    return 1e-6 * (1.0 + max((abs(z) for z in roots), default=0.0))


def cluster_multiplicities(rs: RootMultiset | Sequence[complex], tol: float | None = None):
    """Group roots by single linkage at distance ``tol``.

    Returns a list of ``(center, multiplicity)`` pairs in order of first
    appearance; each center is the mean of its cluster.
    """
    roots = list(rs.roots if isinstance(rs, RootMultiset) else rs)
    if tol is None:
        tol = default_cluster_tol(roots)
    if tol <= 0:
        raise ValueError("clustering tolerance must be positive")
    groups: dict[int, list[complex]] = {}
    for z, label in zip(roots, _cluster_labels(roots, tol)):
        groups.setdefault(label, []).append(z)
    return [(sum(g) / len(g), len(g)) for g in groups.values()]
