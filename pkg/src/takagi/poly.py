"""Dense complex polynomials and the differential composition f(D)g.

Coefficients are stored ascending: ``coeffs[k]`` multiplies ``z**k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Iterable, Sequence

# A coefficient counts as zero when |c| <= ZERO_RTOL * max|coeffs|.
ZERO_RTOL = 1e-12


def _is_negligible(c: complex, scale: float) -> bool:
    return abs(c) <= ZERO_RTOL * scale


@dataclass(frozen=True)
class Polynomial:
    """Immutable polynomial with complex coefficients, ascending degree.

    Exact trailing zeros are dropped on construction, so the zero polynomial
    has ``coeffs == ()``.  Use :meth:`trimmed` to also drop coefficients that
    are negligible relative to the largest one.
    """

    coeffs: tuple[complex, ...]

    def __init__(self, coeffs: Iterable[Number] = ()):
        cs = [complex(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def trimmed(self) -> "Polynomial":
        cs = list(self.coeffs)
        scale = self.scale()
        while cs and _is_negligible(cs[-1], scale):
            cs.pop()
        return Polynomial(cs)

    @classmethod
    def from_roots(cls, roots: Iterable[Number], lead: Number = 1) -> "Polynomial":
        cs = [complex(lead)]
        for root in roots:
            root = complex(root)
            nxt = [0j] * (len(cs) + 1)
            for k, c in enumerate(cs):
                nxt[k + 1] += c
                nxt[k] -= root * c
            cs = nxt
        return cls(cs)

    @classmethod
    def monomial(cls, k: int, c: Number = 1) -> "Polynomial":
        return cls([0] * k + [c])

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int | None:
        """Degree, or ``None`` for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else None

    @property
    def lead(self) -> complex:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def scale(self) -> float:
        return max((abs(c) for c in self.coeffs), default=0.0)

    def __call__(self, z: Number) -> complex:
        return evaluate(self, z)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] += c
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial | Number") -> "Polynomial":
        if not isinstance(other, Polynomial):
            s = complex(other)
            return Polynomial([s * c for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return Polynomial()
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"coeffs": [complex_to_json(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj) -> "Polynomial":
        """Parse ``{"coeffs": [...]}`` or a bare coefficient list."""
        if isinstance(obj, dict):
            if "coeffs" not in obj:
                raise ValueError("polynomial object is missing field 'coeffs'")
            obj = obj["coeffs"]
        if not isinstance(obj, list):
            raise ValueError("field 'coeffs' must be a list")
        return cls(complex_from_json(c, field=f"coeffs[{k}]") for k, c in enumerate(obj))

    def __repr__(self) -> str:
        return f"Polynomial({list(self.coeffs)!r})"


def complex_to_json(z: Number) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(obj, field: str = "value") -> complex:
    """Accept ``[re, im]`` or a bare real number."""
    if isinstance(obj, bool):
        raise ValueError(f"{field}: expected a number or [re, im], got {obj!r}")
    if isinstance(obj, (int, float)):
        return complex(obj)
    if (
        isinstance(obj, (list, tuple))
        and len(obj) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj)
    ):
        return complex(obj[0], obj[1])
    raise ValueError(f"{field}: expected a number or [re, im], got {obj!r}")


def evaluate(p: Polynomial, z: Number) -> complex:
    """Horner evaluation of ``p`` at ``z``."""
    z = complex(z)
    acc = 0j
    for c in reversed(p.coeffs):
        acc = acc * z + c
    return acc


def derivative(p: Polynomial, k: int = 1) -> Polynomial:
    """k-th derivative, taken one order at a time.

    Repeating the first derivative makes ``derivative(p, j + k)`` and
    ``derivative(derivative(p, j), k)`` perform identical float operations.
    """
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    cs = list(p.coeffs)
    for _ in range(k):
        cs = [j * cs[j] for j in range(1, len(cs))]
    return Polynomial(cs)


def differential_compose(f: Polynomial, g: Polynomial) -> Polynomial:
    """Return ``h = f(D) g = sum_i f[i] * g^(i)``.

    The constant term of ``f`` multiplies ``g`` itself.  Terms are accumulated
    in increasing derivative order; the result is trimmed with the relative
    zero threshold, so ``h`` collapses to the zero polynomial exactly when
    every surviving term cancels.
    """
    n = len(g.coeffs)
    acc = [0j] * n
    for i, a in enumerate(f.coeffs):
        if i >= n:
            break
        if a == 0:
            continue
        gi = derivative(g, i).coeffs
        for k, c in enumerate(gi):
            acc[k] += a * c
    h = Polynomial(acc).trimmed()
    # all-cancelled sums that survive as rounding dust relative to the terms
    term_scale = max(
        (abs(a) * derivative(g, i).scale() for i, a in enumerate(f.coeffs) if i < n),
        default=0.0,
    )
    if h.coeffs and h.scale() <= ZERO_RTOL * term_scale:
        return Polynomial()
    return h


def origin_multiplicity(f: Polynomial) -> int:
    """Multiplicity of the zero of ``f`` at the origin."""
    if f.is_zero():
        raise ValueError("undefined multiplicity: zero polynomial")
    scale = f.scale()
    for k, c in enumerate(f.coeffs):
        if not _is_negligible(c, scale):
            return k
    raise AssertionError("unreachable: the leading coefficient is never negligible")


def linear_factor_apply(g: Polynomial, alpha: Number) -> Polynomial:
    """Return ``g' - alpha * g``, i.e. ``(D - alpha) g``."""
    return differential_compose(Polynomial([-complex(alpha), 1]), g)


def as_polynomial(obj: "Polynomial | Sequence[Number]") -> Polynomial:
    return obj if isinstance(obj, Polynomial) else Polynomial(obj)
