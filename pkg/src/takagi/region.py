"""Convex regions in the complex plane: hulls, segment Minkowski sums, distances.

Points are Python complex numbers throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .poly import complex_from_json, complex_to_json

HULL_RTOL = 1e-12
ABS_TOL = 1e-12

KINDS = ("empty", "point", "segment", "polygon")


def _cross(o: complex, a: complex, b: complex) -> float:
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


@dataclass(frozen=True)
class ConvexRegion:
    kind: str
    vertices: tuple[complex, ...] = ()

    def __post_init__(self):
        expected = {"empty": 0, "point": 1, "segment": 2}
        if self.kind not in KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        nv = len(self.vertices)
        if self.kind in expected and nv != expected[self.kind]:
            raise ValueError(f"{self.kind} region needs {expected[self.kind]} vertices, got {nv}")
        if self.kind == "polygon" and nv < 3:
            raise ValueError("polygon region needs at least 3 vertices")

    @classmethod
    def empty(cls) -> "ConvexRegion":
        return cls("empty")

    def is_empty(self) -> bool:
        return self.kind == "empty"

    def diameter(self) -> float:
        vs = self.vertices
        return max((abs(a - b) for i, a in enumerate(vs) for b in vs[i + 1:]), default=0.0)

    def centroid(self) -> complex:
        if not self.vertices:
            raise ValueError("empty region has no centroid")
        return sum(self.vertices) / len(self.vertices)

    def scaled(self, factor: float, about: complex | None = None) -> "ConvexRegion":
        """Homothety about ``about`` (vertex centroid by default)."""
        if self.is_empty():
            return self
        c = self.centroid() if about is None else about
        return convex_hull([c + factor * (v - c) for v in self.vertices])

    def to_json(self) -> dict:
        return {"kind": self.kind, "vertices": [complex_to_json(v) for v in self.vertices]}

    @classmethod
    def from_json(cls, obj: dict) -> "ConvexRegion":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValueError("region object is missing field 'kind'")
        vs = tuple(complex_from_json(v, f"vertices[{k}]") for k, v in enumerate(obj.get("vertices", [])))
        return cls(obj["kind"], vs)


@dataclass(frozen=True)
class Segment:
    """Closed segment ``[a, b]``; ``Segment.through_origin(w)`` is ``[0, w]``."""

    a: complex
    b: complex

    @classmethod
    def through_origin(cls, w: complex) -> "Segment":
        return cls(0j, complex(w))


def _tolerance(points: Sequence[complex]) -> float:
    scale = max((max(abs(p.real), abs(p.imag)) for p in points), default=0.0)
    return HULL_RTOL * scale if scale > 0 else ABS_TOL


def convex_hull(points: Iterable[complex]) -> ConvexRegion:
    """Andrew's monotone chain with a distance-based collinearity tolerance.

    After the exact chain pass, a vertex is dropped when it lies within
    ``1e-12 * scale`` of the segment joining its neighbours, where ``scale``
    is the largest coordinate magnitude.  Coincident and collinear inputs collapse to point/segment.
    """
    pts = sorted({complex(p) for p in points}, key=lambda p: (p.real, p.imag))
    if not pts:
        return ConvexRegion.empty()
    tol = _tolerance(pts)
    if abs(pts[-1] - pts[0]) <= tol and all(abs(p - pts[0]) <= tol for p in pts):
        return ConvexRegion("point", (pts[0],))

    def chain(seq):
        out: list[complex] = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    verts = _prune(lower[:-1] + upper[:-1], tol)
    if len(verts) <= 2:
        a, b = _farthest_pair(pts)
        if abs(a - b) <= tol:
            return ConvexRegion("point", (a,))
        return ConvexRegion("segment", (a, b))
    return ConvexRegion("polygon", tuple(verts))


def _prune(verts: list[complex], tol: float) -> list[complex]:
    """Drop vertices within ``tol`` of the segment joining their neighbours."""
    changed = True
    while changed and len(verts) > 2:
        changed = False
        for i in range(len(verts)):
            a, b, c = verts[i - 1], verts[i], verts[(i + 1) % len(verts)]
            if _dist_to_segment(b, a, c) <= tol:
                del verts[i]
                changed = True
                break
    return verts


def _farthest_pair(pts: Sequence[complex]) -> tuple[complex, complex]:
    best = (pts[0], pts[0])
    for i, a in enumerate(pts):
        for b in pts[i + 1:]:
            if abs(a - b) > abs(best[0] - best[1]):
                best = (a, b)
    return best


def minkowski_sum_segment(r: ConvexRegion, s: Segment) -> ConvexRegion:
    """``{x + y : x in r, y in s}`` as the hull of all vertex-endpoint sums."""
    if r.is_empty():
        return r
    return convex_hull([v + e for v in r.vertices for e in (s.a, s.b)])


def _dist_to_segment(z: complex, a: complex, b: complex) -> float:
    d = b - a
    L2 = d.real * d.real + d.imag * d.imag
    if L2 == 0:
        return abs(z - a)
    w = (z - a) * d.conjugate()
    if w.real <= 0:
        return abs(z - a)
    if w.real >= L2:
        return abs(z - b)
    # perpendicular distance; exactly zero for points on the line
    return abs(w.imag) / math.sqrt(L2)


def signed_distance(r: ConvexRegion, z: complex) -> float:
    """Distance to ``r``; negative depth inside a polygon, zero on the set otherwise."""
    z = complex(z)
    if r.kind == "empty":
        raise ValueError("signed distance to an empty region is undefined")
    vs = r.vertices
    if r.kind == "point":
        return abs(z - vs[0])
    if r.kind == "segment":
        return _dist_to_segment(z, vs[0], vs[1])
    edges = list(zip(vs, vs[1:] + vs[:1]))
    d = min(_dist_to_segment(z, a, b) for a, b in edges)
    inside = all(_cross(a, b, z) >= 0 for a, b in edges)
    return -d if inside else d


def contains(r: ConvexRegion, z: complex, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    if r.is_empty():
        return False
    return signed_distance(r, z) <= tol


def hausdorff_distance(a: ConvexRegion, b: ConvexRegion) -> float:
    """Hausdorff distance between two nonempty convex regions.

    Distance to a convex set is a convex function, so its maximum over a
    convex region is attained at a vertex.
    """
    if a.is_empty() or b.is_empty():
        if a.is_empty() and b.is_empty():
            return 0.0
        return math.inf
    da = max(max(signed_distance(b, v), 0.0) for v in a.vertices)
    db = max(max(signed_distance(a, v), 0.0) for v in b.vertices)
    return max(da, db)
