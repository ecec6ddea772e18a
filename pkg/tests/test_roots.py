import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment
from hypothesis import given, settings, strategies as st

from takagi.poly import Polynomial, evaluate
from takagi.roots import (
    RootFindingError,
    RootMultiset,
    cluster_multiplicities,
    find_roots,
    polish_root,
    residual_tolerance,
)

from conftest import bisect, random_complex


def sorted_roots(rs):
    return sorted(rs.roots, key=lambda z: (round(z.real, 6), round(z.imag, 6)))


def test_find_roots_i_minus_i():
    rs = find_roots(Polynomial([1, 0, 1]))
    got = sorted_roots(rs)
    assert got[0] == pytest.approx(-1j, abs=1e-14)
    assert got[1] == pytest.approx(1j, abs=1e-14)


def test_find_roots_quadratic_from_linear_factor():
    rs = find_roots(Polynomial([1, 2, -1]))
    got = sorted(z.real for z in rs.roots)
    assert got == pytest.approx([1 - math.sqrt(2), 1 + math.sqrt(2)], abs=1e-14)
    assert got == pytest.approx([-0.414214, 2.414214], abs=1e-6)


def test_find_roots_double_root():
    # (z - 1)^2 (z + 2) expanded by hand
    p = Polynomial([2, -3, 0, 1])
    assert Polynomial.from_roots([1, 1, -2]) == p
    rs = find_roots(p)
    assert len(rs) == 3
    for z, res in zip(rs.roots, rs.residuals):
        assert res == abs(evaluate(p, z))
        assert res <= residual_tolerance(p, z)
    clusters = sorted(cluster_multiplicities(rs, 1e-4), key=lambda c: c[0].real)
    assert [m for _, m in clusters] == [1, 2]
    assert clusters[0][0] == pytest.approx(-2, abs=1e-12)
    assert clusters[1][0] == pytest.approx(1, abs=1e-7)


def test_find_roots_errors_and_degree_zero():
    with pytest.raises(ValueError):
        find_roots(Polynomial())
    assert len(find_roots(Polynomial([3]))) == 0


def test_exact_origin_split():
    p = Polynomial([0, 0, 0, 2, 1])
    rs = find_roots(p)
    assert sum(1 for z in rs.roots if z == 0) == 3
    assert any(z == pytest.approx(-2) for z in rs.roots)


def test_residual_contract_failure_carries_best_iterate():
    p = Polynomial.from_roots([1, 2, 3, 4])
    with pytest.raises(RootFindingError) as info:
        find_roots(p, maxiter=0)  # no iterations: initial guesses only
    assert len(info.value.roots) == 4 and len(info.value.residuals) == 4


def test_polish_sqrt2():
    assert polish_root(Polynomial([-2, 0, 1]), 1.4) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_polish_cubic_real_root():
    root = bisect(lambda t: t**3 + 6 * t - 1, 0.0, 0.5)
    z = polish_root(Polynomial([-1, 6, 0, 1]), 0.2)
    assert z == pytest.approx(root, abs=1e-14)
    assert z.real == pytest.approx(0.165906, abs=1e-6)


def test_polish_double_root_never_worse():
    p = Polynomial([0, 0, 1])
    z = polish_root(p, 1e-3)
    assert abs(z) < 1e-3
    assert abs(evaluate(p, z)) <= abs(evaluate(p, 1e-3))


def test_polish_returns_start_when_stuck():
    p = Polynomial([1, 0, 1])
    assert polish_root(p, 0.0) == 0.0  # p'(0) = 0


def test_cluster_examples():
    cs = cluster_multiplicities([1.0000001, 0.9999999, -2], 1e-3)
    assert [(pytest.approx(c), m) for c, m in cs] == [(1, 2), (-2, 1)]
    cs = cluster_multiplicities([1j, -1j], 1e-3)
    assert cs == [(1j, 1), (-1j, 1)]
    with pytest.raises(ValueError):
        cluster_multiplicities([1], 0)


def test_cluster_single_linkage_chains():
    cs = cluster_multiplicities([0, 0.9e-3, 1.8e-3, 5], 1e-3)
    assert [m for _, m in cs] == [3, 1]
    assert sum(m for _, m in cs) == 4


def test_json_round_trip():
    rs = find_roots(Polynomial([1, 2, -1]))
    assert RootMultiset.from_json(rs.to_json()) == rs


def test_wilkinson_degree_20_residuals():
    rs = find_roots(Polynomial.from_roots(range(1, 21)))
    assert len(rs) == 20
    real = sorted(z.real for z in rs.roots)
    assert real[0] == pytest.approx(1, abs=1e-9)
    assert real[1] == pytest.approx(2, abs=1e-8)


def test_large_dynamic_range():
    # zeros of g' - alpha g for g = z^2 - 1, alpha = 1e-8
    rs = find_roots(Polynomial([1e-8, 2, -1e-8]))
    got = sorted(rs.roots, key=abs)
    assert got[0] == pytest.approx(-5e-9, rel=1e-12)
    assert got[1] == pytest.approx(2e8, rel=1e-12)


def test_deterministic():
    p = Polynomial([1, -2j, 3, 0.5, 1 + 1j])
    assert find_roots(p) == find_roots(p)


def test_reconstruction_random(rng):
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 9))
        c = random_complex(rng, n + 1)
        rs = find_roots(Polynomial(c))
        rebuilt = np.array(Polynomial.from_roots(rs.roots).coeffs)
        worst = max(worst, float(np.abs(rebuilt - c / c[-1]).max()))
    assert worst <= 1e-8


def _conjugate_mismatch(roots):
    z = np.asarray(roots)
    cost = np.abs(np.subtract.outer(z, z.conj()))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def test_conjugate_symmetry_real_coefficients(rng):
    for _ in range(300):
        n = int(rng.integers(1, 9))
        rs = find_roots(Polynomial(rng.normal(size=n + 1)))
        assert _conjugate_mismatch(rs.roots) <= 1e-8


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False), min_size=1, max_size=8),
    st.integers(0, 3),
)
def test_root_count_and_origin_split(coeffs, k):
    p = Polynomial([0] * k + coeffs)
    if p.is_zero():
        return
    lead_pos = len(p.coeffs) - 1
    if not p.coeffs[k:] or all(c == 0 for c in p.coeffs[k:]):
        return
    q0 = next(c for c in p.coeffs if c != 0)
    zeros_at_origin = p.coeffs.index(q0)
    try:
        rs = find_roots(p)
    except RootFindingError as exc:
        # only acceptable when some root cannot be represented in double precision
        assert "beyond double precision range" in str(exc)
        assert max(abs(c) for c in p.coeffs) / abs(p.lead) > 1e300
        return
    assert len(rs) == lead_pos
    assert sum(1 for z in rs.roots[:zeros_at_origin] if z == 0) == zeros_at_origin


def test_multiple_roots_resolved_to_full_precision():
    p = Polynomial.from_roots([1, 1, -2, 0.5j, 0.5j, 0.5j])
    got = find_roots(p).roots
    for z in (1, -2, 0.5j):
        assert min(abs(z - w) for w in got) <= 1e-13
    # a genuinely split pair stays split; its conditioning is about eps / 1e-7
    q = Polynomial.from_roots([1, 1 + 1e-7])
    a, b = sorted(z.real for z in find_roots(q).roots)
    assert [a, b] == pytest.approx([1, 1 + 1e-7], abs=1e-8)
    assert b - a > 5e-8


def test_root_beyond_double_range_is_reported():
    with pytest.raises(RootFindingError, match="beyond double precision range"):
        find_roots(Polynomial([1 + 1j, 2.225073858507e-311]))
    # huge but representable roots are still found
    rs = find_roots(Polynomial([0, 1, 0, 0, 1, 8.3e-129]))
    assert max(abs(z) for z in rs.roots) == pytest.approx(1.2e128, rel=0.1)
