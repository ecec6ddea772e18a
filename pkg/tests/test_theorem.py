import cmath
import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from takagi.poly import Polynomial, derivative, differential_compose, origin_multiplicity
from takagi.region import contains, convex_hull, hausdorff_distance, signed_distance
from takagi.roots import find_roots
from takagi.theorem import (
    TakagiInstance,
    analyze,
    build_region,
    certificate,
    containment_tol,
    factor_operator,
    log_derivative_residual,
    quadratic_closed_form,
)

from conftest import random_complex

SQRT2 = math.sqrt(2)


def same_vertices(region, expected, tol=1e-12):
    got = list(region.vertices)
    return len(got) == len(expected) and all(min(abs(g - e) for g in got) <= tol for e in expected)


# ---------------------------------------------------------- factor_operator


def test_factor_pure_derivative():
    lead, r, alphas = factor_operator(Polynomial([0, 1]))
    assert (lead, r, len(alphas)) == (1, 1, 0)


def test_factor_linear():
    lead, r, alphas = factor_operator(Polynomial([-1, 1]))
    assert (lead, r) == (1, 0)
    assert list(alphas) == [pytest.approx(1, abs=1e-15)]


def test_factor_with_origin_zero():
    f = Polynomial([0, 0, -2, 2])
    lead, r, alphas = factor_operator(f)
    assert (lead, r) == (2, 2)
    assert list(alphas) == [pytest.approx(1, abs=1e-15)]
    rebuilt = Polynomial.from_roots([0] * r + list(alphas), lead)
    assert max(abs(a - b) for a, b in zip(rebuilt.coeffs, f.coeffs)) <= 1e-14


def test_factor_order_is_modulus_then_argument():
    _, _, alphas = factor_operator(Polynomial.from_roots([2j, -1, 1, 0.5]))
    zs = list(alphas)
    keys = [(abs(z), cmath.phase(z)) for z in zs]
    assert keys == sorted(keys)
    assert abs(zs[0] - 0.5) < 1e-12


def test_factor_count_matches_degree(rng):
    for _ in range(50):
        deg = int(rng.integers(1, 6))
        f = Polynomial([complex(c) for c in random_complex(rng, deg + 1)])
        _, r, alphas = factor_operator(f)
        assert r + len(alphas) == f.degree()


# ------------------------------------------------------------- build_region


def test_region_single_factor_segment():
    r = build_region(Polynomial([-1, 0, 1]), 0, [1])
    assert r.kind == "segment" and same_vertices(r, [-1, 3])


def test_region_gauss_lucas_triangle():
    r = build_region(Polynomial([-1, 0, 0, 1]), 1, [])
    cube = [cmath.exp(2j * math.pi * k / 3) for k in range(3)]
    assert r.kind == "polygon" and same_vertices(r, cube, tol=1e-12)


def test_region_imaginary_alpha_rectangle():
    r = build_region(Polynomial([-1, 0, 1]), 0, [1j])
    assert r.kind == "polygon"
    assert same_vertices(r, [-1, 1, 1 - 2j, -1 - 2j])


def test_region_errors():
    with pytest.raises(ValueError):
        build_region(Polynomial([]), 0, [1])
    with pytest.raises(ValueError):
        build_region(Polynomial([0, 1]), 2, [])


def test_region_factor_order_independent(rng):
    for _ in range(30):
        g = Polynomial.from_roots([complex(z) for z in random_complex(rng, 5)])
        alphas = [complex(a) for a in random_complex(rng, 4)]
        ref = build_region(g, 1, alphas)
        for perm in itertools.islice(itertools.permutations(alphas), 1, 6):
            assert hausdorff_distance(ref, build_region(g, 1, perm)) <= 1e-9 * ref.diameter()


# ----------------------------------------------------------------- analyze


def test_analyze_quadratic_instance():
    ti = analyze(Polynomial([-1, 1]), Polynomial([-1, 0, 1]))
    zs = sorted(z.real for z in ti.h_zeros.roots)
    assert zs == pytest.approx([1 - SQRT2, 1 + SQRT2], abs=1e-14)
    assert ti.region.kind == "segment" and same_vertices(ti.region, [-1, 3])
    assert ti.contained
    assert all(m <= 0 for m in ti.margins)


def test_analyze_identically_zero():
    ti = analyze(Polynomial([0, 0, 0, 1]), Polynomial([0, 0, 1]))
    assert ti.identically_zero
    assert ti.h.is_zero()
    assert ti.h_zeros is None and ti.contained


def test_analyze_monomial_point_region():
    ti = analyze(Polynomial([0, 0, 1]), Polynomial([0, 0, 0, 0, 1]))
    assert ti.h.coeffs == (0, 0, 12)
    assert ti.region.kind == "point" and ti.region.vertices == (0j,)
    assert len(ti.h_zeros) == 2 and all(z == 0 for z in ti.h_zeros.roots)
    assert ti.contained


def test_analyze_shrunk_region_reports_violation():
    ti = analyze(Polynomial([-1, 1]), Polynomial([-1, 0, 1]), shrink_region=0.5)
    assert not ti.contained
    assert ti.violations


def test_analyze_json_round_trip():
    ti = analyze(Polynomial([2, -1j, 1]), Polynomial.from_roots([1, 1j, -0.5, 0.25 - 1j]))
    again = TakagiInstance.from_json(ti.to_json())
    assert again == ti


def test_gauss_lucas_specialization(rng):
    for k_trial in range(100):
        n = int(rng.integers(1, 9))
        g = Polynomial.from_roots([complex(z) for z in random_complex(rng, n)])
        k = int(rng.integers(1, n + 1))
        f = Polynomial.monomial(k)
        assert build_region(g, k, []) == convex_hull(find_roots(g).roots)
        ti = analyze(f, g)
        if n == k:
            continue
        assert ti.region == ti.hull
        tol = 1e-8 * (1 + ti.hull.diameter())
        assert all(contains(ti.hull, z, tol) for z in ti.h_zeros.roots)


def test_h_zero_characterization(rng):
    for _ in range(200):
        n = int(rng.integers(0, 7))
        r = int(rng.integers(0, 5))
        g = Polynomial([complex(c) for c in random_complex(rng, n + 1)])
        f = Polynomial([0] * r + [complex(c) for c in random_complex(rng, 2)])
        assert origin_multiplicity(f) == r
        assert differential_compose(f, g).is_zero() == (n < r)


# ------------------------------------------------------------- certificate


def test_certificate_at_quadratic_zero():
    c = certificate(1 + SQRT2, [1, -1], 1)
    assert c.lambdas == pytest.approx((0.853553, 0.146447), abs=1e-6)
    assert c.kappa == pytest.approx(1.707107, abs=1e-6)
    assert c.reconstruction == pytest.approx(1 + SQRT2, abs=1e-14)
    assert c.reconstruction == pytest.approx(2.414214, abs=1e-6)
    assert c.schwarz_bound == 2 and c.kappa <= c.schwarz_bound


def test_certificate_at_critical_point():
    c = certificate(0, [1, -1], 0)
    assert c.lambdas == (0.5, 0.5)
    assert c.reconstruction == 0
    assert c.schwarz_bound is None


def test_certificate_off_zero():
    c = certificate(2, [1, -1], 0.3 - 2j)
    assert c.lambdas == pytest.approx((0.9, 0.1), abs=1e-15)
    assert c.kappa == pytest.approx(0.9, abs=1e-15)


def test_certificate_errors():
    with pytest.raises(ValueError):
        certificate(1, [1, -1], 1)
    with pytest.raises(ValueError):
        certificate(1, [], 1)


def test_certificate_soundness(rng):
    for _ in range(200):
        n = int(rng.integers(1, 8))
        betas = [complex(z) for z in random_complex(rng, n)]
        alpha = complex(random_complex(rng, 1)[0])
        g = Polynomial.from_roots(betas)
        h = differential_compose(Polynomial([-alpha, 1]), g)
        for z in find_roots(h).roots:
            if min(abs(z - b) for b in betas) <= 1e-6:
                continue
            c = certificate(z, betas, alpha)
            assert all(l > 0 for l in c.lambdas)
            assert abs(math.fsum(c.lambdas) - 1) <= 1e-12
            assert abs(c.reconstruction - z) <= 1e-7 * (1 + abs(z))
            assert c.kappa <= c.schwarz_bound * (1 + 1e-9)


# ------------------------------------------------------ log-derivative form


def test_log_derivative_examples():
    assert log_derivative_residual(1 + SQRT2, [1, -1], 1) <= 1e-12
    assert log_derivative_residual(0, [1, -1], 0) == 0
    assert log_derivative_residual(2, [1, -1], 0) == pytest.approx(4 / 3, abs=1e-15)
    with pytest.raises(ValueError):
        log_derivative_residual(-1, [1, -1], 0)


# ---------------------------------------------------------- closed form


def test_closed_form_examples():
    near, far = quadratic_closed_form(1, 1)
    assert near == pytest.approx(1 - SQRT2, abs=1e-15)
    assert far == pytest.approx(1 + SQRT2, abs=1e-15)
    near, far = quadratic_closed_form(0.01, 1)
    assert near == pytest.approx(-0.005000, abs=1e-6)
    assert far == pytest.approx(200.005, abs=1e-3)
    near, far = quadratic_closed_form(2, 0)
    assert near == pytest.approx(0, abs=1e-15)
    assert far == pytest.approx(1, abs=1e-15)
    with pytest.raises(ValueError):
        quadratic_closed_form(0, 1)


def test_closed_form_matches_root_finder():
    for alpha in (1, -1, 1j, -1j, 0.5, 0.01):
        for beta in (1, 2j):
            h = differential_compose(Polynomial([-alpha, 1]), Polynomial([-beta * beta, 0, 1]))
            expected = quadratic_closed_form(alpha, beta)
            got = list(find_roots(h).roots)
            for z in expected:
                assert min(abs(z - w) for w in got) <= 1e-10 * (1 + abs(z))


@settings(max_examples=200, deadline=None)
@given(
    st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=1e2, allow_nan=False, allow_infinity=False),
)
def test_closed_form_labels_by_distance(alpha, beta):
    near, far = quadratic_closed_form(alpha, beta)
    k = convex_hull([beta, -beta])
    assert max(signed_distance(k, near), 0) <= max(signed_distance(k, far), 0)
    # both are zeros of g' - alpha g = 2z - alpha (z^2 - beta^2)
    for z in (near, far):
        scale = 2 * abs(z) + abs(alpha) * (abs(z) ** 2 + abs(beta) ** 2)
        assert abs(2 * z - alpha * (z * z - beta * beta)) <= 1e-12 * scale + 1e-300


def test_containment_tolerance_scale():
    r = convex_hull([-1, 3])
    assert containment_tol(r, [2, -5j]) == pytest.approx(1e-6 * (4 + 5))
