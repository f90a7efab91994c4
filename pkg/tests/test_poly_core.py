import numpy as np
import pytest

from curvehodge.poly_core import (
    HomogeneousPolynomial,
    dehomogenize,
    evaluate_and_gradient,
    hefer_decompose,
    random_homogeneous,
    rehomogenize,
)


def rand_triple(rng, scale=1.0):
    return tuple(scale * complex(rng.standard_normal(), rng.standard_normal()) for _ in range(3))


def test_product_monomial_value_and_gradient():
    p = HomogeneousPolynomial(3, {(1, 1, 1): 1.0})
    val, grad = evaluate_and_gradient(p, (1.0, 2.0, 3.0))
    assert val == pytest.approx(6.0)
    assert grad == (pytest.approx(6.0), pytest.approx(3.0), pytest.approx(2.0))


def test_fermat_cubic_gradient_at_vertex():
    p = HomogeneousPolynomial(3, {(3, 0, 0): 1.0, (0, 3, 0): 1.0, (0, 0, 3): 1.0})
    val, grad = evaluate_and_gradient(p, (1.0, 0.0, 0.0))
    assert val == pytest.approx(1.0)
    assert grad == (pytest.approx(3.0), pytest.approx(0.0), pytest.approx(0.0))


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(7)
    p = random_homogeneous(3, rng)
    z = rand_triple(rng)
    _, grad = evaluate_and_gradient(p, z)
    h = 1e-5
    for axis in range(3):
        e = [0, 0, 0]
        e[axis] = 1
        zp = tuple(z[i] + h * e[i] for i in range(3))
        zm = tuple(z[i] - h * e[i] for i in range(3))
        fd = (p.evaluate(*zp) - p.evaluate(*zm)) / (2 * h)
        assert abs(fd - grad[axis]) < 1e-7 * (1 + abs(grad[axis]))


def test_dehomogenize_nodal_cubic_chart0():
    # z0 z2^2 - z1^3 - z0 z1^2 -> w2^2 - w1^3 - w1^2
    p = HomogeneousPolynomial(3, {(1, 0, 2): 1.0, (0, 3, 0): -1.0, (1, 2, 0): -1.0})
    f = dehomogenize(p, 0)
    assert f.coeffs == {(0, 2): 1.0 + 0j, (3, 0): -1.0 + 0j, (2, 0): -1.0 + 0j}


def test_dehomogenize_coordinate_form_is_constant_one():
    p = HomogeneousPolynomial(1, {(1, 0, 0): 1.0})
    f = dehomogenize(p, 0)
    assert f.coeffs == {(0, 0): 1.0 + 0j}


def test_chart_transition_identity_random_quartic():
    rng = np.random.default_rng(11)
    p = random_homogeneous(4, rng)
    f0 = dehomogenize(p, 0)
    f1 = dehomogenize(p, 1)
    for _ in range(20):
        z = rand_triple(rng)
        if abs(z[0]) < 0.3 or abs(z[1]) < 0.3:
            continue
        w = (z[1] / z[0], z[2] / z[0])
        v = (z[0] / z[1], z[2] / z[1])
        lhs = f0.evaluate(*w)
        rhs = (z[1] / z[0]) ** 4 * f1.evaluate(*v)
        assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs) + abs(rhs))


def test_dehomogenize_rehomogenize_round_trip():
    rng = np.random.default_rng(3)
    p = random_homogeneous(5, rng)
    for chart in (0, 1, 2):
        q = rehomogenize(dehomogenize(p, chart))
        assert q.coeffs.keys() == p.coeffs.keys()
        for key in p.coeffs:
            assert q.coeffs[key] == pytest.approx(p.coeffs[key])


def test_hefer_coordinate_form():
    p = HomogeneousPolynomial(1, {(1, 0, 0): 1.0})
    h = hefer_decompose(p)
    q0, q1, q2 = h.evaluate((1.0, 2.0, 3.0), (4.0, 5.0, 6.0))
    assert q0 == pytest.approx(1.0)
    assert q1 == pytest.approx(0.0)
    assert q2 == pytest.approx(0.0)


def test_hefer_square_is_symmetric_sum():
    p = HomogeneousPolynomial(2, {(0, 2, 0): 1.0})
    h = hefer_decompose(p)
    rng = np.random.default_rng(5)
    zeta, z = rand_triple(rng), rand_triple(rng)
    q0, q1, q2 = h.evaluate(zeta, z)
    assert abs(q1 - (zeta[1] + z[1])) < 1e-14
    assert q0 == 0 and q2 == 0


def test_hefer_fermat_cubic_closed_form():
    p = HomogeneousPolynomial(3, {(3, 0, 0): 1.0, (0, 3, 0): 1.0, (0, 0, 3): 1.0})
    h = hefer_decompose(p)
    rng = np.random.default_rng(13)
    for _ in range(100):
        zeta, z = rand_triple(rng), rand_triple(rng)
        qs = h.evaluate(zeta, z)
        for axis in range(3):
            expected = zeta[axis] ** 2 + zeta[axis] * z[axis] + z[axis] ** 2
            assert abs(qs[axis] - expected) <= 1e-12 * (1 + abs(expected))


@pytest.mark.parametrize("degree", [1, 2, 3, 4, 5])
def test_hefer_identity_random(degree):
    rng = np.random.default_rng(100 + degree)
    p = random_homogeneous(degree, rng)
    h = hefer_decompose(p)
    zeta = tuple(rng.standard_normal(200) + 1j * rng.standard_normal(200) for _ in range(3))
    z = tuple(rng.standard_normal(200) + 1j * rng.standard_normal(200) for _ in range(3))
    res = h.identity_residual(zeta, z)
    bound = 1e-12 * (1 + np.abs(p.evaluate(*zeta)) + np.abs(p.evaluate(*z)))
    assert np.all(res <= bound)


def test_hefer_homogeneity_unit_circle():
    rng = np.random.default_rng(17)
    p = random_homogeneous(4, rng)
    h = hefer_decompose(p)
    zeta, z = rand_triple(rng), rand_triple(rng)
    base = h.evaluate(zeta, z)
    for _ in range(10):
        lam = np.exp(2j * np.pi * rng.random())
        scaled = h.evaluate(tuple(lam * c for c in zeta), tuple(lam * c for c in z))
        for a, b in zip(scaled, base):
            assert abs(a - lam ** (p.degree - 1) * b) <= 1e-12 * (1 + abs(b))


def test_hefer_rejects_degree_zero():
    p = HomogeneousPolynomial(0, {(0, 0, 0): 2.0})
    with pytest.raises(ValueError):
        hefer_decompose(p)


def test_records_round_trip():
    rng = np.random.default_rng(23)
    p = random_homogeneous(3, rng)
    q = HomogeneousPolynomial.from_records(p.to_records())
    assert q.coeffs == p.coeffs
    assert q.curve_hash() == p.curve_hash()


def test_invalid_multi_index_rejected():
    with pytest.raises(ValueError):
        HomogeneousPolynomial(2, {(1, 0, 0): 1.0})
    with pytest.raises(ValueError):
        HomogeneousPolynomial(2, {(2, 0, 0): 0.0})
