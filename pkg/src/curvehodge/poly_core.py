"""Homogeneous polynomials on C^3: evaluation, chart forms, Hefer splitting.

Everything downstream (curve geometry, integral kernels) consumes the three
objects defined here:

* ``HomogeneousPolynomial``: a degree-d form P in (z0, z1, z2),
* ``AffinePolynomial``: the chart representative F = P / z_alpha^d,
* ``HeferMatrix``: bivariate polynomials Q^0, Q^1, Q^2 with

      P(zeta) - P(z) = sum_i Q^i(zeta, z) * (zeta_i - z_i),

  each Q^i jointly homogeneous of degree d - 1 in (zeta, z).

Coefficients are complex doubles.  Multi-indices are kept lexicographically
sorted so that serialization, hashing and iteration order are reproducible.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = [
    "HomogeneousPolynomial",
    "AffinePolynomial",
    "BiHomogeneousPolynomial",
    "HeferMatrix",
    "evaluate_and_gradient",
    "dehomogenize",
    "rehomogenize",
    "hefer_decompose",
    "random_homogeneous",
]


def _as_complex(x):
    return complex(x)


class HomogeneousPolynomial:
    """Complex form of degree ``d`` in three variables, stored monomial-wise."""

    def __init__(self, degree, coeffs):
        """``coeffs`` maps exponent triples (i, j, k) with i+j+k == degree to
        complex scalars.  Zero coefficients are dropped; at least one entry
        must survive."""
        self.degree = int(degree)
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        clean = {}
        for key, val in coeffs.items():
            i, j, k = (int(key[0]), int(key[1]), int(key[2]))
            if i < 0 or j < 0 or k < 0 or i + j + k != self.degree:
                raise ValueError(f"multi-index {key} does not sum to degree {self.degree}")
            c = _as_complex(val)
            if c != 0:
                clean[(i, j, k)] = clean.get((i, j, k), 0j) + c
        clean = {k: v for k, v in clean.items() if v != 0}
        if not clean:
            raise ValueError("polynomial has no nonzero coefficient")
        self.coeffs = dict(sorted(clean.items()))
        self._exps = np.array(list(self.coeffs.keys()), dtype=np.int64)
        self._vals = np.array(list(self.coeffs.values()), dtype=np.complex128)

    @classmethod
    def from_records(cls, records):
        """Build from serialized rows ``[i, j, k, re, im]``."""
        coeffs = {}
        for i, j, k, re, im in records:
            coeffs[(int(i), int(j), int(k))] = coeffs.get((int(i), int(j), int(k)), 0j) + complex(re, im)
        degree = max(i + j + k for (i, j, k) in coeffs)
        return cls(degree, coeffs)

    def to_records(self):
        return [[i, j, k, v.real, v.imag] for (i, j, k), v in self.coeffs.items()]

    def evaluate(self, z0, z1, z2):
        """Evaluate P at a point or at broadcastable numpy arrays."""
        z0 = np.asarray(z0, dtype=np.complex128)
        z1 = np.asarray(z1, dtype=np.complex128)
        z2 = np.asarray(z2, dtype=np.complex128)
        out = np.zeros(np.broadcast(z0, z1, z2).shape, dtype=np.complex128)
        for (i, j, k), c in self.coeffs.items():
            out += c * z0**i * z1**j * z2**k
        if out.shape == ():
            return complex(out)
        return out

    def gradient(self, z0, z1, z2):
        """Gradient of P, exact monomial-wise differentiation."""
        z0 = np.asarray(z0, dtype=np.complex128)
        z1 = np.asarray(z1, dtype=np.complex128)
        z2 = np.asarray(z2, dtype=np.complex128)
        shape = np.broadcast(z0, z1, z2).shape
        g = [np.zeros(shape, dtype=np.complex128) for _ in range(3)]
        for (i, j, k), c in self.coeffs.items():
            if i:
                g[0] += c * i * z0 ** (i - 1) * z1**j * z2**k
            if j:
                g[1] += c * j * z0**i * z1 ** (j - 1) * z2**k
            if k:
                g[2] += c * k * z0**i * z1**j * z2 ** (k - 1)
        if shape == ():
            return (complex(g[0]), complex(g[1]), complex(g[2]))
        return tuple(g)

    def infinity_form_coeffs(self):
        """Coefficients of the binary form P(0, z1, z2) as numpy array in
        descending powers of z2 (index m holds the z1^(d-m) z2^m term)."""
        out = np.zeros(self.degree + 1, dtype=np.complex128)
        for (i, j, k), c in self.coeffs.items():
            if i == 0:
                out[k] += c
        return out

    def curve_hash(self):
        """Stable hash of the coefficient table, used as calibration key."""
        payload = ";".join(
            f"{i},{j},{k},{v.real:.17g},{v.imag:.17g}" for (i, j, k), v in self.coeffs.items()
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def __repr__(self):
        return f"HomogeneousPolynomial(degree={self.degree}, terms={len(self.coeffs)})"


class AffinePolynomial:
    """Chart form F(w1, w2) = P(z) / z_alpha^d on the chart z_alpha != 0.

    The chart variables are the two non-alpha coordinates divided by
    z_alpha, kept in increasing index order (chart 0 -> (z1/z0, z2/z0),
    chart 1 -> (z0/z1, z2/z1), chart 2 -> (z0/z2, z1/z2)).
    """

    def __init__(self, chart, coeffs, ambient_degree):
        self.chart = int(chart)
        if self.chart not in (0, 1, 2):
            raise ValueError("chart index must be 0, 1 or 2")
        self.ambient_degree = int(ambient_degree)
        clean = {(int(a), int(b)): _as_complex(v) for (a, b), v in coeffs.items() if v != 0}
        if not clean:
            raise ValueError("affine polynomial is identically zero")
        self.coeffs = dict(sorted(clean.items()))
        self.deg2 = max(b for (_, b) in self.coeffs)

    def evaluate(self, w1, w2):
        w1 = np.asarray(w1, dtype=np.complex128)
        w2 = np.asarray(w2, dtype=np.complex128)
        out = np.zeros(np.broadcast(w1, w2).shape, dtype=np.complex128)
        for (a, b), c in self.coeffs.items():
            out += c * w1**a * w2**b
        if out.shape == ():
            return complex(out)
        return out

    def d_w1(self, w1, w2):
        w1 = np.asarray(w1, dtype=np.complex128)
        w2 = np.asarray(w2, dtype=np.complex128)
        out = np.zeros(np.broadcast(w1, w2).shape, dtype=np.complex128)
        for (a, b), c in self.coeffs.items():
            if a:
                out += c * a * w1 ** (a - 1) * w2**b
        if out.shape == ():
            return complex(out)
        return out

    def d_w2(self, w1, w2):
        w1 = np.asarray(w1, dtype=np.complex128)
        w2 = np.asarray(w2, dtype=np.complex128)
        out = np.zeros(np.broadcast(w1, w2).shape, dtype=np.complex128)
        for (a, b), c in self.coeffs.items():
            if b:
                out += c * b * w1**a * w2 ** (b - 1)
        if out.shape == ():
            return complex(out)
        return out

    def fiber_coefficients(self, w1):
        """Coefficients of F(w1, .) in descending powers of w2, one row per
        base point.  Rows feed ``numpy.roots``."""
        w1 = np.atleast_1d(np.asarray(w1, dtype=np.complex128))
        rows = np.zeros((w1.size, self.deg2 + 1), dtype=np.complex128)
        for (a, b), c in self.coeffs.items():
            rows[:, self.deg2 - b] += c * w1**a
        return rows

    def __repr__(self):
        return f"AffinePolynomial(chart={self.chart}, deg2={self.deg2}, terms={len(self.coeffs)})"


class BiHomogeneousPolynomial:
    """Polynomial in (zeta, z), jointly homogeneous; used for Hefer data.

    Monomials are stored as paired exponent triples.  ``graded_by_zeta``
    exposes the split by total zeta-degree that the fiber quadrature of the
    integral kernels consumes.
    """

    def __init__(self, coeffs, joint_degree):
        self.joint_degree = int(joint_degree)
        clean = {}
        for key, val in coeffs.items():
            a = tuple(int(x) for x in key[0])
            b = tuple(int(x) for x in key[1])
            if sum(a) + sum(b) != self.joint_degree:
                raise ValueError("monomial breaks joint homogeneity")
            c = _as_complex(val)
            if c != 0:
                clean[(a, b)] = clean.get((a, b), 0j) + c
        self.coeffs = dict(sorted({k: v for k, v in clean.items() if v != 0}.items()))
        self._grade = {}
        for (a, b), c in self.coeffs.items():
            self._grade.setdefault(sum(a), []).append((a, b, c))

    @property
    def is_zero(self):
        return not self.coeffs

    def evaluate(self, zeta, z):
        """Evaluate at broadcastable triples ``zeta = (z0,z1,z2)`` etc."""
        zs = [np.asarray(c, dtype=np.complex128) for c in zeta]
        ws = [np.asarray(c, dtype=np.complex128) for c in z]
        shape = np.broadcast(*zs, *ws).shape
        out = np.zeros(shape, dtype=np.complex128)
        for (a, b), c in self.coeffs.items():
            term = np.full(shape, c, dtype=np.complex128)
            for v, e in zip(zs, a):
                if e:
                    term = term * v**e
            for v, e in zip(ws, b):
                if e:
                    term = term * v**e
            out += term
        if shape == ():
            return complex(out)
        return out

    def graded_by_zeta(self):
        """Map zeta-degree s -> list of (zeta_exps, z_exps, coeff)."""
        return self._grade

    def zeta_degrees(self):
        return sorted(self._grade.keys())


class HeferMatrix:
    """The triple Q^0, Q^1, Q^2 produced by telescoping division of P."""

    def __init__(self, source, qs):
        self.source = source
        self.qs = tuple(qs)

    def evaluate(self, zeta, z):
        """Values (Q^0, Q^1, Q^2) at broadcastable point triples."""
        return tuple(q.evaluate(zeta, z) for q in self.qs)

    def identity_residual(self, zeta, z):
        """| sum Q^i (zeta_i - z_i) - (P(zeta) - P(z)) |, the defining check."""
        q0, q1, q2 = self.evaluate(zeta, z)
        lhs = q0 * (zeta[0] - z[0]) + q1 * (zeta[1] - z[1]) + q2 * (zeta[2] - z[2])
        rhs = self.source.evaluate(*zeta) - self.source.evaluate(*z)
        return np.abs(lhs - rhs)


def evaluate_and_gradient(poly, point):
    """Value and gradient of ``poly`` at one complex triple."""
    z0, z1, z2 = point
    return poly.evaluate(z0, z1, z2), poly.gradient(z0, z1, z2)


def dehomogenize(poly, alpha):
    """Chart form F^(alpha)(w) = P(z) / z_alpha^d on z_alpha != 0."""
    if alpha not in (0, 1, 2):
        raise ValueError("chart index must be 0, 1 or 2")
    others = [i for i in range(3) if i != alpha]
    coeffs = {}
    for exps, c in poly.coeffs.items():
        a = exps[others[0]]
        b = exps[others[1]]
        coeffs[(a, b)] = coeffs.get((a, b), 0j) + c
    return AffinePolynomial(alpha, coeffs, poly.degree)


def rehomogenize(affine, degree=None):
    """Inverse of :func:`dehomogenize` (fills z_alpha powers back in)."""
    d = affine.ambient_degree if degree is None else int(degree)
    alpha = affine.chart
    others = [i for i in range(3) if i != alpha]
    coeffs = {}
    for (a, b), c in affine.coeffs.items():
        exps = [0, 0, 0]
        exps[others[0]] = a
        exps[others[1]] = b
        exps[alpha] = d - a - b
        if exps[alpha] < 0:
            raise ValueError("affine degree exceeds ambient degree")
        coeffs[tuple(exps)] = coeffs.get(tuple(exps), 0j) + c
    return HomogeneousPolynomial(d, coeffs)


def hefer_decompose(poly):
    """Telescoping Hefer splitting of ``poly``.

    Q^i collects, monomial by monomial, the exact univariate division

        [P(z_<i, zeta_i, zeta_>i) - P(z_<=i, zeta_>i)] / (zeta_i - z_i),

    with the variable order fixed to 0, 1, 2 so output is deterministic.
    """
    d = poly.degree
    if d < 1:
        raise ValueError("degree-0 polynomial admits no Hefer splitting")
    qs = [{}, {}, {}]

    def add(slot, zeta_exp, z_exp, c):
        key = (tuple(zeta_exp), tuple(z_exp))
        qs[slot][key] = qs[slot].get(key, 0j) + c

    for (i, j, k), c in poly.coeffs.items():
        # zeta_0 slot: (zeta0^i - z0^i)/(zeta0 - z0) * zeta1^j zeta2^k
        for a in range(i):
            add(0, (i - 1 - a, j, k), (a, 0, 0), c)
        # zeta_1 slot: z0^i (zeta1^j - z1^j)/(zeta1 - z1) * zeta2^k
        for b in range(j):
            add(1, (0, j - 1 - b, k), (i, b, 0), c)
        # zeta_2 slot: z0^i z1^j (zeta2^k - z2^k)/(zeta2 - z2)
        for e in range(k):
            add(2, (0, 0, k - 1 - e), (i, j, e), c)

    return HeferMatrix(poly, [BiHomogeneousPolynomial(q, d - 1) for q in qs])


def random_homogeneous(degree, rng, scale=1.0):
    """Dense random form of the given degree (test helper)."""
    coeffs = {}
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            k = degree - i - j
            coeffs[(i, j, k)] = scale * complex(rng.standard_normal(), rng.standard_normal())
    return HomogeneousPolynomial(degree, coeffs)
