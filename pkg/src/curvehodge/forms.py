"""Test-form battery: bumps, bumped monomials, adjoint conjugates, dbar's.

Every generator returns objects carrying both sampled values and an
evaluator over arbitrary curve points, so the singular quadrature can
refine under them.  Derivatives are closed-form (quintic smoothstep
profiles), never finite differences.

Bumped generators are supported in a region-A disk well inside the chart
switch radius, which keeps their region-B representation identically zero
and all homogeneity lifts trivial.
"""

from __future__ import annotations

import numpy as np

from .curve_model import CurveFormSamples, chart_point_data

__all__ = [
    "smoothstep",
    "ChartFunction",
    "bump_function",
    "dbar_of",
    "bumped_monomial_form",
    "adjoint_conjugate_form",
    "battery",
]


def smoothstep(x):
    """C^2 quintic step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(np.real(x), 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x**2)


def smoothstep_d(x):
    """Derivative of :func:`smoothstep` w.r.t. its real argument."""
    xr = np.real(x)
    inside = (xr > 0.0) & (xr < 1.0)
    x = np.clip(xr, 0.0, 1.0)
    return np.where(inside, 30.0 * x**2 * (1.0 - x) ** 2, 0.0)


class ChartFunction:
    """Scalar function on the curve with closed-form Wirtinger data.

    ``value(chart, w1, w2)`` and the four partials d/dw1bar, d/dw2bar,
    d/dw1, d/dw2 are supplied as callables over region-A coordinates only;
    the function must vanish for region-B points (compact support in the
    region-A chart).
    """

    def __init__(self, value_A, dbar1_A, dbar2_A, d1_A=None, d2_A=None):
        self._value = value_A
        self._dbar1 = dbar1_A
        self._dbar2 = dbar2_A
        self._d1 = d1_A
        self._d2 = d2_A

    def value(self, chart, w1, w2):
        chart = np.asarray(chart)
        w1 = np.asarray(w1, dtype=complex)
        w2 = np.asarray(w2, dtype=complex)
        out = np.zeros(np.broadcast(chart, w1, w2).shape, dtype=complex)
        m = chart == 0
        if np.any(m):
            out = np.where(m, self._value(w1, w2), out)
        return out

    def dbar_form_evaluator(self, model):
        """Evaluator of the (0,1)-form dbar(g) in chart-frame coefficients.

        On the curve, with eta' the sheet slope, the dwbar1-coefficient is
        dg/dw1bar + dg/dw2bar * conj(eta').
        """

        def ev(chart, w1, w2):
            chart = np.asarray(chart)
            w1 = np.atleast_1d(np.asarray(w1, dtype=complex))
            w2 = np.atleast_1d(np.asarray(w2, dtype=complex))
            out = np.zeros(w1.shape, dtype=complex)
            m = np.broadcast_to(np.atleast_1d(chart), w1.shape) == 0
            if np.any(m):
                data = chart_point_data(model, 0, w1[m], w2[m])
                vals = self._dbar1(w1[m], w2[m]) + self._dbar2(w1[m], w2[m]) * np.conj(
                    data["eta_prime"]
                )
                out[m] = vals
            return out

        return ev


def bump_function(center, radius, fiber_center=None, fiber_radius=None, inner=0.4):
    """Smooth bump in the base disk |w1 - center| < radius, equal to 1 on
    the inner fraction; optionally windowed around one sheet's fiber value."""
    c = complex(center)
    R2o = radius**2
    R2i = (inner * radius) ** 2

    def base_arg(w1):
        return (R2o - np.abs(w1 - c) ** 2) / (R2o - R2i)

    if fiber_center is None:

        def value(w1, w2):
            return smoothstep(base_arg(w1))

        def dbar1(w1, w2):
            return smoothstep_d(base_arg(w1)) * (-(w1 - c)) / (R2o - R2i)

        def dbar2(w1, w2):
            return np.zeros_like(w1)

        def d1(w1, w2):
            return smoothstep_d(base_arg(w1)) * (-np.conj(w1 - c)) / (R2o - R2i)

        def d2(w1, w2):
            return np.zeros_like(w1)

    else:
        fc = complex(fiber_center)
        f2o = fiber_radius**2
        f2i = (inner * fiber_radius) ** 2

        def fiber_arg(w2):
            return (f2o - np.abs(w2 - fc) ** 2) / (f2o - f2i)

        def value(w1, w2):
            return smoothstep(base_arg(w1)) * smoothstep(fiber_arg(w2))

        def dbar1(w1, w2):
            return (
                smoothstep_d(base_arg(w1))
                * (-(w1 - c))
                / (R2o - R2i)
                * smoothstep(fiber_arg(w2))
            )

        def dbar2(w1, w2):
            return (
                smoothstep(base_arg(w1))
                * smoothstep_d(fiber_arg(w2))
                * (-(w2 - fc))
                / (f2o - f2i)
            )

        def d1(w1, w2):
            return (
                smoothstep_d(base_arg(w1))
                * (-np.conj(w1 - c))
                / (R2o - R2i)
                * smoothstep(fiber_arg(w2))
            )

        def d2(w1, w2):
            return (
                smoothstep(base_arg(w1))
                * smoothstep_d(fiber_arg(w2))
                * (-np.conj(w2 - fc))
                / (f2o - f2i)
            )

    return ChartFunction(value, dbar1, dbar2, d1, d2)


def dbar_of(model, fn, ell=0):
    """The (0,1)-form dbar(g) of a compactly supported chart function."""
    ev = fn.dbar_form_evaluator(model)
    return CurveFormSamples.from_evaluator(model, ev, ell=ell, role="form01")


def bumped_monomial_form(model, exps, bump, ell=0):
    """phi = w1^a conj(w1)^b w2^c conj(w2)^e * bump * dwbar1.

    A smooth compactly supported (0,1)-form; closed automatically on the
    curve, generically not exact.
    """
    a, b, c, e = exps

    def ev(chart, w1, w2):
        chart = np.asarray(chart)
        w1 = np.asarray(w1, dtype=complex)
        w2 = np.asarray(w2, dtype=complex)
        mono = w1**a * np.conj(w1) ** b * w2**c * np.conj(w2) ** e
        vals = mono * bump.value(chart, w1, w2)
        return np.where(np.broadcast_to(np.atleast_1d(chart), vals.shape) == 0, vals, 0.0)

    return CurveFormSamples.from_evaluator(model, ev, ell=ell, role="form01")


def adjoint_conjugate_form(model, q_coeffs, ell=0):
    """Conjugate of the adjoint differential q(w) dw1/(dF/dw2) as a
    homogeneity-0 (0,1)-form (chart coefficient = conj of the adjoint's)."""
    d = model.degree
    top = d - 3

    def numerator(zeta_unit, rho, sign):
        z0, z1, z2 = zeta_unit[..., 0], zeta_unit[..., 1], zeta_unit[..., 2]
        out = np.zeros(z0.shape, dtype=complex)
        for (a, b), cc in sorted(q_coeffs.items()):
            out += cc * z0 ** (top - a - b) * z1**a * z2**b
        return sign * out * rho ** (3 - d)

    def ev(chart, w1, w2):
        data = chart_point_data(model, chart, w1, w2)
        num = numerator(data["zeta"], data["rho"], data["sign"])
        return np.conj(num * data["leray"])

    return CurveFormSamples.from_evaluator(model, ev, ell=ell, role="form01")


def battery(model, kind="default", seed=0):
    """A small named family of test forms on the given curve."""
    rng = np.random.default_rng(seed)
    forms = []
    b1 = bump_function(0.45 + 0.1j, 0.33)
    b2 = bump_function(-0.3 + 0.42j, 0.3)
    b3 = bump_function(0.1 - 0.5j, 0.35)
    forms.append(("dbar_bump_1", dbar_of(model, b1)))
    forms.append(("dbar_bump_2", dbar_of(model, b2)))
    forms.append(("mono_bump_1", bumped_monomial_form(model, (0, 1, 0, 0), b1)))
    forms.append(("mono_bump_2", bumped_monomial_form(model, (1, 0, 0, 1), b3)))
    if model.degree >= 3:
        forms.append(("adjoint_bar_1", adjoint_conjugate_form(model, {(0, 0): 1.0})))
    return forms
