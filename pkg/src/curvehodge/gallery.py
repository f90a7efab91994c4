"""Stock curves used by calibration, tests and the CLI examples.

Each constructor returns a :class:`PlaneCurveModel` carrying whatever
analytic input data the curve comes with: declared nodes, infinity points,
a rational normalization when one is known in closed form, uniformized
node paths, and local parametrizations at the infinity points.  Nodes and
parametrizations are *inputs* here, later verified by ``validate_curve``.
"""

from __future__ import annotations

import numpy as np

from .curve_model import NodePoint, ParamChart, PlaneCurveModel
from .poly_core import HomogeneousPolynomial

__all__ = [
    "projective_line",
    "parabola_conic",
    "fermat_cubic",
    "nodal_cubic",
    "fermat_quartic",
    "by_name",
]


def projective_line():
    """The line z2 = 0, a copy of CP^1 (single sheet w2 = 0)."""
    poly = HomogeneousPolynomial(1, {(0, 0, 1): 1.0})
    return PlaneCurveModel(
        poly,
        infinity_points=[((0.0, 1.0, 0.0), 1)],
    )


def parabola_conic():
    """The smooth conic z0 z2 = z1^2 (chart-0 graph w2 = w1^2)."""
    poly = HomogeneousPolynomial(2, {(1, 0, 1): 1.0, (0, 2, 0): -1.0})
    return PlaneCurveModel(
        poly,
        infinity_points=[((0.0, 0.0, 1.0), 2)],
    )


def fermat_cubic():
    """z0^3 + z1^3 + z2^3 = 0, smooth of genus 1."""
    poly = HomogeneousPolynomial(3, {(3, 0, 0): 1.0, (0, 3, 0): 1.0, (0, 0, 3): 1.0})
    # infinity points: z1^3 + z2^3 = 0, three simple points [0 : 1 : -omega^k]
    pts = []
    for k in range(3):
        s = -np.exp(2j * np.pi * k / 3)
        norm = np.sqrt(1 + abs(s) ** 2)
        pts.append(((0.0, 1.0 / norm, s / norm), 1))
    infinity_charts = [
        ParamChart(
            to_point=(lambda tau, s=s: (1, tau, _fermat_inf_fiber(tau, s))),
            param_of=(lambda v1, v2: v1),
            radius=0.35,
            label=f"inf{k}",
        )
        for k, (loc, _m) in enumerate(pts)
        for s in [loc[2] / loc[1]]
    ]
    return PlaneCurveModel(poly, infinity_points=pts, infinity_charts=infinity_charts)


def _fermat_inf_fiber(tau, s):
    """Chart-1 fiber v2 over base v1 = tau near the branch through v2 = s."""
    tau = np.asarray(tau, dtype=complex)
    # v1^3 + 1 + v2^3 = 0; track the cube root continuing s at tau = 0
    target = -(1.0 + tau**3)
    v2 = s * (target / target * (np.abs(target)) ** (1 / 3)) * np.exp(
        1j * np.angle(target) / 3
    ) / np.exp(1j * np.angle(-1.0 + 0j) / 3)
    # s is itself a cube root of -1, so rescale exactly
    v2 = s * (target / (-1.0)) ** (1.0 / 3.0)
    return v2


class _NodalCubicNormalization:
    """Rational parametrization w1 = t^2 - 1, w2 = t (t^2 - 1) of the
    nodal cubic; t is a global coordinate on the normalization CP^1."""

    node_params = (1.0, -1.0)  # t at the two node preimages p1, p2

    def point(self, t):
        t = np.asarray(t, dtype=complex)
        w1 = t**2 - 1.0
        return w1, t * w1

    def param_of(self, w1, w2):
        """Inverse map; off the node w1 = w2 = 0 it is t = w2 / w1."""
        w1 = np.asarray(w1, dtype=complex)
        w2 = np.asarray(w2, dtype=complex)
        small = np.abs(w1) < 1e-13
        t = np.where(small, np.nan, w2 / np.where(small, 1.0, w1))
        return t

    def jacobian(self, t):
        """dw1/dt along the curve."""
        t = np.asarray(t, dtype=complex)
        return 2.0 * t


def nodal_cubic():
    """z0 z2^2 - z1^3 - z0 z1^2 = 0: one node at [1:0:0], genus 0.

    Chart 0 form: w2^2 - w1^3 - w1^2.  The triple infinity point [0:0:1]
    is a smooth curve point with contact of order three with the line at
    infinity; near it the curve is the chart-2 graph u0 = u1^3 / (1 + u1^2).
    """
    poly = HomogeneousPolynomial(
        3, {(1, 0, 2): 1.0, (0, 3, 0): -1.0, (1, 2, 0): -1.0}
    )
    node = NodePoint(
        location=(1.0, 0.0, 0.0),
        chart=0,
        base=0.0 + 0j,
        fiber=0.0 + 0j,
        tangents=((1.0, -1.0), (1.0, 1.0)),
    )
    norm_map = _NodalCubicNormalization()
    # node path: t runs from +1 (p1) to -1 (p2) on the normalization; the
    # normalization coordinate t itself uniformizes a tube around the path.
    path = ParamChart(
        to_point=lambda t: _nodal_point_from_t(norm_map, t),
        param_of=lambda w1, w2: norm_map.param_of(w1, w2),
        radius=1.0,
        label="node0-path",
    )
    # infinity chart at [0:0:1]: parametrize by tau = u1 = z1/z2 and express
    # the point in chart 1 (base v1 = u0/u1, fiber v2 = 1/u1).
    inf_chart = ParamChart(
        to_point=lambda tau: _nodal_inf_point(tau),
        param_of=lambda v1, v2: 1.0 / np.asarray(v2, dtype=complex),
        radius=0.3,
        label="inf0",
    )
    return PlaneCurveModel(
        poly,
        nodes=[node],
        infinity_points=[((0.0, 0.0, 1.0), 3)],
        normalization=norm_map,
        node_paths=[path],
        infinity_charts=[inf_chart],
    )


def _nodal_point_from_t(norm_map, t):
    w1, w2 = norm_map.point(t)
    return 0, w1, w2


def _nodal_inf_point(tau):
    """Curve point near [0:0:1] from the tangency parameter tau = z1/z2."""
    tau = np.asarray(tau, dtype=complex)
    u0 = tau**3 / (1.0 + tau**2)  # z0/z2 on the curve
    v1 = u0 / tau  # z0/z1
    v2 = 1.0 / tau  # z2/z1
    return 1, v1, v2


def fermat_quartic():
    """z0^4 + z1^4 + z2^4 = 0, smooth of genus 3."""
    poly = HomogeneousPolynomial(4, {(4, 0, 0): 1.0, (0, 4, 0): 1.0, (0, 0, 4): 1.0})
    pts = []
    for k in range(4):
        s = np.exp(1j * np.pi * (2 * k + 1) / 4)
        norm = np.sqrt(1 + abs(s) ** 2)
        pts.append(((0.0, 1.0 / norm, s / norm), 1))
    return PlaneCurveModel(poly, infinity_points=pts)


_BY_NAME = {
    "line": projective_line,
    "conic": parabola_conic,
    "fermat_cubic": fermat_cubic,
    "nodal_cubic": nodal_cubic,
    "fermat_quartic": fermat_quartic,
}


def by_name(name):
    try:
        return _BY_NAME[name]()
    except KeyError:
        raise ValueError(f"unknown curve {name!r}; choices: {sorted(_BY_NAME)}")
