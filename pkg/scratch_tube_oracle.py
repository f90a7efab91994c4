"""Brute-force tube-integral oracle for the I kernel (debug scratch).

Computes the raw 4-dimensional tube integral

    I_tube(z) = int_{|zeta|=1, |P(zeta)| = eps}
        Phi(zeta) ^ det[zbar/B*, zetabar_u/B, Q] ^ omega(zeta) / P(zeta)

by direct quadrature in parameters (x, y) = base, theta = phase of F,
phi0 = phase of zeta0, with the (0,1) ambient representative

    Phi = t^ell conj(t)^(-1) phi_chart(w1) (dzetabar_1 - conj(w1) dzetabar_0).

Compares with apply_I raw values; their ratio should be target-independent.
"""

import numpy as np
import warnings

warnings.filterwarnings("ignore")

from curvehodge.curve_model import GridSpec, PlaneCurveModel, solve_fiber
from curvehodge.poly_core import HomogeneousPolynomial, hefer_decompose
from curvehodge.forms import bump_function, dbar_of
from curvehodge.kernels import apply_I, KernelTargets

GRID = GridSpec(n_rad=20, n_ang=36, n_rad_B=6, n_ang_B=16)

poly = HomogeneousPolynomial(2, {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0})
model = PlaneCurveModel(poly).with_samples(GRID)
hef = hefer_decompose(poly)
F = model.F_A

c0, r0 = 0.8 + 0.15j, 0.45
roots_c = solve_fiber(F, c0)
g = bump_function(c0, r0, fiber_center=roots_c[0], fiber_radius=0.8 * abs(roots_c[0] - roots_c[1]))
from curvehodge.forms import bumped_monomial_form

phi = bumped_monomial_form(model, (0, 1, 0, 0), g)
phi_ev = phi.evaluator

EPS = 1e-4


def tube_value(z, nx=90, ntheta=28, nphi=28, sheets=(0, 1)):
    # (x, y) grid over the bump support
    xs = np.linspace(c0.real - r0, c0.real + r0, nx)
    ys = np.linspace(c0.imag - r0, c0.imag + r0, nx)
    hx = xs[1] - xs[0]
    hy = ys[1] - ys[0]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    W1 = (X + 1j * Y).ravel()
    total = 0.0 + 0.0j
    thetas = 2 * np.pi * (np.arange(ntheta) + 0.5) / ntheta
    phis = 2 * np.pi * (np.arange(nphi) + 0.5) / nphi

    for sheet in sheets:
        roots0 = np.array([np.sort_complex(solve_fiber(F, w))[sheet] for w in W1])

        def point(w1, w2base, theta, phi0, dp=None):
            """zeta on the tube; dp selects numerical partial derivative."""
            # solve F(w1, w2) = (eps / rho^d) e^{i theta} near the sheet
            w2 = w2base
            for _ in range(40):
                rho = 1.0 / np.sqrt(1 + np.abs(w1) ** 2 + np.abs(w2) ** 2)
                target = (EPS / rho**poly.degree) * np.exp(1j * theta)
                val = F.evaluate(w1, w2) - target
                der = F.d_w2(w1, w2)
                w2 = w2 - val / der
                if np.max(np.abs(F.evaluate(w1, w2) - target)) < 1e-14:
                    break
            rho = 1.0 / np.sqrt(1 + np.abs(w1) ** 2 + np.abs(w2) ** 2)
            t = rho * np.exp(1j * phi0)
            zeta = np.stack([t * np.ones_like(w1), t * w1, t * w2], axis=-1)
            return zeta, w2, t

        h = 1e-6
        for theta in thetas:
            for phi0 in phis:
                zeta, w2, t = point(W1, roots0, theta, phi0)
                # numerical tangents along x, y, theta, phi0
                tangents = []
                for dx, dy, dth, dph in (
                    (h, 0, 0, 0),
                    (0, h, 0, 0),
                    (0, 0, h, 0),
                    (0, 0, 0, h),
                ):
                    zp, _, _ = point(W1 + dx + 1j * dy, w2, theta + dth, phi0 + dph)
                    zm, _, _ = point(W1 - dx - 1j * dy, w2, theta - dth, phi0 - dph)
                    tangents.append((zp - zm) / (2 * h))
                tangents = np.stack(tangents, axis=1)  # (N, 4 dirs, 3 comps)

                # 1-forms evaluated on tangents
                phi_chart = phi_ev(np.zeros(W1.size, dtype=int), W1, w2)
                cphi = phi_chart / np.conj(t)  # ell = 0
                phi_on = cphi[:, None] * (
                    np.conj(tangents[:, :, 1]) - np.conj(W1)[:, None] * np.conj(tangents[:, :, 0])
                )
                rows = np.stack(
                    [phi_on, tangents[:, :, 0], tangents[:, :, 1], tangents[:, :, 2]],
                    axis=1,
                )  # (N, 4 forms, 4 dirs)
                four_form = np.linalg.det(rows)

                # scalar kernel factor
                B = 1.0 - np.einsum("nc,c->n", np.conj(zeta), z)
                Bs = np.einsum("c,nc->n", np.conj(z), zeta) - 1.0
                q0, q1, q2 = hef.evaluate(
                    (zeta[:, 0], zeta[:, 1], zeta[:, 2]), (z[0], z[1], z[2])
                )
                zb = np.conj(z)
                zetab = np.conj(zeta)
                D = (
                    zb[0] * (zetab[:, 1] * q2 - zetab[:, 2] * q1)
                    - zb[1] * (zetab[:, 0] * q2 - zetab[:, 2] * q0)
                    + zb[2] * (zetab[:, 0] * q1 - zetab[:, 1] * q0)
                )
                P = poly.evaluate(zeta[:, 0], zeta[:, 1], zeta[:, 2])
                scal = D / (Bs * B * P)
                total += np.sum(scal * four_form) * hx * hy * (2 * np.pi / ntheta) * (
                    2 * np.pi / nphi
                )
    return total


# targets on sheet 0 outside the bump support (kernel smooth there)
for w1t in (-0.2 + 0.05j,):
    w2t = np.sort_complex(solve_fiber(F, w1t))[0]
    t = KernelTargets(model, np.array([0]), np.array([w1t]), np.array([w2t]))
    raw, _ = apply_I(model, phi, t)
    z = t.zeta[0]
    tube = tube_value(z)
    print(f"target {w1t}: apply_I raw = {raw[0]:.6f}  tube = {tube:.6f}  ratio = {raw[0]/tube:.6f}")
