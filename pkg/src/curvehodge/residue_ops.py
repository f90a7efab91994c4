"""Residual-current pairings against dualizing (adjoint) sections.

A dualizing section is an adjoint form gamma_q = q(w) dw1 / (dF/dw2) with
deg q <= d - 3 - ell; its chart-B numerator is the degree-(d-3-ell)
homogenization of q evaluated on the chart lift, with the chart
orientation sign.  The residual pairing of a (0,1) current phi of
homogeneity ell with gamma_q is realized as the Leray residue integral

    <phi, gamma> = 2 pi i * integral_C gamma wedge phi,

summed over all fiber sheets (so two-branch sums at nodes happen by
construction: both branch samples sit over the same base points and the
pole parts cancel pairwise).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curve_model import HomogeneityMismatch
from .quad_engine import integrate_curve

__all__ = [
    "DualizingSection",
    "dualizing_sections",
    "residual_pairing",
    "pairing_matrix",
    "numerical_rank",
]


@dataclass
class DualizingSection:
    """Adjoint form q(w1, w2) dw1 / (dF/dw2), twisted to pair with
    homogeneity-``ell`` currents."""

    model: object
    q_coeffs: dict  # (a, b) -> complex, total degree <= d - 3 - ell
    ell: int = 0
    label: str = ""

    def __post_init__(self):
        d = self.model.degree
        self.max_degree = d - 3 - self.ell
        for (a, b) in self.q_coeffs:
            if a + b > self.max_degree:
                raise ValueError("adjoint numerator degree too high for the twist")

    def numerator_on_lift(self, zeta_unit, rho, sign):
        """sign * q^h(zeta/rho) evaluated through unit representatives.

        q^h is the homogenization of q to degree d - 3 - ell; on the chart
        lift zeta_hat = zeta_unit / rho this equals
        rho^(ell + 3 - d) q^h(zeta_unit).
        """
        d = self.model.degree
        z0 = zeta_unit[:, 0]
        z1 = zeta_unit[:, 1]
        z2 = zeta_unit[:, 2]
        out = np.zeros(z0.shape, dtype=complex)
        for (a, b), c in sorted(self.q_coeffs.items()):
            out += c * z0 ** (self.max_degree - a - b) * z1**a * z2**b
        return sign * out * rho ** (self.ell + 3 - d)

    def chart_values(self, samples):
        """Leray-frame coefficient per sample (numerator only; the weight
        1/(dF/dfiber) is applied by integrate_curve)."""
        return self.numerator_on_lift(samples.zeta, samples.rho, samples.sign)


def dualizing_sections(model, ell=0):
    """All monomial adjoint sections for the given twist.

    For ell = 0 the count is (d-1)(d-2)/2, the arithmetic genus of the
    plane curve; the list is empty when d - 3 - ell < 0.
    """
    d = model.degree
    top = d - 3 - ell
    out = []
    for total in range(top + 1):
        for a in range(total + 1):
            b = total - a
            out.append(
                DualizingSection(model, {(a, b): 1.0}, ell=ell, label=f"w1^{a} w2^{b}")
            )
    return out


def residual_pairing(phi, gamma):
    """<phi, gamma> = 2 pi i * integral_C gamma wedge phi (Leray residue).

    phi is a CurveFormSamples (0,1) object; its homogeneity must match the
    section's twist.
    """
    if phi.role != "form01":
        raise ValueError("pairing expects a (0,1)-form")
    if phi.ell != gamma.ell:
        raise HomogeneityMismatch(
            f"form homogeneity {phi.ell} does not cancel section twist {gamma.ell}"
        )
    samples = phi.model.samples
    num = gamma.chart_values(samples)
    # gamma wedge phi = num * leray * phi dw1 ^ dwbar1 and dw ^ dwbar = -2i dA
    values = num * phi.values * (-2j)
    return 2j * np.pi * integrate_curve(samples, values).value


def pairing_matrix(model, forms, sections):
    """Matrix of residual pairings, forms along rows."""
    out = np.zeros((len(forms), len(sections)), dtype=complex)
    for i, phi in enumerate(forms):
        for j, gamma in enumerate(sections):
            out[i, j] = residual_pairing(phi, gamma)
    return out


def numerical_rank(matrix, cut=1e-3):
    """Rank with singular values below cut * sigma_max discarded."""
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(np.asarray(matrix, dtype=complex), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s >= cut * s[0]))
