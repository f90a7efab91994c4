import numpy as np
import pytest

from curvehodge import gallery
from curvehodge.curve_model import GridSpec
from curvehodge.quad_engine import (
    TargetOnBranchLocus,
    cauchy_green_disk,
    form_l2_norm,
    integrate_curve,
    integrate_density,
    singular_patch,
)

COARSE = GridSpec(n_rad=12, n_ang=24, n_rad_B=6, n_ang_B=16)


@pytest.fixture(scope="module")
def line():
    return gallery.projective_line().with_samples(COARSE)


@pytest.fixture(scope="module")
def fermat():
    return gallery.fermat_cubic().with_samples(COARSE)


def test_zero_integrand_is_exactly_zero(line):
    res = integrate_curve(line.samples, np.zeros(line.samples.size))
    assert res.value == 0


def test_fubini_study_area_of_line():
    # area of CP^1: integral over both charts of dA / (1 + |w|^2)^2 = pi
    m = gallery.projective_line().with_samples(
        GridSpec(n_rad=128, n_ang=12, n_rad_B=64, n_ang_B=12)
    )
    s = m.samples
    vals = 1.0 / (1.0 + np.abs(s.base) ** 2) ** 2
    res = integrate_density(s, vals)
    assert res.value == pytest.approx(np.pi, abs=1e-4)


def test_fermat_volume_self_convergence():
    # integral of omega wedge conj(omega) with omega = dw1/(dF/dw2):
    # successive resolution doublings contract the change by >= 2, and the
    # finest pair agrees to 1e-3 relative.
    vals = []
    for scale in (2.0, 4.0, 8.0):
        m = gallery.fermat_cubic().with_samples(COARSE.scaled(scale))
        s = m.samples
        v = np.conj(s.leray) * (-2j)  # times leray and area inside integrate_curve
        vals.append(integrate_curve(s, v).value)
    assert (0.5j * vals[-1]).real > 0  # (i/2) * integral is positive
    change1 = abs(vals[1] - vals[0])
    change2 = abs(vals[2] - vals[1])
    assert change2 <= 0.5 * change1
    assert change2 <= 1e-3 * abs(vals[2])


def test_linearity(fermat):
    rng = np.random.default_rng(0)
    s = fermat.samples
    phi = rng.standard_normal(s.size) + 1j * rng.standard_normal(s.size)
    psi = rng.standard_normal(s.size) + 1j * rng.standard_normal(s.size)
    a, b = 1.3 - 0.2j, -0.7 + 2.1j
    lhs = integrate_curve(s, a * phi + b * psi).value
    rhs = a * integrate_curve(s, phi).value + b * integrate_curve(s, psi).value
    assert abs(lhs - rhs) <= 1e-13 * (1 + abs(lhs) + abs(rhs))


def test_deterministic_reproducibility(fermat):
    rng = np.random.default_rng(1)
    s = fermat.samples
    phi = rng.standard_normal(s.size) + 1j * rng.standard_normal(s.size)
    v1 = integrate_curve(s, phi).value
    v2 = integrate_curve(s, phi.copy()).value
    assert v1 == v2  # bit identical


def test_cauchy_transform_of_constant_on_unit_disk():
    # -(1/pi) iint_{|w|<1} dA / (w - z) = conj(z) for |z| < 1
    targets = np.array([0.3 + 0.1j, -0.2 + 0.4j, 0.5j])
    got = cauchy_green_disk(lambda w: np.ones_like(w), 0.0, 1.0, targets)
    assert np.allclose(got, np.conj(targets), atol=1e-3)


def test_cauchy_green_solves_dbar_for_wbar():
    # f = conj(w): g = conj(w)^2/2 + holomorphic
    targets = np.array([0.25 + 0.1j, -0.3 - 0.2j, 0.1 + 0.4j, 0.0j])
    got = cauchy_green_disk(lambda w: np.conj(w), 0.0, 1.0, targets)
    want = np.conj(targets) ** 2 / 2
    spread = (got - want) - (got[-1] - want[-1])
    assert np.max(np.abs(spread)) < 1e-3


def test_cauchy_green_dbar_matches_bump_by_fd():
    sigma = 0.35

    def f(w):
        return np.exp(-np.abs(w) ** 2 / sigma**2)

    h = 1e-3
    xi = 0.2 + 0.15j
    pts = np.array([xi, xi + h, xi - h, xi + 1j * h, xi - 1j * h])
    g = cauchy_green_disk(f, 0.0, 1.0, pts, n_theta=96, n_s=32)
    dgdx = (g[1] - g[2]) / (2 * h)
    dgdy = (g[3] - g[4]) / (2 * h)
    dbar = 0.5 * (dgdx + 1j * dgdy)
    assert abs(dbar - f(np.array([xi]))[0]) < 1e-2 * abs(f(np.array([xi]))[0])


def test_singular_patch_geometry(fermat):
    base = 0.9 + 0.4j
    patch = singular_patch(fermat, 0, base)
    s = fermat.samples
    # removed ambient samples are inside the patch radius
    removed = ~patch.keep & (s.region == 0)
    assert np.all(np.abs(s.base[removed] - base) <= patch.outer_radius + 1e-12)
    # local samples live on the curve
    res = np.abs(fermat.F_A.evaluate(patch.local.base, patch.local.fiber))
    assert res.max() < 1e-9
    # ratio-2 levels
    assert patch.inner_radius == pytest.approx(patch.outer_radius * 0.5**patch.ring_levels)
    # patch covers the annulus: local area adds up to annulus area
    annulus = np.pi * (patch.outer_radius**2 - patch.inner_radius**2)
    sheet0 = patch.local.sheet == patch.local.sheet[0]
    got = patch.local.area[patch.local.sheet == 0].sum()
    assert got == pytest.approx(annulus, rel=1e-10)


def test_singular_patch_rejects_branch_targets(fermat):
    with pytest.raises(TargetOnBranchLocus):
        singular_patch(fermat, 0, -1.0 + 0.001j)


def test_cauchy_identity_on_line_via_patch():
    # -(1/pi) iint phi/(w - z) dA with phi = 1 on |w| < 1 equals conj(z):
    # assemble from ambient samples + singular patch on the line curve.
    # The cutoff radius 1.0 is aligned with cell edges (R/n_rad divides 1).
    m = gallery.projective_line().with_samples(
        GridSpec(n_rad=40, n_ang=80, n_rad_B=8, n_ang_B=16)
    )
    z = 0.35 + 0.2j
    patch = singular_patch(m, 0, z, outer=0.2)
    s = m.samples

    def kernel_vals(samples):
        mask = (np.abs(samples.base) < 1.0) & (samples.region == 0)
        vals = np.where(mask, 1.0 / (samples.base - z), 0.0)
        return vals

    v_ambient = kernel_vals(s) * patch.weight
    v_local = kernel_vals(patch.local)
    total = (
        integrate_density(s, v_ambient).value
        + integrate_density(patch.local, v_local).value
    )
    got = -total / np.pi
    assert got == pytest.approx(np.conj(z), abs=2e-3)


def test_form_l2_norm_constant(line):
    # norm of 1 over region A disk of radius R: sqrt(2 pi R^2 / 2) = sqrt(pi) R
    s = line.samples
    ones = np.where(s.region == 0, 1.0, 0.0)
    got = form_l2_norm(line, ones)
    assert got == pytest.approx(np.sqrt(np.pi) * COARSE.R, rel=2e-2)
