import numpy as np
import pytest

from curvehodge import gallery
from curvehodge.curve_model import (
    GridSpec,
    MultiplicityMismatch,
    UndeclaredSingularity,
    build_samples,
    check_overlap_compatibility,
    choose_probes,
    solve_fiber,
    validate_curve,
)
from curvehodge.poly_core import HomogeneousPolynomial

COARSE = GridSpec(n_rad=10, n_ang=20, n_rad_B=5, n_ang_B=12)


@pytest.fixture(scope="module")
def fermat():
    return gallery.fermat_cubic().with_samples(COARSE)


@pytest.fixture(scope="module")
def nodal():
    return gallery.nodal_cubic().with_samples(COARSE)


def test_validate_nodal_cubic(nodal):
    rep = validate_curve(nodal)
    assert rep.ok
    assert rep.p_a == 1 and rep.node_count == 1 and rep.genus == 0
    assert rep.infinity == [((0.0, 0.0, 1.0), 3)]
    node = nodal.nodes[0]
    t1, t2 = node.tangents
    # tangents (1, -1) and (1, +1) in (w1, w2)
    slopes = sorted([complex(t1[1]) / complex(t1[0]), complex(t2[1]) / complex(t2[0])], key=lambda z: z.real)
    assert slopes[0] == pytest.approx(-1.0, abs=1e-4)
    assert slopes[1] == pytest.approx(1.0, abs=1e-4)


def test_validate_fermat_cubic(fermat):
    rep = validate_curve(fermat)
    assert rep.ok
    assert rep.p_a == 1 and rep.node_count == 0 and rep.genus == 1
    assert rep.min_gradient_off_nodes > 1e-3


def test_validate_line():
    line = gallery.projective_line().with_samples(COARSE)
    rep = validate_curve(line)
    assert rep.ok and rep.genus == 0 and rep.node_count == 0
    assert rep.infinity == [((0.0, 1.0, 0.0), 1)]


def test_undeclared_node_raises():
    # the nodal cubic without its node declaration
    poly = HomogeneousPolynomial(3, {(1, 0, 2): 1.0, (0, 3, 0): -1.0, (1, 2, 0): -1.0})
    from curvehodge.curve_model import PlaneCurveModel

    model = PlaneCurveModel(poly).with_samples(COARSE)
    with pytest.raises(UndeclaredSingularity):
        validate_curve(model)


def test_bad_infinity_declaration_raises():
    poly = HomogeneousPolynomial(3, {(3, 0, 0): 1.0, (0, 3, 0): 1.0, (0, 0, 3): 1.0})
    from curvehodge.curve_model import PlaneCurveModel

    model = PlaneCurveModel(poly, infinity_points=[((0.0, 0.0, 1.0), 3)])
    model.with_samples(COARSE)
    with pytest.raises(MultiplicityMismatch):
        validate_curve(model)


def test_fermat_fiber_roots():
    model = gallery.fermat_cubic()
    roots = solve_fiber(model.F_A, 1.0 + 0j)
    assert roots.size == 3
    assert np.allclose(np.sort(roots**3), -2.0, atol=1e-10)
    # Leray weight is 1/(3 w2^2)
    der = model.F_A.d_w2(1.0 + 0j, roots)
    assert np.allclose(der, 3 * roots**2)


def test_line_single_sheet():
    model = gallery.projective_line().with_samples(COARSE)
    s = model.samples
    region_a = s.region == 0
    assert np.all(np.abs(s.fiber[region_a]) < 1e-12)
    assert np.all(s.leray[region_a] == 1.0)


def test_nodal_sheets_near_node(nodal):
    # close to the node the two sheets look like w2 = +/- w1
    w1 = 0.01 + 0.003j
    roots = solve_fiber(nodal.F_A, w1)
    assert roots.size == 2
    expected = w1 * np.sqrt(1 + w1)
    got = np.sort_complex(roots)
    want = np.sort_complex(np.array([expected, -expected]))
    assert np.allclose(got, want, atol=1e-8)


def test_samples_invariants(fermat):
    s = fermat.samples
    # residual of F at samples
    for region, F in ((0, fermat.F_A), (1, fermat.F_B)):
        mask = s.region == region
        res = np.abs(F.evaluate(s.base[mask], s.fiber[mask]))
        assert res.max() < 1e-9
    # unit sphere representatives
    norms = np.linalg.norm(s.zeta, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-14
    # sphere rep reproduces chart coordinates on division
    a = s.region == 0
    assert np.allclose(s.zeta[a, 1] / s.zeta[a, 0], s.base[a])
    assert np.allclose(s.zeta[a, 2] / s.zeta[a, 0], s.fiber[a])
    # curve polynomial vanishes on sphere reps
    p = np.abs(fermat.poly.evaluate(s.zeta[:, 0], s.zeta[:, 1], s.zeta[:, 2]))
    assert p.max() < 1e-9


def test_sheet_assignment_is_fiberwise_bijection(fermat):
    s = fermat.samples
    a = s.region == 0
    bases = s.base[a]
    sheets = s.sheet[a]
    seen = {}
    for b, sh in zip(bases, sheets):
        key = (round(b.real, 12), round(b.imag, 12))
        seen.setdefault(key, []).append(sh)
    for key, lst in seen.items():
        assert len(lst) == len(set(lst)) == 3


def test_refinement_concentrates_near_branch_points(fermat):
    s = fermat.samples
    # Fermat branch bases at w1^3 = -1
    branch = -np.exp(2j * np.pi * np.arange(3) / 3 + 1j * np.pi / 3)
    branch = np.array([-1.0, np.exp(1j * np.pi / 3), np.exp(-1j * np.pi / 3)])
    a = s.region == 0
    near = a & (np.min(np.abs(s.base[:, None] - branch[None, :]), axis=1) < COARSE.delta_b)
    assert np.any(near)
    assert s.level[near].max() >= 2
    assert s.area[near].min() < s.area[a].max() / 8


def test_area_total_region_A(fermat):
    s = fermat.samples
    a = (s.region == 0) & (s.sheet == 0)
    total = s.area[a].sum()
    # disk of radius R minus dropped slivers
    assert total == pytest.approx(np.pi * COARSE.R**2, rel=2e-2)


def test_self_convergence_of_area_measure():
    model = gallery.fermat_cubic()
    vals = []
    for scale in (0.5, 1.0, 2.0):
        m = gallery.fermat_cubic().with_samples(COARSE.scaled(scale))
        s = m.samples
        # integral of a smooth bump over the curve
        f = np.exp(-np.abs(s.base - 0.4) ** 2) * s.area
        vals.append(f.sum())
    change1 = abs(vals[1] - vals[0])
    change2 = abs(vals[2] - vals[1])
    assert change2 <= 0.6 * change1 + 1e-12


def test_overlap_compatibility_function(fermat):
    # the chart-0 function w1 has a homogeneity-1 lift: g = zeta_1/zeta_0... times zeta_0
    # use g(zeta) = zeta_1, ell = 1: chart-0 value w1, chart-1 value 1
    def evaluator(chart, w1, w2):
        chart = np.asarray(chart)
        w1 = np.asarray(w1, dtype=complex)
        return np.where(chart == 0, w1, np.ones_like(w1))

    res = check_overlap_compatibility(fermat, evaluator, ell=1, role="function")
    assert res < 1e-10


def test_overlap_compatibility_form(fermat):
    # (0,1)-form dbar(zeta_1/zeta_0 conjugated...): phi = d wbar_1 has ell = 0 lift?
    # chart-0 coefficient 1; chart-1 coefficient -1/conj(v1)^2 by the transition rule.
    def evaluator(chart, w1, w2):
        chart = np.asarray(chart)
        w1 = np.asarray(w1, dtype=complex)
        out = np.ones(np.broadcast(chart, w1).shape, dtype=complex)
        b = chart == 1
        out = np.where(b, -1.0 / np.conj(w1) ** 2, out)
        return out

    res = check_overlap_compatibility(fermat, evaluator, ell=0, role="form01")
    assert res < 1e-10


def test_probes_avoid_branch_points(fermat):
    idx = choose_probes(fermat, 8, seed=1)
    s = fermat.samples
    branch = np.array([-1.0, np.exp(1j * np.pi / 3), np.exp(-1j * np.pi / 3)])
    d = np.min(np.abs(s.base[idx][:, None] - branch[None, :]), axis=1)
    assert np.all(d > 2 * COARSE.delta_b)


def test_nodal_normalization_parametrizes_curve(nodal):
    t = np.linspace(-2, 2, 41) + 0.3j
    w1, w2 = nodal.normalization.point(t)
    res = np.abs(nodal.F_A.evaluate(w1, w2))
    assert res.max() < 1e-12
