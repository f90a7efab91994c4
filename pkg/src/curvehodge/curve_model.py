"""Geometric model of a plane curve and its fibered discretization.

A curve C = {P = 0} in CP^2 is sampled by projecting to the base line
[z0 : z1] and solving the fiber polynomial over a polar grid of base
points.  Two base regions cover the base line:

* region A: chart 0, base w1 = z1/z0, fiber w2 = z2/z0, |w1| <= R,
* region B: chart 1, base v1 = z0/z1, fiber v2 = z2/z1, |v1| <= 1/R.

Every sample carries the Leray weight 1/(dF/dfiber), a quadrature area
weight for its base cell, the unit-sphere representative of the point,
and the scale rho with zeta = rho * (chart lift).  Cells are refined by
ratio-2 subdivision near discriminant base points, and the innermost
disks (below ``delta_min``) are dropped with their area recorded.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .poly_core import HomogeneousPolynomial, dehomogenize

__all__ = [
    "GridSpec",
    "NodePoint",
    "PlaneCurveModel",
    "SampleSet",
    "CurveFormSamples",
    "ValidationReport",
    "UndeclaredSingularity",
    "MultiplicityMismatch",
    "SheetContinuationAmbiguity",
    "ResidualRootError",
    "HomogeneityMismatch",
    "validate_curve",
    "build_samples",
    "lift_form",
    "check_overlap_compatibility",
    "choose_probes",
]

_ROOT_TOL = 1e-10


class UndeclaredSingularity(Exception):
    """A near-singular curve point far from every declared node."""


class MultiplicityMismatch(Exception):
    """Declared infinity points disagree with the zeros of P(0, z1, z2)."""


class SheetContinuationAmbiguity(Exception):
    """Fiber roots too close to match across adjacent fibers away from
    branch exclusions."""


class ResidualRootError(Exception):
    """|F| above tolerance after Newton polish of a fiber root."""


class HomogeneityMismatch(Exception):
    """Chart-overlap transform residual of a lifted form is too large."""


@dataclass(frozen=True)
class GridSpec:
    """Base-plane resolution and singular-handling radii.

    All tolerances used by sampling and singular quadrature live here so a
    run is reproducible from config alone.
    """

    n_rad: int = 24
    n_ang: int = 40
    R: float = 2.0
    n_rad_B: int = 8
    n_ang_B: int = 24
    v_min: float = 1e-3
    delta_b: float = 0.12
    delta_min: float = 1e-4
    fd_step: float = 0.02
    singular_levels: int = 5
    singular_n_ang: int = 16

    def scaled(self, factor):
        """Resolution scaled by ``factor`` (radii and tolerances untouched)."""
        return GridSpec(
            n_rad=max(4, int(round(self.n_rad * factor))),
            n_ang=max(8, int(round(self.n_ang * factor))),
            R=self.R,
            n_rad_B=max(3, int(round(self.n_rad_B * factor))),
            n_ang_B=max(8, int(round(self.n_ang_B * factor))),
            v_min=self.v_min,
            delta_b=self.delta_b,
            delta_min=self.delta_min,
            fd_step=self.fd_step,
            singular_levels=self.singular_levels,
            singular_n_ang=self.singular_n_ang,
        )

    def grid_hash(self):
        import hashlib

        payload = ",".join(
            f"{k}={getattr(self, k)!r}"
            for k in (
                "n_rad",
                "n_ang",
                "R",
                "n_rad_B",
                "n_ang_B",
                "v_min",
                "delta_b",
                "delta_min",
                "singular_levels",
                "singular_n_ang",
            )
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass
class NodePoint:
    """An ordinary double point: location plus the two branch tangents.

    Branch labels follow the fixed convention that branch 1 is the tangent
    of smaller argument in the node's chart; preimage p1 lies on branch 1.
    """

    location: tuple
    chart: int
    base: complex
    fiber: complex
    tangents: tuple = None

    def tangent_det(self):
        t1, t2 = self.tangents
        t1 = np.asarray(t1, dtype=complex)
        t2 = np.asarray(t2, dtype=complex)
        t1 = t1 / np.linalg.norm(t1)
        t2 = t2 / np.linalg.norm(t2)
        return abs(t1[0] * t2[1] - t1[1] * t2[0])


@dataclass
class ParamChart:
    """Holomorphic local parametrization tau -> curve point.

    ``to_point(tau)`` returns (chart, base, fiber); ``param_of(base, fiber)``
    inverts it.  Used for node paths and for disks around infinity points,
    where the base projection is not a coordinate.
    """

    to_point: callable
    param_of: callable
    radius: float
    label: str = ""


class PlaneCurveModel:
    """Curve polynomial, charts, nodes, infinity data and topology."""

    def __init__(self, poly, nodes=(), infinity_points=(), normalization=None,
                 node_paths=(), infinity_charts=()):
        self.poly = poly
        self.degree = poly.degree
        self.F_A = dehomogenize(poly, 0)
        self.F_B = dehomogenize(poly, 1)
        self.nodes = list(nodes)
        self.infinity_points = list(infinity_points)
        self.p_a = (self.degree - 1) * (self.degree - 2) // 2
        self.r = len(self.nodes)
        self.genus = self.p_a - self.r
        # optional analytic extras supplied with the curve (input data)
        self.normalization = normalization
        self.node_paths = list(node_paths)
        self.infinity_charts = list(infinity_charts)
        self.samples = None
        self.grid = None

    def chart_poly(self, chart):
        return self.F_A if chart == 0 else self.F_B

    def with_samples(self, grid):
        """Attach a discretization (idempotent for identical grids)."""
        if self.samples is None or self.grid != grid:
            self.samples = build_samples(self, grid)
            self.grid = grid
        return self

    def curve_hash(self):
        return self.poly.curve_hash()

    def branch_bases(self, region):
        """Discriminant base points of the fiber projection in a region."""
        F = self.F_A if region == 0 else self.F_B
        radius = self.grid.R if self.grid else 2.0
        domain = radius if region == 0 else 1.0 / radius
        return _fiber_critical_bases(F, domain * 1.3)

    def __repr__(self):
        return (
            f"PlaneCurveModel(d={self.degree}, nodes={self.r}, "
            f"p_a={self.p_a}, g={self.genus})"
        )


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    ok: bool
    degree: int
    p_a: int
    node_count: int
    genus: int
    infinity: list
    min_gradient_off_nodes: float
    messages: list = field(default_factory=list)


def _coeff_scale(poly):
    return max(abs(v) for v in poly.coeffs.values())


def _node_tangents(F, base, fiber):
    """Branch tangent directions from the quadratic part of F at a node."""
    h = 1e-5

    def d2(fa, fb):
        # central second differences of F in chart coordinates
        e = {0: (h, 0), 1: (0, h)}
        da, db = e[fa], e[fb]
        pp = F.evaluate(base + da[0] + db[0], fiber + da[1] + db[1])
        pm = F.evaluate(base + da[0] - db[0], fiber + da[1] - db[1])
        mp = F.evaluate(base - da[0] + db[0], fiber - da[1] + db[1])
        mm = F.evaluate(base - da[0] - db[0], fiber - da[1] - db[1])
        return (pp - pm - mp + mm) / (4 * h * h)

    f11 = d2(0, 0)
    f12 = d2(0, 1)
    f22 = d2(1, 1)
    # tangent (x, y) solves f11 x^2 + 2 f12 x y + f22 y^2 = 0
    if abs(f22) >= abs(f11):
        disc = np.sqrt(f12 * f12 - f11 * f22)
        s1 = (-f12 + disc) / f22
        s2 = (-f12 - disc) / f22
        t1, t2 = (1.0, s1), (1.0, s2)
    else:
        disc = np.sqrt(f12 * f12 - f11 * f22)
        s1 = (-f12 + disc) / f11
        s2 = (-f12 - disc) / f11
        t1, t2 = (s1, 1.0), (s2, 1.0)
    key = lambda t: np.angle(complex(t[1]) / complex(t[0]) if t[0] != 0 else 1e9)
    return tuple(sorted((t1, t2), key=key))


def _infinity_roots(poly):
    """Zeros of the binary form P(0, z1, z2) with multiplicities.

    Returns a list of ((0, a, b), mult) with (a, b) normalized.
    """
    b = poly.infinity_form_coeffs()  # b[m] multiplies z1^(d-m) z2^m
    d = poly.degree
    top = max(m for m in range(d + 1) if abs(b[m]) > 1e-13 * max(abs(b).max(), 1e-300))
    out = []
    if top < d:
        out.append(((0.0, 0.0, 1.0), d - top))  # the point [0:0:1]
    if top > 0:
        roots = np.roots(b[: top + 1][::-1][::-1])  # descending in s = z2/z1
        roots = np.roots(b[: top + 1][::-1])
        used = np.zeros(len(roots), dtype=bool)
        for i, r in enumerate(roots):
            if used[i]:
                continue
            cluster = [j for j in range(len(roots)) if not used[j] and abs(roots[j] - r) < 1e-5]
            for j in cluster:
                used[j] = True
            center = np.mean([roots[j] for j in cluster])
            norm = np.sqrt(1 + abs(center) ** 2)
            out.append(((0.0, 1.0 / norm, center / norm), len(cluster)))
    return out


def validate_curve(model, grid=None):
    """Check node declarations, scan for undeclared singularities, verify
    infinity multiplicities, and report the topology."""
    poly = model.poly
    scale = _coeff_scale(poly)
    messages = []

    for node in model.nodes:
        z = node.location
        val = abs(poly.evaluate(*z))
        grad = poly.gradient(*z)
        gnorm = max(abs(g) for g in grad)
        if val > 1e-9 * scale or gnorm > 1e-9 * scale:
            raise UndeclaredSingularity(
                f"declared node {z} fails |P|,|grad P| <= 1e-9 (got {val:.2e}, {gnorm:.2e})"
            )
        if node.tangents is None:
            F = model.chart_poly(node.chart)
            node.tangents = _node_tangents(F, node.base, node.fiber)
        if node.tangent_det() < 1e-6:
            raise UndeclaredSingularity(
                f"declared node {z} has dependent branch tangents (cusp?)"
            )

    found = _infinity_roots(poly)
    if sum(m for _, m in found) != poly.degree:
        raise MultiplicityMismatch("infinity multiplicities do not sum to the degree")
    if model.infinity_points:
        declared = sorted(model.infinity_points, key=lambda pm: -pm[1])
        if len(declared) != len(found):
            raise MultiplicityMismatch(
                f"declared {len(declared)} infinity points, found {len(found)}"
            )
        for (zd, md) in declared:
            match = [
                (zf, mf)
                for zf, mf in found
                if _projective_distance(zd, zf) < 1e-6
            ]
            if not match or match[0][1] != md:
                raise MultiplicityMismatch(f"infinity point {zd} (mult {md}) not confirmed")
    else:
        model.infinity_points = found

    # dense scan for undeclared singular points on the curve
    probe_grid = grid or GridSpec(n_rad=12, n_ang=24)
    samples = model.samples if model.samples is not None else build_samples(model, probe_grid)
    g0, g1, g2 = poly.gradient(samples.zeta[:, 0], samples.zeta[:, 1], samples.zeta[:, 2])
    gnorm = np.sqrt(np.abs(g0) ** 2 + np.abs(g1) ** 2 + np.abs(g2) ** 2) / scale
    node_zetas = np.array([_sphere_rep_of_location(n.location) for n in model.nodes]).reshape(-1, 3)
    far = np.ones(samples.size, dtype=bool)
    for nz in node_zetas:
        dist = np.linalg.norm(samples.zeta - nz[None, :], axis=1)
        far &= dist > 5 * probe_grid.delta_b
    floor = 1e-3
    bad = far & (gnorm < floor)
    if np.any(bad):
        i = int(np.argmin(np.where(bad, gnorm, np.inf)))
        raise UndeclaredSingularity(
            f"curve sample {samples.zeta[i]} has |grad P| = {gnorm[i]:.2e} far from declared nodes"
        )
    if model.genus < 0:
        raise UndeclaredSingularity("negative geometric genus; node list inconsistent")

    return ValidationReport(
        ok=True,
        degree=poly.degree,
        p_a=model.p_a,
        node_count=model.r,
        genus=model.genus,
        infinity=[(tuple(z), m) for z, m in model.infinity_points],
        min_gradient_off_nodes=float(np.min(gnorm[far])) if np.any(far) else float("nan"),
        messages=messages,
    )


def _projective_distance(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    inner = abs(np.vdot(a, b))
    return float(np.sqrt(max(0.0, 1.0 - min(1.0, inner**2))))


def _sphere_rep_of_location(z):
    z = np.asarray(z, dtype=complex)
    return z / np.linalg.norm(z)


# ---------------------------------------------------------------------------
# discriminant bases (refinement centers)


def _fiber_critical_bases(F, domain_radius):
    """Base points where the fiber has repeated roots or degree drop.

    The discriminant of F(w1, .) is interpolated from values on a circle
    (product of root differences times the leading coefficient) and its
    roots inside the sampling domain are returned.  Approximate locations
    suffice; they only steer mesh refinement.
    """
    deg2 = F.deg2
    lead_deg_bound = max(a for (a, _b) in F.coeffs)
    centers = []
    if deg2 >= 2:
        bound = (2 * deg2 - 1) * max(1, lead_deg_bound) + 2
        n_fit = 1
        while n_fit < 4 * bound:
            n_fit *= 2
        r_fit = max(1.3 * domain_radius, 1.5)
        w = r_fit * np.exp(2j * np.pi * np.arange(n_fit) / n_fit)
        rows = F.fiber_coefficients(w)
        vals = np.empty(n_fit, dtype=complex)
        for i in range(n_fit):
            coeff = rows[i]
            lead = coeff[0]
            roots = np.roots(coeff)
            prod = lead ** (2 * deg2 - 2)
            for a, b in itertools.combinations(range(len(roots)), 2):
                prod *= (roots[a] - roots[b]) ** 2
            vals[i] = prod
        # p(r e^{i theta_k}) = sum_m (c_m r^m) e^{+i m theta_k}, so the
        # forward DFT divided by N recovers c_m r^m
        fc = np.fft.fft(vals) / n_fit
        ks = np.arange(n_fit)
        coeffs = fc / r_fit**ks
        mags = np.abs(coeffs)
        keep = mags > 1e-10 * mags.max()
        top = int(np.max(np.nonzero(keep))) if np.any(keep) else 0
        if top > 0:
            poly_coeffs = coeffs[: top + 1][::-1]
            roots = np.roots(poly_coeffs)
            centers.extend(r for r in roots if abs(r) <= domain_radius)
    # degree-drop points: zeros of the leading fiber coefficient
    lead_coeffs = {a: c for (a, b), c in F.coeffs.items() if b == deg2}
    if lead_coeffs and max(lead_coeffs) > 0:
        arr = np.zeros(max(lead_coeffs) + 1, dtype=complex)
        for a, c in lead_coeffs.items():
            arr[a] = c
        for r in np.roots(arr[::-1]):
            if abs(r) <= domain_radius:
                centers.append(r)
    # dedupe
    out = []
    for c in sorted(centers, key=lambda z: (round(z.real, 9), round(z.imag, 9))):
        if all(abs(c - o) > 1e-6 for o in out):
            out.append(complex(c))
    return out


# ---------------------------------------------------------------------------
# sampling


class SampleSet:
    """Columnar store of curve samples (immutable after construction)."""

    def __init__(self, region, base, fiber, sheet, leray, area, level, meta):
        order = np.lexsort(
            (
                np.round(fiber.real, 12),
                np.round(fiber.imag, 12),
                sheet,
                np.round(np.angle(base), 12),
                np.round(np.abs(base), 12),
                region,
            )
        )
        self.region = region[order]
        self.base = base[order]
        self.fiber = fiber[order]
        self.sheet = sheet[order]
        self.leray = leray[order]
        self.area = area[order]
        self.level = level[order]
        self.meta = meta
        lift = np.ones((self.base.size, 3), dtype=complex)
        a_mask = self.region == 0
        lift[a_mask, 1] = self.base[a_mask]
        lift[a_mask, 2] = self.fiber[a_mask]
        lift[~a_mask, 0] = self.base[~a_mask]
        lift[~a_mask, 2] = self.fiber[~a_mask]
        norms = np.sqrt(np.sum(np.abs(lift) ** 2, axis=1))
        self.rho = 1.0 / norms
        self.zeta = lift * self.rho[:, None]
        self.sign = np.where(a_mask, 1.0, -1.0)
        self._frozen = True

    @property
    def size(self):
        return self.base.size

    def chart_id(self):
        """CP^2 chart index of each sample's frame (0 for region A, 1 for B)."""
        return np.where(self.region == 0, 0, 1)

    def to_csv_rows(self):
        rows = []
        for i in range(self.size):
            rows.append(
                [
                    int(self.region[i]),
                    self.base[i].real,
                    self.base[i].imag,
                    int(self.sheet[i]),
                    self.fiber[i].real,
                    self.fiber[i].imag,
                    self.area[i],
                ]
            )
        return rows


def _polar_cells(r_edges, n_ang):
    """Midpoint annular-sector cells: centers and exact areas."""
    centers = []
    areas = []
    metas = []
    for i in range(len(r_edges) - 1):
        r0, r1 = r_edges[i], r_edges[i + 1]
        rm = 0.5 * (r0 + r1)
        cell_area = 0.5 * (r1**2 - r0**2) * (2 * np.pi / n_ang)
        for j in range(n_ang):
            th = 2 * np.pi * (j + 0.5) / n_ang
            centers.append(rm * np.exp(1j * th))
            areas.append(cell_area)
            metas.append((r0, r1, 2 * np.pi * j / n_ang, 2 * np.pi * (j + 1) / n_ang))
    return np.array(centers), np.array(areas), metas


def _subdivide_near(centers, areas, metas, refine_pts, delta_b, delta_min):
    """Ratio-2 quadtree subdivision of polar cells near refinement centers.

    Cells whose center lands within ``delta_min`` of a refinement point are
    dropped; the lost area is returned for reporting.
    """
    if not refine_pts:
        return centers, areas, np.zeros(len(centers), dtype=np.int16), 0.0
    refine_pts = np.asarray(refine_pts)
    out_c, out_a, out_l = [], [], []
    dropped = 0.0
    stack = [
        (complex(centers[i]), float(areas[i]), metas[i], 0) for i in range(len(centers))
    ]
    while stack:
        c, a, (r0, r1, t0, t1), lvl = stack.pop()
        d = np.min(np.abs(refine_pts - c))
        ext_r = r1 - r0
        ext_a = max(r1, 1e-12) * (t1 - t0)
        diag = np.hypot(ext_r, ext_a)
        if d + 0.7 * diag < delta_min:
            dropped += a
            continue
        # grade cell size proportionally to the distance from the nearest
        # refinement center, never below delta_min
        need = (
            d < delta_b + 0.7 * diag
            and diag > max(2 * delta_min, 0.4 * d)
            and lvl < 40
        )
        if not need:
            out_c.append(c)
            out_a.append(a)
            out_l.append(lvl)
            continue
        # split only directions that are actually long, so cells hugging the
        # polar origin do not multiply angularly
        r_cuts = (r0, 0.5 * (r0 + r1), r1) if ext_r > 0.5 * ext_a else (r0, r1)
        t_cuts = (t0, 0.5 * (t0 + t1), t1) if ext_a > 0.5 * ext_r else (t0, t1)
        for ri in range(len(r_cuts) - 1):
            for ti in range(len(t_cuts) - 1):
                rr = (r_cuts[ri], r_cuts[ri + 1])
                tt = (t_cuts[ti], t_cuts[ti + 1])
                sub_area = 0.5 * (rr[1] ** 2 - rr[0] ** 2) * (tt[1] - tt[0])
                rmid = 0.5 * (rr[0] + rr[1])
                tmid = 0.5 * (tt[0] + tt[1])
                stack.append(
                    (rmid * np.exp(1j * tmid), sub_area, (rr[0], rr[1], tt[0], tt[1]), lvl + 1)
                )
        if len(stack) + len(out_c) > 400000:
            raise ResidualRootError("mesh refinement exploded; check refine centers")
    return (
        np.array(out_c),
        np.array(out_a),
        np.array(out_l, dtype=np.int16),
        dropped,
    )


def _polish_roots(F, w1, roots, tol=_ROOT_TOL):
    for _ in range(4):
        val = F.evaluate(w1, roots)
        der = F.d_w2(w1, roots)
        safe = np.abs(der) > 1e-300
        step = np.where(safe, val / np.where(safe, der, 1.0), 0.0)
        roots = roots - step
        if np.all(np.abs(F.evaluate(w1, roots)) < 0.1 * tol):
            break
    return roots


def solve_fiber(F, w1, tol=_ROOT_TOL):
    """All fiber roots of F(w1, .), Newton-polished.

    Leading coefficients that vanish at special bases reduce the root
    count for that fiber.
    """
    row = F.fiber_coefficients(np.array([w1]))[0]
    mags = np.abs(row)
    top = mags > 1e-12 * max(mags.max(), 1e-300)
    first = int(np.argmax(top))
    row = row[first:]
    if row.size <= 1:
        return np.array([], dtype=complex)
    roots = np.roots(row)
    roots = _polish_roots(F, w1, roots, tol)
    res = np.abs(F.evaluate(w1, roots))
    scale = max(1.0, np.abs(row).max())
    if np.any(res > tol * scale * 100):
        raise ResidualRootError(
            f"fiber root residual {res.max():.2e} at base {w1}"
        )
    return roots


def _match_sheets(prev_roots, prev_sheets, roots, ambiguity_ok):
    """Assign sheet labels by min-cost matching to the nearest solved fiber."""
    n = len(roots)
    m = len(prev_roots)
    if m == 0 or n == 0:
        return np.arange(n)
    if n != m:
        # degree drop: label greedily, fresh labels for extras
        order = np.argsort([min(abs(r - p) for p in prev_roots) for r in roots])
        labels = -np.ones(n, dtype=int)
        used = set()
        for i in order:
            dists = [(abs(roots[i] - prev_roots[j]), j) for j in range(m) if j not in used]
            if dists:
                _, j = min(dists)
                labels[i] = prev_sheets[j]
                used.add(j)
        fresh = max(list(prev_sheets) + [-1]) + 1
        for i in range(n):
            if labels[i] < 0:
                labels[i] = fresh
                fresh += 1
        return labels
    best = None
    second = None
    best_perm = None
    for perm in itertools.permutations(range(n)):
        cost = sum(abs(roots[i] - prev_roots[perm[i]]) for i in range(n))
        if best is None or cost < best:
            second = best
            best = cost
            best_perm = perm
        elif second is None or cost < second:
            second = cost
    if (
        second is not None
        and not ambiguity_ok
        and second - best < 1e-9 * (1 + best)
    ):
        raise SheetContinuationAmbiguity(
            f"fiber matching degenerate (costs {best:.3e} / {second:.3e})"
        )
    return np.array([prev_sheets[best_perm[i]] for i in range(n)])


def build_samples(model, grid):
    """Discretize the curve over both base regions (see module docstring)."""
    regions = []
    meta = {"dropped_area": 0.0, "grid_hash": grid.grid_hash()}

    for region in (0, 1):
        F = model.F_A if region == 0 else model.F_B
        if region == 0:
            r_edges = np.linspace(0.0, grid.R, grid.n_rad + 1)
            n_ang = grid.n_ang
            domain = grid.R
        else:
            r_out = 1.0 / grid.R
            n_lin = grid.n_rad_B
            r_geo = r_out * min(1.0 / 3.0, 4.0 / n_lin)
            lin = np.linspace(r_geo, r_out, n_lin + 1)
            geo = [r_geo]
            while geo[-1] > grid.v_min * 2:
                geo.append(geo[-1] / np.sqrt(2.0))
            geo.append(grid.v_min)
            r_edges = np.unique(np.concatenate([[grid.v_min], geo[::-1], lin]))
            n_ang = grid.n_ang_B
            domain = r_out
            meta["dropped_area"] += np.pi * grid.v_min**2
        centers, areas, metas = _polar_cells(r_edges, n_ang)
        refine = _fiber_critical_bases(F, domain * 1.2)
        refine = [c for c in refine if abs(c) <= domain * 1.05]
        centers, areas, levels, dropped = _subdivide_near(
            centers, areas, metas, refine, grid.delta_b, grid.delta_min
        )
        meta["dropped_area"] += dropped
        meta[f"refine_centers_{region}"] = refine

        order = np.lexsort((np.round(np.angle(centers), 12), np.round(np.abs(centers), 12)))
        centers, areas, levels = centers[order], areas[order], levels[order]

        solved_bases = np.empty(centers.size, dtype=complex)
        n_solved = 0
        solved_roots = []
        solved_sheets = []
        rows = {"base": [], "fiber": [], "sheet": [], "leray": [], "area": [], "level": []}
        refine_arr = np.asarray(refine) if refine else None
        for idx in range(centers.size):
            b = complex(centers[idx])
            roots = solve_fiber(F, b)
            if roots.size == 0:
                continue
            if n_solved:
                dists = np.abs(solved_bases[:n_solved] - b)
                j = int(np.argmin(dists))
                near_branch = (
                    refine_arr is not None
                    and np.min(np.abs(refine_arr - b)) < 2 * grid.delta_b
                )
                sheets = _match_sheets(
                    solved_roots[j], solved_sheets[j], roots, ambiguity_ok=near_branch
                )
            else:
                order_r = np.lexsort((np.round(roots.imag, 10), np.round(roots.real, 10)))
                roots = roots[order_r]
                sheets = np.arange(roots.size)
            solved_bases[n_solved] = b
            n_solved += 1
            solved_roots.append(roots)
            solved_sheets.append(sheets)
            der = F.d_w2(b, roots)
            for rt, sh, dd in zip(roots, sheets, der):
                if abs(dd) < 1e-300:
                    continue
                rows["base"].append(b)
                rows["fiber"].append(rt)
                rows["sheet"].append(sh)
                rows["leray"].append(1.0 / dd)
                rows["area"].append(areas[idx])
                rows["level"].append(levels[idx])
        regions.append(
            dict(
                region=np.full(len(rows["base"]), region, dtype=np.int8),
                base=np.array(rows["base"], dtype=complex),
                fiber=np.array(rows["fiber"], dtype=complex),
                sheet=np.array(rows["sheet"], dtype=np.int32),
                leray=np.array(rows["leray"], dtype=complex),
                area=np.array(rows["area"], dtype=float),
                level=np.array(rows["level"], dtype=np.int16),
            )
        )

    merged = {
        key: np.concatenate([r[key] for r in regions])
        for key in ("region", "base", "fiber", "sheet", "leray", "area", "level")
    }
    ss = SampleSet(meta=meta, **merged)
    bad = ~np.isfinite(ss.leray) | ~np.isfinite(ss.zeta).all(axis=1)
    if np.any(bad):
        raise ResidualRootError("non-finite sample data")
    return ss


# ---------------------------------------------------------------------------
# forms on the curve


class CurveFormSamples:
    """Values of a section or (0,1)-form coefficient on the curve samples.

    ``values[i]`` is the coefficient in sample i's own chart frame (d wbar_1
    frame for forms, plain value for functions).  ``ell`` tags the
    homogeneity of the cone lift.  ``evaluator(chart, w1, w2)``, when
    present, extends the object off the sample set.
    """

    def __init__(self, model, values, ell=0, role="form01", evaluator=None):
        self.model = model
        self.values = np.asarray(values, dtype=complex)
        if model.samples is not None and self.values.shape != (model.samples.size,):
            raise ValueError("values must align with the model's sample set")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite form values")
        self.ell = int(ell)
        self.role = role
        self.evaluator = evaluator

    @classmethod
    def from_evaluator(cls, model, evaluator, ell=0, role="form01"):
        s = model.samples
        chart = s.chart_id()
        vals = evaluator(chart, s.base, s.fiber)
        return cls(model, vals, ell=ell, role=role, evaluator=evaluator)

    def sphere_values(self):
        """Coefficients at the unit-sphere representatives.

        Functions scale by rho^ell; (0,1)-coefficients by rho^(ell-1), i.e.
        conj(t)^(-1) t^ell at real t = rho.
        """
        rho = self.model.samples.rho
        if self.role == "function":
            return self.values * rho**self.ell
        return self.values * rho ** (self.ell - 1)

    def scaled(self, factor):
        return CurveFormSamples(
            self.model, factor * self.values, ell=self.ell, role=self.role,
            evaluator=(lambda c, w1, w2, f=self.evaluator, a=factor: a * f(c, w1, w2))
            if self.evaluator
            else None,
        )

    def plus(self, other, coeff=1.0):
        if other.ell != self.ell or other.role != self.role:
            raise HomogeneityMismatch("cannot combine forms of different type")
        ev = None
        if self.evaluator and other.evaluator:
            ev = lambda c, w1, w2, f=self.evaluator, g=other.evaluator, a=coeff: f(c, w1, w2) + a * g(c, w1, w2)
        return CurveFormSamples(
            self.model, self.values + coeff * other.values, ell=self.ell,
            role=self.role, evaluator=ev,
        )


def lift_form(model, chart_values, ell, role="form01", evaluator=None, check_tol=None):
    """Wrap chart-frame values as a homogeneity-``ell`` object on the curve.

    With an evaluator and ``check_tol`` set, chart-overlap compatibility is
    verified and :class:`HomogeneityMismatch` raised on failure.
    """
    form = CurveFormSamples(model, chart_values, ell=ell, role=role, evaluator=evaluator)
    if evaluator is not None and check_tol is not None:
        res = check_overlap_compatibility(model, evaluator, ell, role)
        if res > check_tol:
            raise HomogeneityMismatch(
                f"overlap residual {res:.2e} exceeds {check_tol:.2e}"
            )
    return form


def check_overlap_compatibility(model, evaluator, ell, role="form01", n_points=24):
    """Max relative residual of the chart-transition rule on the overlap.

    At |w1| slightly inside R the same curve points are computed in both
    base charts and the evaluator's two representations are compared:
    functions obey  g_B = v1^ell g_A, (0,1)-coefficients obey
    phi_B = -v1^ell phi_A / conj(v1)^2.
    """
    R = model.grid.R if model.grid else 2.0
    radius = 0.93 * R
    worst = 0.0
    for k in range(n_points):
        w1 = radius * np.exp(2j * np.pi * (k + 0.31) / n_points)
        v1 = 1.0 / w1
        try:
            roots_A = solve_fiber(model.F_A, w1)
        except ResidualRootError:
            continue
        for w2 in roots_A:
            v2 = w2 / w1
            val_A = evaluator(np.array([0]), np.array([w1]), np.array([w2]))[0]
            val_B = evaluator(np.array([1]), np.array([v1]), np.array([v2]))[0]
            if role == "function":
                pred_B = v1**ell * val_A
            else:
                pred_B = -(v1**ell) * val_A / np.conj(v1) ** 2
            scale = max(abs(val_B), abs(pred_B), 1e-12)
            worst = max(worst, abs(val_B - pred_B) / scale)
    return worst


def chart_point_data(model, chart, base, fiber):
    """Frame data of curve points given in a base region's coordinates.

    Returns a dict of arrays: the chart polynomial derivatives, the Leray
    weight, the sheet slope eta' = d(fiber)/d(base) on the curve, the
    orientation sign, the unit sphere representative and its scale rho.
    """
    base = np.atleast_1d(np.asarray(base, dtype=complex))
    fiber = np.atleast_1d(np.asarray(fiber, dtype=complex))
    chart_arr = np.broadcast_to(np.atleast_1d(chart), base.shape)
    F_b = np.empty(base.shape, dtype=complex)
    F_f = np.empty(base.shape, dtype=complex)
    lift = np.ones(base.shape + (3,), dtype=complex)
    sign = np.ones(base.shape)
    for c, F in ((0, model.F_A), (1, model.F_B)):
        m = chart_arr == c
        if not np.any(m):
            continue
        F_b[m] = F.d_w1(base[m], fiber[m])
        F_f[m] = F.d_w2(base[m], fiber[m])
        if c == 0:
            lift[m, 1] = base[m]
            lift[m, 2] = fiber[m]
        else:
            lift[m, 0] = base[m]
            lift[m, 2] = fiber[m]
            sign[m] = -1.0
    rho = 1.0 / np.sqrt(np.sum(np.abs(lift) ** 2, axis=-1))
    return {
        "F_b": F_b,
        "F_f": F_f,
        "leray": 1.0 / F_f,
        "eta_prime": -F_b / F_f,
        "sign": sign,
        "rho": rho,
        "zeta": lift * rho[..., None],
    }


def continue_fiber(F, base, fiber_hint, tol=_ROOT_TOL):
    """Track a fiber root to a nearby base point by Newton from a hint."""
    w2 = np.asarray(fiber_hint, dtype=complex).copy()
    base = np.asarray(base, dtype=complex)
    for _ in range(60):
        val = F.evaluate(base, w2)
        if np.all(np.abs(val) < tol):
            break
        der = F.d_w2(base, w2)
        w2 = w2 - val / der
    if np.any(np.abs(F.evaluate(base, w2)) > 100 * tol):
        raise ResidualRootError("fiber continuation failed")
    return w2


def choose_probes(model, n, seed=0, radius_band=(0.35, 0.55), min_branch_dist=None):
    """Deterministic interior sample indices usable as evaluation targets.

    Probes sit in region A, mid-annulus, away from discriminant bases and
    node bases by at least ``min_branch_dist`` (default 2 delta_b).
    """
    s = model.samples
    grid = model.grid
    min_d = min_branch_dist if min_branch_dist is not None else 2.5 * grid.delta_b
    branch = list(model.samples.meta.get("refine_centers_0", []))
    branch += [n.base for n in model.nodes if n.chart == 0]
    lo, hi = radius_band[0] * grid.R, radius_band[1] * grid.R
    ok = (s.region == 0) & (np.abs(s.base) >= lo) & (np.abs(s.base) <= hi)
    for b in branch:
        ok &= np.abs(s.base - b) > min_d
    idx = np.nonzero(ok)[0]
    if idx.size == 0:
        raise ValueError("no admissible probe samples; widen the band")
    rng = np.random.default_rng(seed)
    pick = rng.choice(idx.size, size=min(n, idx.size), replace=False)
    return np.sort(idx[pick])
