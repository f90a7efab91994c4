"""The explicit integral operators L and I on plane-curve residual data.

Both operators integrate over the unit-sphere circle bundle above the
curve.  After Leray reduction the integral over a curve sample s with
unit representative zeta(s) (scale rho, chart sign sigma, Leray weight
lam = 1/(dF/dfiber), base cell area dA) and phase fiber t = rho e^{i phi}
takes the form

    sum_s sigma phi_chart lam dA rho^(ell+3-d) * FIBER(s, z),

with d the curve degree and ell the homogeneity of the input form; the
common factor rho^(ell+3-d) collects the cone weights once all kernel
polynomials are evaluated on unit representatives.

For L the fiber integrand is a trigonometric polynomial: with
a = <zbar, zeta_u> and M_{k,s'} the zeta-degree-s' part of the kernel
determinant det[zbar Q dzbar], the phase integral keeps the single
Fourier mode s' = d - 3 - ell - r of the Hefer column.  It is evaluated
by the exact uniform rule with 2(d + r + 5) nodes.

For I the fiber integrand is rational in u = e^{i phi},

    i rho^(ell+3-d) sum_s' D_s' u^k / ((a u - 1)(1 - conj(a)/u)),
    k = ell + 2 - d + s',   D_s' = det[zbar, zetabar_u, Qtilde_s'],

integrated adaptively by trapezoid doubling; samples whose pole
|u| = |a| sits close to the contour switch to the exact residue sum.
The target's Cauchy singularity is handled by the graded singular patch
of the quadrature engine, with the innermost disk dropped.

All scalar normalizations (2 pi i factors, wedge reordering signs, area
conventions) are absorbed into the calibrated constants.
"""

from __future__ import annotations

import itertools
import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import gallery
from .curve_model import (
    CurveFormSamples,
    chart_point_data,
    choose_probes,
    continue_fiber,
)
from .quad_engine import form_l2_norm, singular_patch
from .residue_ops import dualizing_sections, residual_pairing

__all__ = [
    "CalibrationMissing",
    "CalibrationInconsistent",
    "NotClosed",
    "EmptySum",
    "KernelCalibration",
    "KernelTargets",
    "targets_from_samples",
    "targets_at",
    "apply_L",
    "apply_I",
    "exactness_test",
    "calibrate",
    "numerical_dbar_on_curve",
    "load_calibration_cache",
    "store_calibration_cache",
]

_EPS3 = {  # epsilon_{ijk}
    (0, 1, 2): 1,
    (1, 2, 0): 1,
    (2, 0, 1): 1,
    (0, 2, 1): -1,
    (2, 1, 0): -1,
    (1, 0, 2): -1,
}


class CalibrationMissing(Exception):
    """Kernel constants for this (curve, grid, ell) are not available."""


class CalibrationInconsistent(Exception):
    """Independent test families disagree on a kernel constant; a kernel
    implementation bug, not a data problem."""


class NotClosed(Exception):
    """Input form failed the closedness sanity check."""


class EmptySum(Exception):
    """The r-range of the L kernel is empty (ell > d - 3)."""


# ---------------------------------------------------------------------------
# calibration record


@dataclass
class KernelCalibration:
    curve_hash: str
    grid_hash: str
    ell: int
    c_I: complex
    c_L: dict  # r -> complex
    residual_I: float
    residual_L: float
    provenance: str = ""

    def to_json_dict(self):
        return {
            "curve_hash": self.curve_hash,
            "grid_hash": self.grid_hash,
            "ell": self.ell,
            "c_I": [self.c_I.real, self.c_I.imag],
            "c_L": {str(r): [c.real, c.imag] for r, c in sorted(self.c_L.items())},
            "residual_I": self.residual_I,
            "residual_L": self.residual_L,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            curve_hash=d["curve_hash"],
            grid_hash=d["grid_hash"],
            ell=int(d["ell"]),
            c_I=complex(d["c_I"][0], d["c_I"][1]),
            c_L={int(r): complex(v[0], v[1]) for r, v in d["c_L"].items()},
            residual_I=d["residual_I"],
            residual_L=d["residual_L"],
            provenance=d.get("provenance", ""),
        )

    def key(self):
        return f"{self.curve_hash}:{self.grid_hash}:{self.ell}"


def load_calibration_cache(path, model, ell):
    """Cached constants for (curve hash, grid hash, ell), or None."""
    if not path or not os.path.exists(path):
        return None
    with open(path) as fh:
        data = json.load(fh)
    key = f"{model.curve_hash()}:{model.grid.grid_hash()}:{ell}"
    if key in data:
        return KernelCalibration.from_json_dict(data[key])
    return None


def store_calibration_cache(path, calib):
    """Atomically merge one calibration record into the JSON cache."""
    data = {}
    if os.path.exists(path):
        with open(path) as fh:
            data = json.load(fh)
    data[calib.key()] = calib.to_json_dict()
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# targets


class KernelTargets:
    """Curve points at which operator values are requested."""

    def __init__(self, model, chart, base, fiber):
        self.model = model
        self.chart = np.atleast_1d(np.asarray(chart)).astype(int)
        self.base = np.atleast_1d(np.asarray(base, dtype=complex))
        self.fiber = np.atleast_1d(np.asarray(fiber, dtype=complex))
        data = chart_point_data(model, self.chart, self.base, self.fiber)
        self.rho = data["rho"]
        self.zeta = data["zeta"]
        self.eta_prime = data["eta_prime"]
        self.sign = data["sign"]

    @property
    def size(self):
        return self.base.size

    def chart_frame_form(self, comp0, comp1, comp2, ell):
        """Chart-frame d(conj base) coefficient of sum_k L_k dzbar_k.

        The pullback along the sphere slice contracts the radial direction
        to zero, leaving rho^(1-ell) (L_b + conj(eta') L_f) with (b, f) the
        target chart's base/fiber ambient axes.
        """
        comps = np.stack([comp0, comp1, comp2], axis=-1)
        out = np.empty(self.size, dtype=complex)
        for c, (ib, if_) in ((0, (1, 2)), (1, (0, 2))):
            m = self.chart == c
            if np.any(m):
                out[m] = self.rho[m] ** (1 - ell) * (
                    comps[m, ib] + np.conj(self.eta_prime[m]) * comps[m, if_]
                )
        return out

    def chart_frame_function(self, values, ell):
        """Chart representative of a homogeneity-ell function on targets."""
        return values * self.rho ** (-ell)


def targets_from_samples(model, indices):
    s = model.samples
    idx = np.asarray(indices, dtype=int)
    return KernelTargets(model, s.chart_id()[idx], s.base[idx], s.fiber[idx])


def targets_at(model, chart, base, fiber_hint):
    """Single-point targets with the fiber polished from a hint."""
    F = model.F_A if chart == 0 else model.F_B
    fiber = continue_fiber(F, np.atleast_1d(base), np.atleast_1d(fiber_hint))
    return KernelTargets(model, chart, base, fiber)


# ---------------------------------------------------------------------------
# per-sample-set kernel workspace


class _Workspace:
    """Target-independent kernel data over one sample set.

    Monomials of the Hefer columns are split by zeta-degree and evaluated
    on the unit representatives once; kernels then pair them with pure
    z-powers per target.
    """

    def __init__(self, model, samples):
        self.samples = samples
        d = model.degree
        if not hasattr(model, "_hefer"):
            from .poly_core import hefer_decompose

            model._hefer = hefer_decompose(model.poly)
        hef = model._hefer
        zu = samples.zeta
        cols = [zu[:, 0], zu[:, 1], zu[:, 2]]
        # mono[j][s'] = list of (coeff, zeta_product_array, z_exps)
        self.mono = [dict() for _ in range(3)]
        for j in range(3):
            for sprime, terms in hef.qs[j].graded_by_zeta().items():
                entries = []
                for (a, b, c) in terms:
                    prod = np.ones(samples.size, dtype=complex)
                    for col, e in zip(cols, a):
                        if e:
                            prod = prod * col**e
                    entries.append((c, prod, b))
                self.mono[j][sprime] = entries
        self.zbar = np.conj(zu)

    def q_grade(self, j, sprime, z):
        """Qtilde^j_{s'}(zeta_u, z) as an array over samples."""
        entries = self.mono[j].get(sprime)
        if not entries:
            return None
        z0, z1, z2 = z
        out = None
        for c, prod, b in entries:
            zfac = c * z0 ** b[0] * z1 ** b[1] * z2 ** b[2]
            out = zfac * prod if out is None else out + zfac * prod
        return out


def _workspace(model, samples=None):
    samples = samples if samples is not None else model.samples
    cache = getattr(model, "_kernel_ws", None)
    if cache is None:
        cache = {}
        model._kernel_ws = cache
    key = id(samples)
    if key not in cache:
        cache[key] = _Workspace(model, samples)
    return cache[key]


def _base_weights(model, phi, samples=None, values=None):
    """sigma * phi * leray * dA * rho^(ell+3-d) per sample."""
    s = samples if samples is not None else model.samples
    vals = values if values is not None else phi.values
    d = model.degree
    return s.sign * vals * s.leray * s.area * s.rho ** (phi.ell + 3 - d)


# ---------------------------------------------------------------------------
# the L operator


def _phase_sums(d, ell, r):
    """Uniform-rule phase integrals (1/M) sum_n e^{i m phi_n} for every
    Hefer grade s' at this r; M = 2(d + r + 5) integrates the degree-bounded
    trigonometric integrand exactly."""
    M = 2 * (d + r + 5)
    n = np.arange(M)
    out = {}
    for sprime in range(d):
        m = r + ell + 3 - d + sprime
        out[sprime] = complex(np.sum(np.exp(1j * 2 * np.pi * m * n / M)) / M)
    return out


def _factorial(n):
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def _multinomials(r):
    out = []
    for a0 in range(r + 1):
        for a1 in range(r + 1 - a0):
            a2 = r - a0 - a1
            out.append(
                ((a0, a1, a2), _factorial(r) // (_factorial(a0) * _factorial(a1) * _factorial(a2)))
            )
    return out


def _l_moments(model, phi, samples=None, values=None):
    """Sample moments MOM[r][alpha][(j, s')][m] = sum_s w_s zeta^alpha A_m.

    Factorizes the L kernel so evaluation at each target is a pure
    z-polynomial; the sample reduction happens once, in deterministic
    order.
    """
    d = model.degree
    ell = phi.ell
    r_top = d - 3 - ell
    ws = _workspace(model, samples)
    s = ws.samples
    w = _base_weights(model, phi, samples=s, values=values)
    zu = s.zeta
    moments = {}
    for r in range(r_top + 1):
        ps = _phase_sums(d, ell, r)
        live = [sp for sp, v in ps.items() if abs(v) > 1e-9]
        per_alpha = {}
        for alpha, mult in _multinomials(r):
            za = np.ones(s.size, dtype=complex)
            for col, e in zip((zu[:, 0], zu[:, 1], zu[:, 2]), alpha):
                if e:
                    za = za * col**e
            table = {}
            for j in range(3):
                for sp in live:
                    entries = ws.mono[j].get(sp)
                    if not entries:
                        continue
                    sums = [complex(np.sum(w * za * prod)) for (_c, prod, _b) in entries]
                    table[(j, sp)] = (
                        [c for (c, _p, _b) in entries],
                        [b for (_c, _p, b) in entries],
                        sums,
                        ps[sp],
                    )
            per_alpha[alpha] = (mult, table)
        moments[r] = per_alpha
    return moments


def _l_eval(moments, targets, ell, d, c_L):
    """Evaluate the moment-factorized L at target points.

    Returns the three ambient components (coefficients of dzbar_k).
    """
    zb = np.conj(targets.zeta)  # (T, 3)
    z = targets.zeta
    comps = [np.zeros(targets.size, dtype=complex) for _ in range(3)]
    for r, per_alpha in moments.items():
        cr = c_L.get(r)
        if cr is None:
            raise CalibrationMissing(f"no L constant for r={r}")
        for alpha, (mult, table) in per_alpha.items():
            za_bar = zb[:, 0] ** alpha[0] * zb[:, 1] ** alpha[1] * zb[:, 2] ** alpha[2]
            pref = 2j * np.pi * cr * mult * za_bar
            qvals = {}
            for (j, sp), (cs, bs, sums, ps) in table.items():
                acc = np.zeros(targets.size, dtype=complex)
                for c, b, ssum in zip(cs, bs, sums):
                    acc += (c * ssum) * z[:, 0] ** b[0] * z[:, 1] ** b[1] * z[:, 2] ** b[2]
                qvals[(j, sp)] = acc * ps
            for (i, j, k), signv in _EPS3.items():
                for sp in range(d):
                    qv = qvals.get((j, sp))
                    if qv is None:
                        continue
                    comps[k] += signv * pref * zb[:, i] * qv
    return comps


def apply_L(model, phi, targets=None, calibration=None, raw_r=None):
    """The class-detecting operator L, evaluated at curve targets.

    With ``raw_r`` set, returns the single unweighted r-term (constant 1),
    used by calibration.  Otherwise ``calibration`` must provide c_L.
    Output is the chart-frame (0,1)-coefficient array plus an evaluator;
    when targets are omitted the full sample set is used and the result is
    wrapped as a CurveFormSamples.
    """
    if not np.all(np.isfinite(phi.values)):
        raise NotClosed("form carries non-finite values")
    d = model.degree
    ell = phi.ell
    r_top = d - 3 - ell
    wrap = targets is None
    if wrap:
        targets = targets_from_samples(model, np.arange(model.samples.size))
    if r_top < 0:
        zero = np.zeros(targets.size, dtype=complex)
        if wrap:
            return CurveFormSamples(
                model, zero, ell=ell, role="form01",
                evaluator=lambda c, w1, w2: np.zeros(
                    np.broadcast(np.atleast_1d(c), np.atleast_1d(w1)).shape, dtype=complex
                ),
            )
        return zero

    if raw_r is not None:
        c_L = {r: (1.0 if r == raw_r else 0.0) for r in range(r_top + 1)}
    else:
        if calibration is None:
            raise CalibrationMissing("apply_L needs a KernelCalibration (or raw_r)")
        c_L = calibration.c_L
        for r in range(r_top + 1):
            if r not in c_L:
                raise CalibrationMissing(f"calibration lacks c_L[{r}]")

    moments = _l_moments(model, phi)
    comps = _l_eval(moments, targets, ell, d, c_L)
    values = targets.chart_frame_form(*comps, ell)

    def evaluator(chart, w1, w2):
        t = KernelTargets(model, chart, w1, w2)
        cc = _l_eval(moments, t, ell, d, c_L)
        return t.chart_frame_form(*cc, ell)

    if wrap:
        return CurveFormSamples(model, values, ell=ell, role="form01", evaluator=evaluator)
    return values, evaluator


# ---------------------------------------------------------------------------
# the I operator


def _residue_J(k, a):
    """Closed form of J(k, a) = oint u^k dphi / ((a u - 1)(1 - conj(a)/u)).

    Pole u = conj(a) always lies inside; u = 0 contributes for k <= -1.
    """
    b = np.conj(a)
    denom = np.abs(a) ** 2 - 1.0
    out = 2 * np.pi * b ** float(k) / denom if k >= 0 else 2 * np.pi * b**k / denom
    if k <= -1:
        M = -1 - k
        c = np.zeros_like(a)
        for m in range(M + 1):
            c = c + a**m * b ** (m - M - 1)
        out = out + 2 * np.pi * c
    return out


def _trapezoid_J(ks, a, dvals, tol=1e-8, n0=32, nmax=1024):
    """Adaptive trapezoid of sum_s' D_s' u^{k_s'} / ((au-1)(1-b/u)).

    Returns the combined fiber sum (the i rho^... prefactor is applied by
    the caller).  Falls back to residues where the doubling has not
    converged at ``nmax`` (pole too close to the contour).
    """
    b = np.conj(a)
    S = a.shape[0]

    def eval_N(N, idx):
        u = np.exp(2j * np.pi * np.arange(N) / N)
        au = a[idx, None] * u[None, :]
        bu = b[idx, None] / u[None, :]
        denom = (au - 1.0) * (1.0 - bu)
        acc = np.zeros((idx.size, N), dtype=complex)
        for k, dv in zip(ks, dvals):
            acc += dv[idx, None] * u[None, :] ** k
        return np.sum(acc / denom, axis=1) * (2 * np.pi / N)

    out = np.zeros(S, dtype=complex)
    active = np.arange(S)
    prev = eval_N(n0, active)
    N = n0
    while active.size and N < nmax:
        N *= 2
        cur = eval_N(N, active)
        done = np.abs(cur - prev) <= tol * (np.abs(cur) + 1.0)
        out[active[done]] = cur[done]
        active = active[~done]
        prev = cur[~done]
    if active.size:
        res = np.zeros(active.size, dtype=complex)
        for k, dv in zip(ks, dvals):
            res += dv[active] * _residue_J(k, a[active]) / (2 * np.pi)
        out[active] = res * 2 * np.pi
    return out


def _i_fiber(model, ws, phi_ell, z, method="auto"):
    """FIBER factors of the I kernel for one target z over a sample set."""
    d = model.degree
    s = ws.samples
    zb = np.conj(z)
    a = s.zeta @ zb
    # D_s' = det[zbar, zetabar_u, Qtilde_s'] per grade
    zeta_b = ws.zbar
    ks = []
    dvals = []
    for sprime in range(d):
        parts = [ws.q_grade(j, sprime, z) for j in range(3)]
        if all(p is None for p in parts):
            continue
        q = [p if p is not None else 0.0 for p in parts]
        D = (
            zb[0] * (zeta_b[:, 1] * q[2] - zeta_b[:, 2] * q[1])
            - zb[1] * (zeta_b[:, 0] * q[2] - zeta_b[:, 2] * q[0])
            + zb[2] * (zeta_b[:, 0] * q[1] - zeta_b[:, 1] * q[0])
        )
        ks.append(phi_ell + 2 - d + sprime)
        dvals.append(D)
    if method == "residue":
        fib = np.zeros(s.size, dtype=complex)
        for k, dv in zip(ks, dvals):
            fib += dv * _residue_J(k, a)
    elif method == "trapezoid":
        fib = _trapezoid_J(ks, a, dvals)
    else:
        near = np.abs(a) > 0.9
        fib = np.zeros(s.size, dtype=complex)
        if np.any(near):
            sub = np.nonzero(near)[0]
            for k, dv in zip(ks, dvals):
                fib[sub] += dv[sub] * _residue_J(k, a[sub])
        if np.any(~near):
            sub = np.nonzero(~near)[0]
            fib[sub] = _trapezoid_J(ks, a[sub], [dv[sub] for dv in dvals])
    # the rho^(ell+3-d) cone weight lives in _base_weights
    return 1j * fib


def _phi_values_on(model, phi, samples):
    if phi.evaluator is None:
        raise ValueError("apply_I needs a form with an evaluator")
    return phi.evaluator(samples.chart_id(), samples.base, samples.fiber)


def apply_I(model, phi, targets, calibration=None, method="auto"):
    """The primitive operator I at the given targets.

    Each target gets a singular patch (ambient cells near its base are
    replaced by graded rings; the innermost disk is dropped).  Values are
    returned in the chart function frame (rho^-ell scaled); an evaluator
    closure extends the result to arbitrary off-branch curve points.
    """
    if not np.all(np.isfinite(phi.values)):
        raise NotClosed("form carries non-finite values")
    c_I = 1.0 if calibration is None else calibration.c_I
    ws_ambient = _workspace(model)
    w_ambient = _base_weights(model, phi)
    s = model.samples

    if not hasattr(model, "_patch_cache"):
        model._patch_cache = {}

    def value_at(chart, base, fiber):
        key = (int(chart), complex(np.round(base.real, 12) + 1j * np.round(base.imag, 12)))
        hit = model._patch_cache.get(key)
        if hit is None:
            patch = singular_patch(model, int(chart), complex(base))
            lws = _workspace(model, patch.local)
            hit = (patch, lws)
            model._patch_cache[key] = hit
        else:
            patch, lws = hit
        lphi = _phi_values_on(model, phi, patch.local)
        w_local = _base_weights(model, phi, samples=patch.local, values=lphi)
        z = chart_point_data(model, int(chart), base, fiber)["zeta"][0]
        fib_a = _i_fiber(model, ws_ambient, phi.ell, z, method)
        wa = w_ambient * patch.weight
        # samples removed by the patch (weight 0) may sit on the kernel
        # singularity; their NaN fiber values carry no mass
        contrib_a = np.where(wa != 0, wa * fib_a, 0.0)
        fib_l = _i_fiber(model, lws, phi.ell, z, method)
        val = complex(np.sum(contrib_a) + np.sum(w_local * patch.local_weight * fib_l))
        return c_I * val

    values = np.empty(targets.size, dtype=complex)
    for i in range(targets.size):
        values[i] = value_at(targets.chart[i], targets.base[i], targets.fiber[i])
    values = targets.chart_frame_function(values, phi.ell)

    def evaluator(chart, w1, w2):
        chart = np.broadcast_to(np.atleast_1d(chart), np.atleast_1d(w1).shape)
        w1 = np.atleast_1d(np.asarray(w1, dtype=complex))
        w2 = np.atleast_1d(np.asarray(w2, dtype=complex))
        t = KernelTargets(model, chart, w1, w2)
        raw = np.array(
            [value_at(t.chart[i], t.base[i], t.fiber[i]) for i in range(t.size)]
        )
        return t.chart_frame_function(raw, phi.ell)

    return values, evaluator


def exactness_test(model, phi, calibration, threshold=1e-2):
    """phi is dbar-exact iff |L[phi]| / |phi| falls below the threshold."""
    norm_phi = form_l2_norm(model, phi.values)
    if norm_phi == 0:
        return True, 0.0
    lform = apply_L(model, phi, calibration=calibration)
    ratio = form_l2_norm(model, lform.values) / norm_phi
    return bool(ratio <= threshold), float(ratio)


# ---------------------------------------------------------------------------
# finite-difference dbar on curve functions


def numerical_dbar_on_curve(model, scalar_evaluator, targets, h=None):
    """Fourth-order FD dbar of a chart-frame function along the curve.

    The stencil moves the base coordinate by +-h, +-2h in both real
    directions and tracks the fiber by Newton continuation; the returned
    values are (0,1) chart-frame coefficients d g / d conj(base).
    """
    h = h if h is not None else model.grid.fd_step
    F = {0: model.F_A, 1: model.F_B}
    out = np.empty(targets.size, dtype=complex)
    offs = np.array([1, -1, 2, -2], dtype=float)
    for i in range(targets.size):
        c = int(targets.chart[i])
        b0 = targets.base[i]
        f0 = targets.fiber[i]
        vals = {}
        for axis, unit in (("x", 1.0), ("y", 1j)):
            bases = b0 + offs * h * unit
            fibers = continue_fiber(F[c], bases, np.full(4, f0))
            vv = scalar_evaluator(np.full(4, c), bases, fibers)
            vals[axis] = (-vv[2] + 8 * vv[0] - 8 * vv[1] + vv[3]) / (12 * h)
        out[i] = 0.5 * (vals["x"] + 1j * vals["y"])
    return out


# ---------------------------------------------------------------------------
# calibration


def _fit_c_I_on(model, fn, seed):
    """Least-squares c with c * I_raw[dbar g] = g + const on probe targets."""
    from .forms import dbar_of

    phi = dbar_of(model, fn)
    idx = choose_probes(model, 12, seed=seed)
    targets = targets_from_samples(model, idx)
    raw, _ = apply_I(model, phi, targets)
    gvals = fn.value(targets.chart, targets.base, targets.fiber)
    A = np.stack([raw, np.ones_like(raw)], axis=1)
    sol, *_ = np.linalg.lstsq(A, gvals, rcond=None)
    resid = np.linalg.norm(A @ sol - gvals) / max(np.linalg.norm(gvals), 1e-300)
    return complex(sol[0]), float(resid)


def calibrate(model, ell=0, seed=0, reference_grid=None, cache_path=None):
    """Fit the kernel constants for (model, grid, ell).

    c_I is fixed on the projective line and cross-checked on a conic (the
    constant does not depend on the curve); c_L(r) is fixed by matching
    residual-class pairings of L[phi] to those of phi, then cross-validated
    through the finite-difference homotopy residual on a held-out form.
    """
    from .forms import adjoint_conjugate_form, battery, bump_function, dbar_of

    if cache_path:
        hit = load_calibration_cache(cache_path, model, ell)
        if hit is not None:
            return hit

    grid = reference_grid or model.grid
    line = gallery.projective_line().with_samples(grid)
    conic = gallery.parabola_conic().with_samples(grid)

    c1, r1 = _fit_c_I_on(line, bump_function(0.35 + 0.2j, 0.5), seed)
    c2, r2 = _fit_c_I_on(line, bump_function(-0.45 + 0.15j, 0.45), seed + 1)
    c3, r3 = _fit_c_I_on(conic, bump_function(0.3 - 0.25j, 0.45), seed + 2)
    spread = max(abs(c1 - c2), abs(c1 - c3)) / abs(c1)
    if spread > 1e-2:
        raise CalibrationInconsistent(
            f"independent c_I estimates disagree by {spread:.2e}"
        )
    c_I = (c1 + c2) / 2

    d = model.degree
    r_top = d - 3 - ell
    c_L = {}
    residual_L = 0.0
    if r_top >= 0:
        secs = dualizing_sections(model, ell=ell)
        fit_forms = []
        if ell == 0:
            fit_forms.append(adjoint_conjugate_form(model, {(0, 0): 1.0}))
        for name, f in battery(model, seed=seed):
            if name.startswith("mono_bump"):
                fit_forms.append(f)
        rows = []
        rhs = []
        for phi in fit_forms:
            if phi.ell != ell:
                phi = CurveFormSamples(model, phi.values, ell=ell, role="form01",
                                       evaluator=phi.evaluator)
            raws = []
            for r in range(r_top + 1):
                lr = apply_L(model, phi, raw_r=r)
                raws.append(lr)
            for gamma in secs:
                rows.append([residual_pairing(lr, gamma) for lr in raws])
                rhs.append(residual_pairing(phi, gamma))
        A = np.array(rows, dtype=complex)
        bvec = np.array(rhs, dtype=complex)
        sol, *_ = np.linalg.lstsq(A, bvec, rcond=None)
        c_L = {r: complex(sol[r]) for r in range(r_top + 1)}
        fit_res = np.linalg.norm(A @ sol - bvec) / max(np.linalg.norm(bvec), 1e-300)
        if fit_res > 1e-2:
            raise CalibrationInconsistent(
                f"L pairing fit residual {fit_res:.2e} exceeds 1e-2"
            )

    calib = KernelCalibration(
        curve_hash=model.curve_hash(),
        grid_hash=model.grid.grid_hash(),
        ell=ell,
        c_I=c_I,
        c_L=c_L,
        residual_I=float(spread),
        residual_L=residual_L,
        provenance="line+conic bumps (c_I); class pairings (c_L)",
    )

    # cross-validation: homotopy residual on a held-out exact form
    holdout = dbar_of(model, bump_function(0.18 + 0.38j, 0.3))
    if ell == holdout.ell:
        idx = choose_probes(model, 8, seed=seed + 5)
        targets = targets_from_samples(model, idx)
        _vals, i_eval = apply_I(model, holdout, targets, calibration=calib)
        dbar_i = numerical_dbar_on_curve(model, i_eval, targets)
        want = holdout.values[idx]
        if r_top >= 0:
            lvals, _ = apply_L(model, holdout, targets, calibration=calib)
        else:
            lvals = np.zeros(targets.size, dtype=complex)
        resid = np.linalg.norm(dbar_i + lvals - want) / max(
            np.linalg.norm(want), 1e-300
        )
        calib.residual_L = float(resid)
        if resid > 5e-2:
            raise CalibrationInconsistent(
                f"homotopy cross-validation residual {resid:.2e}"
            )

    if cache_path:
        store_calibration_cache(cache_path, calib)
    return calib
