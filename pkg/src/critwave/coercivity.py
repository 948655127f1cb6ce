"""Quadratic-form verification: index count, decay-selected inversions, Gram
matrix, and the supporting inequality spot checks.

The form is B = -Delta + W with W = 2V + (3/2) r V' (explicit rational
function, W(0) = 6, W ~ -768/r^4). Its index is counted two ways:

* directly, by Sturm oscillation: integrate B U = 0 from U(0)=1, U'(0)=0 and
  count sign changes;
* through the comparison potential What = -(3/2) r^2/(1 + r^2/8)^3 <= W,
  whose zero-energy solution reduces, after the substitutions
  Uhat = (2/r^2) Ubar(r^2/2) and Ubar(s) = sqrt(1+s/4) Ut(1/sqrt(1+s/4)),
  to the order-one Bessel combination Ut(tau) = C1 J1(4 sqrt6 tau) +
  C2 Y1(4 sqrt6 tau) with boundary data Ut(1) = 0, Ut'(1) = -8. Counting its
  zeros on (0,1) and checking tau*Ut -> K != 0 at tau -> 0 reproduces the
  direct count.

Inversions B^{-1} f are computed by shooting on U(0): for the linear ODE the
far-field value is affine in U(0), so two probe integrations bracket the
decaying solution and a short bisection polishes it. Decay selection:
B^{-1} psi ~ 1/r^2, B^{-1} Phi ~ (a log r + c)/r^2 with a = -192 forced by
the r^-4 tail of the forcing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import groundstate as gs
from .errors import (
    NoSignChange,
    SingularBesselSystem,
    TailFitUnstable,
    TailMismatch,
)
from .numerics import (
    RadialFunction,
    RadialGrid,
    SeriesLaunch,
    bessel_j1_y1,
    bessel_j1_y1_derivatives,
    integrate_between,
    quadrature,
    radial_derivatives,
)
from .spectral import EigenPair

__all__ = [
    "IndexReport",
    "GramMatrix",
    "apply_B",
    "w_hat",
    "count_index_direct",
    "count_index_bessel",
    "invert_B",
    "gram_matrix",
    "hardy_spot_check",
]


def apply_B(values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """-Delta u + W u at the nodes (5-point stencils)."""
    nodes = np.asarray(nodes, dtype=float)
    d1, d2 = radial_derivatives(values, nodes)
    return -d2 - 3.0 / nodes * d1 + gs.w_pot(nodes) * values


def w_hat(r):
    """Comparison potential -(3/2) r^2 / (1 + r^2/8)^3 <= W."""
    r = np.asarray(r, dtype=float)
    return -1.5 * r * r / (1.0 + r * r / 8.0) ** 3


# ---------------------------------------------------------------------------
# index counting
# ---------------------------------------------------------------------------

@dataclass
class IndexReport:
    potential: str
    zero_count: int
    zero_locations: tuple
    u_infinity: float | None = None
    bessel_C1: float | None = None
    bessel_C2: float | None = None
    origin_coefficient: float | None = None   # K in Ut ~ K/tau near 0
    origin_coefficient_drift: float | None = None
    diagnostics: dict = field(default_factory=dict)


def _count_sign_changes(x: np.ndarray, f: np.ndarray):
    s = np.sign(f)
    idx = np.nonzero(np.diff(s) != 0)[0]
    locs = []
    for i in idx:
        x0, x1 = x[i], x[i + 1]
        f0, f1 = f[i], f[i + 1]
        locs.append(float(x0 - f0 * (x1 - x0) / (f1 - f0)))
    return len(locs), tuple(locs)


def count_index_direct(grid: RadialGrid | None = None,
                       potential: str = "full") -> IndexReport:
    """Integrate B U = 0 from U(0) = 1, U'(0) = 0 and count sign changes.

    ``potential``: "full" (W), "comparison" (What), or "zero" (free
    Laplacian; the solution is constant and has no zeros).
    """
    if grid is None:
        grid = RadialGrid.geometric(1e-3, 500.0, 8000)
    if grid.r_max < 200.0:
        raise ValueError("index grid must reach r >= 200")
    if potential == "full":
        pot: Callable = gs.w_pot
        c_even = [-6.0, 30.0 / 8.0, -72.0 / 64.0]  # -W expanded at 0
    elif potential == "comparison":
        pot = w_hat
        c_even = [0.0, 1.5, -9.0 / 16.0]           # -What expanded at 0
    elif potential == "zero":
        pot = lambda r: np.zeros_like(np.asarray(r, dtype=float))  # noqa: E731
        c_even = [0.0, 0.0]
    else:
        raise ValueError(f"unknown potential {potential!r}")

    launch = SeriesLaunch.for_even_ode(c_even=c_even, a0=1.0, y0=grid.r_min, order=4)

    def rhs(r, u, du):
        return -3.0 / r * du + float(pot(r)) * u

    u, _ = integrate_between(rhs, launch.y0, float(launch.value(launch.y0)),
                             float(launch.derivative(launch.y0)), grid.nodes,
                             rtol=1e-11, atol=1e-14)
    count, locs = _count_sign_changes(grid.nodes, u)
    return IndexReport(potential=potential, zero_count=count,
                       zero_locations=locs, u_infinity=float(u[-1]))


def count_index_bessel(tau_probe: float = 1e-3) -> IndexReport:
    """Index of the comparison problem via its closed Bessel form.

    Solves Ut(1) = 0, Ut'(1) = -8 for (C1, C2), counts the zeros of
    C1 J1(4 sqrt6 tau) + C2 Y1(4 sqrt6 tau) on (0, 1), and extracts the
    origin coefficient K from tau * Ut(tau) at two probe radii.
    """
    z0 = 4.0 * math.sqrt(6.0)
    j1, y1, dj1, dy1 = bessel_j1_y1_derivatives(z0)
    det = j1 * (z0 * dy1) - y1 * (z0 * dj1)
    if abs(det) < 1e-12:
        raise SingularBesselSystem(f"boundary system determinant {det:.3e}")
    # [ J1(z0)      Y1(z0)    ] [C1]   [ 0]
    # [ z0 J1'(z0)  z0 Y1'(z0)] [C2] = [-8]
    c1 = -(-8.0) * y1 / det
    c2 = (-8.0) * j1 / det

    def ut(tau):
        jj, yy = bessel_j1_y1(z0 * tau)
        return c1 * jj + c2 * yy

    taus = np.linspace(tau_probe, 1.0, 4001)[:-1]  # open at 1: Ut(1)=0 is boundary data
    vals = np.array([ut(t) for t in taus])
    count, locs = _count_sign_changes(taus, vals)
    k1 = tau_probe * ut(tau_probe)
    k2 = 0.5 * tau_probe * ut(0.5 * tau_probe)
    drift = abs(k1 - k2) / max(abs(k1), 1e-300)
    rep = IndexReport(potential="comparison-bessel", zero_count=count,
                      zero_locations=locs, bessel_C1=float(c1),
                      bessel_C2=float(c2), origin_coefficient=float(k1),
                      origin_coefficient_drift=float(drift))
    rep.diagnostics["boundary_value"] = float(ut(1.0))
    rep.diagnostics["boundary_slope"] = float(
        z0 * (c1 * bessel_j1_y1_derivatives(z0)[2] + c2 * bessel_j1_y1_derivatives(z0)[3]))
    rep.diagnostics["uhat_infinity_limit"] = float(k1) / 4.0
    return rep


# ---------------------------------------------------------------------------
# decay-selected inversion
# ---------------------------------------------------------------------------

def invert_B(f: Callable, decay: str,
             grid: RadialGrid | None = None,
             r_solve: float | None = None) -> RadialFunction:
    """Solve -Delta U + W U = f with U'(0) = 0, shooting on U(0) for the
    decaying solution.

    ``decay`` selects the admissible tail: "inverse_square" (U ~ 1/r^2, for
    exponentially localized forcing) or "log_inverse_square"
    (U ~ log r / r^2, for forcing with an r^-4 tail). The homogeneous
    solution tends to a nonzero constant, and U(r_far) is affine in U(0), so
    two probe integrations pin the constant-killing value; a short bisection
    polish guards against conditioning loss.
    """
    if decay not in ("inverse_square", "log_inverse_square"):
        raise ValueError(f"unknown decay selector {decay!r}")
    if r_solve is None:
        r_solve = 3000.0 if decay == "inverse_square" else 8000.0
    if grid is None:
        n = 6000 if decay == "inverse_square" else 9000
        grid = RadialGrid.geometric(1e-3, r_solve, n)

    f0 = float(f(0.0))

    def rhs(r, u, du):
        return -3.0 / r * du + float(gs.w_pot(r)) * u - float(f(r))

    y0 = grid.r_min

    def shoot(u_origin, targets):
        a2 = (gs.w_pot(0.0) * u_origin - f0) / 8.0
        return integrate_between(rhs, y0, u_origin + a2 * y0 ** 2,
                                 2.0 * a2 * y0, targets, rtol=1e-11, atol=1e-14)

    far = [grid.r_max]
    t0 = float(shoot(0.0, far)[0][0])
    t1 = float(shoot(1.0, far)[0][0])
    if t1 == t0:
        raise TailMismatch("far-field value insensitive to U(0)")
    u_star = -t0 / (t1 - t0)
    # bisection polish on the tail sign around the affine prediction
    width = 1e-6 * max(1.0, abs(u_star))
    lo, hi = u_star - width, u_star + width
    flo = float(shoot(lo, far)[0][0])
    fhi = float(shoot(hi, far)[0][0])
    if (flo > 0) == (fhi > 0):
        # affine prediction already at roundoff level; accept it
        pass
    else:
        for _ in range(20):
            mid = 0.5 * (lo + hi)
            fm = float(shoot(mid, far)[0][0])
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi, fhi = mid, fm
        u_star = 0.5 * (lo + hi)

    u, du = shoot(u_star, grid.nodes)

    nodes = grid.nodes
    if decay == "inverse_square":
        win = (nodes >= 100.0) & (nodes <= 300.0)
        diag = nodes[win] ** 2 * u[win]
        tail = {"law": "1/r^2", "coefficient": float(np.mean(diag)),
                "flatness": float((diag.max() - diag.min()) / abs(np.mean(diag)))}
    else:
        win = (nodes >= 200.0) & (nodes <= 1000.0)
        # r^2 U = a log r + c on the window; a is pinned by the forcing tail
        A = np.vstack([np.log(nodes[win]), np.ones(win.sum())]).T
        coef, res, *_ = np.linalg.lstsq(A, nodes[win] ** 2 * u[win], rcond=None)
        fitted = A @ coef
        rel_res = float(np.sqrt(np.mean((nodes[win] ** 2 * u[win] - fitted) ** 2))
                        / np.sqrt(np.mean(fitted ** 2)))
        ratio = nodes[win] ** 2 * u[win] / np.log(nodes[win])
        tail = {"law": "log r / r^2", "log_slope": float(coef[0]),
                "offset": float(coef[1]), "fit_residual": rel_res,
                "ratio_window": (float(ratio[0]), float(ratio[-1]))}
    return RadialFunction(nodes, u, du, tail=tail)


# ---------------------------------------------------------------------------
# Gram matrix
# ---------------------------------------------------------------------------

@dataclass
class GramMatrix:
    """Pairings of the decay-selected inversions with their forcings.

    entry_psi_psi and entry_phi_psi scale like c^2 and c under psi -> c psi;
    entry_phi_phi, the signs, and ``invariant_ratio`` do not.
    """

    entry_psi_psi: float
    entry_phi_psi: float
    entry_psi_phi: float          # adjointness cross-check of entry_phi_psi
    entry_phi_phi: float
    k_tail: float
    k_tail_alt: float
    normalization: str
    truncation_psi: float
    truncation_phi: float

    @property
    def det(self) -> float:
        return self.entry_psi_psi * self.entry_phi_phi - self.entry_phi_psi ** 2

    @property
    def invariant_ratio(self) -> float:
        return self.entry_phi_psi ** 2 / (self.entry_psi_psi * self.entry_phi_phi)

    def as_dict(self) -> dict:
        return {
            "entry_psi_psi": self.entry_psi_psi,
            "entry_phi_psi": self.entry_phi_psi,
            "entry_psi_phi": self.entry_psi_phi,
            "entry_phi_phi": self.entry_phi_phi,
            "det": self.det,
            "invariant_ratio": self.invariant_ratio,
            "k_tail": self.k_tail,
            "k_tail_alt": self.k_tail_alt,
            "normalization": self.normalization,
            "truncation_psi": self.truncation_psi,
            "truncation_phi": self.truncation_phi,
        }


def _truncated_pairing(u: RadialFunction, g: np.ndarray, r_cut: float) -> float:
    m = u.grid <= r_cut
    return quadrature(u.values[m] * g[m], u.grid[m], rule="trapezoid")


def gram_matrix(psi_pair: EigenPair,
                binv_psi: RadialFunction,
                binv_phi: RadialFunction,
                r_psi: float = 18.0,
                m_tail: float = 500.0) -> GramMatrix:
    """Assemble the 2x2 pairing matrix.

    psi-weighted entries truncate at the eigenfunction trust radius. The
    slowly converging (B^{-1}Phi, Phi) is corrected for its truncation error
    err(M) ~ K log M / M^2: K is fitted from I(2M) - I(M) (pure log model)
    and, as a cross-check, from three points with the refined model
    (k1 log M + k0)/M^2, which the true tail law satisfies exactly.
    :class:`TailFitUnstable` fires when the two corrected values disagree by
    more than 20% of the correction itself.
    """
    psi_on = lambda rf: psi_pair.psi(rf.grid)  # noqa: E731

    m11 = _truncated_pairing(binv_psi, psi_on(binv_psi), r_psi)
    m12 = _truncated_pairing(binv_phi, psi_on(binv_phi), r_psi)
    m21 = _truncated_pairing(binv_psi, np.asarray(gs.phi(binv_psi.grid)),
                             binv_psi.grid[-1])

    nodes = binv_phi.grid
    phi_vals = np.asarray(gs.phi(nodes))

    def integral_to(M):
        return _truncated_pairing(binv_phi, phi_vals, M)

    i1, i2, i4 = (integral_to(m_tail), integral_to(2 * m_tail),
                  integral_to(4 * m_tail))

    def log_model(M):
        return math.log(M) / M ** 2

    k2 = (i2 - i1) / (log_model(2 * m_tail) - log_model(m_tail))
    corrected_2pt = i1 - k2 * log_model(m_tail)

    # refined model err(M) = (k1 log M + k0)/M^2 from three truncations
    A = np.array([[log_model(m), 1.0 / m ** 2]
                  for m in (m_tail, 2 * m_tail, 4 * m_tail)])
    A = np.hstack([np.ones((3, 1)), A])  # [true_value, k1, k0]
    sol, *_ = np.linalg.lstsq(A, np.array([i1, i2, i4]), rcond=None)
    corrected_3pt = float(sol[0])
    k3 = float(sol[1])

    corr_size = max(abs(k2) * log_model(m_tail), 1e-30)
    if abs(corrected_2pt - corrected_3pt) > 0.2 * corr_size:
        raise TailFitUnstable(
            f"tail corrections disagree: {corrected_2pt:.6g} (log model) vs "
            f"{corrected_3pt:.6g} (refined), correction size {corr_size:.3g}")

    return GramMatrix(
        entry_psi_psi=float(m11),
        entry_phi_psi=float(m12),
        entry_psi_phi=float(m21),
        entry_phi_phi=float(corrected_3pt),
        k_tail=float(k2),
        k_tail_alt=k3,
        normalization=psi_pair.normalization,
        truncation_psi=r_psi,
        truncation_phi=m_tail,
    )


# ---------------------------------------------------------------------------
# inequality spot checks
# ---------------------------------------------------------------------------

def _test_family(n: int = 20):
    """Smooth radial test functions with analytic first two derivatives:
    (c0 + c2 y^2 + c4 y^4) exp(-a (y/s)^2), deterministic parameter sweep."""
    fams = []
    params = []
    for i in range(n):
        a = 0.35 + 0.17 * (i % 5)
        s = 0.8 + 0.45 * (i % 4)
        c0 = (-1.0) ** i * (0.3 + 0.1 * (i % 3))
        c2 = 0.5 - 0.25 * (i % 4)
        c4 = 0.02 * (i % 3)
        params.append((a, s, c0, c2, c4))
    for a, s, c0, c2, c4 in params:
        k = a / (s * s)

        def make(c0=c0, c2=c2, c4=c4, k=k):
            def u(y):
                return (c0 + c2 * y ** 2 + c4 * y ** 4) * np.exp(-k * y ** 2)

            def du(y):
                p = c0 + c2 * y ** 2 + c4 * y ** 4
                dp = 2 * c2 * y + 4 * c4 * y ** 3
                return (dp - 2 * k * y * p) * np.exp(-k * y ** 2)

            def d2u(y):
                p = c0 + c2 * y ** 2 + c4 * y ** 4
                dp = 2 * c2 * y + 4 * c4 * y ** 3
                d2p = 2 * c2 + 12 * c4 * y ** 2
                return ((d2p - 2 * k * p - 4 * k * y * dp + 4 * k * k * y * y * p)
                        * np.exp(-k * y ** 2))

            return u, du, d2u

        fams.append(make())
    return fams


def hardy_spot_check(n_family: int = 20,
                     grid: RadialGrid | None = None) -> dict:
    """Empirical constants of the weighted inequalities used downstream, over
    a deterministic 20-function family (4D radial measure y^3 dy):

    * hardy0:        int u^2/y^2      <= C int |u'|^2
    * hardyhtwo:     int |u'|^2/y^2   <= C int (Delta u)^2, with the exact
                     split int (Delta u)^2 = int u''^2 + 3 int u'^2/y^2
    * harfylog:      int_{y<=R} u^2 / (y^4 (1+|log y|)^2) <= C [ ... ]
    * harfysanslog:  int_{R<=y<=2R} u^2/y^4 <= C log R [ ... ]
    * subcoercivity: int (H u)^2 = int (Delta u)^2 - 2 int V u'^2
                     + int (Delta V + V^2) u^2  (exact split, checked)
    """
    if grid is None:
        grid = RadialGrid.geometric(1e-4, 60.0, 6000)
    y = grid.nodes
    R = 8.0
    out = {
        "hardy0_worst": 0.0,
        "hardyhtwo_worst": 0.0,
        "harfylog_worst": 0.0,
        "harfysanslog_worst": 0.0,
        "laplacian_split_constant": [],
        "subcoercivity_max_rel_defect": 0.0,
        "scale_invariance_max_variation": 0.0,
        "family_size": n_family,
    }
    vq = gs.v_pot(y)
    dvq = gs.dv_pot(y)
    d2vq = gs.d2v_pot(y)
    lap_v = d2vq + 3.0 / y * dvq

    for u, du, d2u in _test_family(n_family):
        uv, duv, d2uv = u(y), du(y), d2u(y)
        lap = d2uv + 3.0 / y * duv
        grad2 = quadrature(duv ** 2, grid, rule="simpson")
        u_over_y2 = quadrature(uv ** 2 / y ** 2, grid, rule="simpson")
        out["hardy0_worst"] = max(out["hardy0_worst"], u_over_y2 / grad2)

        lap2 = quadrature(lap ** 2, grid, rule="simpson")
        du_over_y2 = quadrature(duv ** 2 / y ** 2, grid, rule="simpson")
        d2_only = quadrature(d2uv ** 2, grid, rule="simpson")
        out["hardyhtwo_worst"] = max(out["hardyhtwo_worst"], du_over_y2 / lap2)
        out["laplacian_split_constant"].append((lap2 - d2_only) / du_over_y2)

        mlog = y <= R
        num = quadrature(uv[mlog] ** 2 / (y[mlog] ** 4 * (1 + np.abs(np.log(y[mlog]))) ** 2),
                         y[mlog], rule="simpson")
        den = (quadrature(duv[mlog] ** 2 / y[mlog] ** 2, y[mlog], rule="simpson")
               + quadrature(uv[y <= 2.0] ** 2, y[y <= 2.0], rule="simpson"))
        out["harfylog_worst"] = max(out["harfylog_worst"], num / den)

        mband = (y >= R) & (y <= 2 * R)
        numb = quadrature(uv[mband] ** 2 / y[mband] ** 4, y[mband], rule="simpson")
        denb = math.log(R) * quadrature(duv[mlog] ** 2 / y[mlog] ** 2, y[mlog],
                                        rule="simpson") \
            + quadrature(uv[y <= 2.0] ** 2, y[y <= 2.0], rule="simpson")
        out["harfysanslog_worst"] = max(out["harfysanslog_worst"], numb / denb)

        hu = -lap - vq * uv
        lhs = quadrature(hu ** 2, grid, rule="simpson")
        rhs = (lap2 - 2.0 * quadrature(vq * duv ** 2, grid, rule="simpson")
               + quadrature((lap_v + vq ** 2) * uv ** 2, grid, rule="simpson"))
        out["subcoercivity_max_rel_defect"] = max(
            out["subcoercivity_max_rel_defect"], abs(lhs - rhs) / abs(lhs))

    # scale invariance of the hardy0 ratio: evaluating the dilated function on
    # the dilated grid maps the quadrature sums exactly, so the ratio must be
    # scale-free to roundoff
    u, du, _ = _test_family(1)[0]
    base = None
    for lam in (0.5, 1.0, 2.0):
        ys = y * lam
        ratio = (quadrature(u(ys / lam) ** 2 / ys ** 2, ys, rule="simpson")
                 / quadrature((du(ys / lam) / lam) ** 2, ys, rule="simpson"))
        if base is None:
            base = ratio
        out["scale_invariance_max_variation"] = max(
            out["scale_invariance_max_variation"], abs(ratio / base - 1.0))

    consts = out.pop("laplacian_split_constant")
    out["laplacian_split_constant_mean"] = float(np.mean(consts))
    out["laplacian_split_constant_spread"] = float(np.max(np.abs(np.array(consts) - 3.0)))
    return out
