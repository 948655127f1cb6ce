"""Closed-form ground-state family in four dimensions and derived kernel data.

The ground state of the focusing energy-critical problem in R^4 is

    Q(y) = 1 / (1 + y^2/8),   with  Delta Q + Q^3 = 0.

Everything here is an explicit rational function of u = y^2/8:

    Lambda Q = (1 - u) / (1 + u)^2          (scaling zero mode, H(Lambda Q)=0)
    Phi      = 2 (1 - 3u) / (1 + u)^3       (= D Lambda Q, decays like y^-4)
    V        = 3 Q^2                        (linearized potential, H = -Delta - V)
    W        = 2V + (3/2) y V'              (quadratic-form potential)

plus a second kernel element Gamma of H obtained by integrating the radial
ODE H Gamma = 0 from exact interior data rather than from its singular
integral representation (which has a double pole at the zero of Lambda Q).
Derivatives are hand-differentiated; no finite differences enter the family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WronskianDrift
from .numerics import (
    RadialFunction,
    RadialGrid,
    cumulative_quadrature,
    integrate_between,
    radial_derivatives,
)

__all__ = [
    "GroundStateValue",
    "GammaFunction",
    "q", "dq", "d2q",
    "lambda_q", "dlambda_q", "d2lambda_q",
    "phi", "dphi", "d2phi",
    "v_pot", "dv_pot", "d2v_pot",
    "w_pot", "dw_pot", "d2w_pot",
    "hphi_source",
    "eval_ground_family",
    "compute_gamma",
    "pohozaev_constant",
    "check_resonance",
    "POHOZAEV",
]

POHOZAEV = 32.0  # (D Lambda Q, Lambda Q) = lim (1/2) y^4 (Lambda Q)^2


# ---- closed forms (u = y^2/8, tau = 1 + u) ----------------------------------

def q(y):
    y = np.asarray(y, dtype=float)
    return 1.0 / (1.0 + y * y / 8.0)


def dq(y):
    y = np.asarray(y, dtype=float)
    return -(y / 4.0) / (1.0 + y * y / 8.0) ** 2


def d2q(y):
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    tau = 1.0 + u
    return -0.25 / tau ** 2 + u / tau ** 3


def lambda_q(y):
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    return (1.0 - u) / (1.0 + u) ** 2


def dlambda_q(y):
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    return (y / 4.0) * (u - 3.0) / (1.0 + u) ** 3


def d2lambda_q(y):
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    return -0.75 * (u * u - 6.0 * u + 1.0) / (1.0 + u) ** 4


def phi(y):
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    return 2.0 * (1.0 - 3.0 * u) / (1.0 + u) ** 3


def dphi(y):
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    return -3.0 * y * (1.0 - u) / (1.0 + u) ** 4


def d2phi(y):
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    return -3.0 * (5.0 * u * u - 10.0 * u + 1.0) / (1.0 + u) ** 5


def v_pot(y):
    y = np.asarray(y, dtype=float)
    return 3.0 / (1.0 + y * y / 8.0) ** 2


def dv_pot(y):
    y = np.asarray(y, dtype=float)
    return -1.5 * y / (1.0 + y * y / 8.0) ** 3


def d2v_pot(y):
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    tau = 1.0 + u
    return -1.5 / tau ** 3 + 9.0 * u / tau ** 4


def w_pot(y):
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    return 6.0 / (1.0 + u) ** 2 - 18.0 * u / (1.0 + u) ** 3


def dw_pot(y):
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    return 1.5 * y * (4.0 * u - 5.0) / (1.0 + u) ** 4


def d2w_pot(y):
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    return -1.5 * (20.0 * u * u - 47.0 * u + 5.0) / (1.0 + u) ** 5


def hphi_source(y):
    """(2V + y V') Lambda Q, the closed-form image of Phi under H."""
    y = np.asarray(y, dtype=float)
    u = y * y / 8.0
    return (6.0 / (1.0 + u) ** 2 - 12.0 * u / (1.0 + u) ** 3) * lambda_q(y)


@dataclass(frozen=True)
class GroundStateValue:
    """All family members and their first two derivatives at one radius."""

    y: float
    Q: float
    dQ: float
    d2Q: float
    LQ: float
    dLQ: float
    d2LQ: float
    Phi: float
    dPhi: float
    d2Phi: float
    V: float
    dV: float
    d2V: float
    W: float
    dW: float
    d2W: float


def eval_ground_family(y: float) -> GroundStateValue:
    if y < 0:
        raise ValueError("radius must be nonnegative")
    return GroundStateValue(
        y=float(y),
        Q=float(q(y)), dQ=float(dq(y)), d2Q=float(d2q(y)),
        LQ=float(lambda_q(y)), dLQ=float(dlambda_q(y)), d2LQ=float(d2lambda_q(y)),
        Phi=float(phi(y)), dPhi=float(dphi(y)), d2Phi=float(d2phi(y)),
        V=float(v_pot(y)), dV=float(dv_pot(y)), d2V=float(d2v_pot(y)),
        W=float(w_pot(y)), dW=float(dw_pot(y)), d2W=float(d2w_pot(y)),
    )


# ---- second kernel element ---------------------------------------------------

@dataclass
class GammaFunction:
    """Second kernel element of H with its Wronskian certificate.

    Normalized so that Gamma(1) = 0 and
    Gamma' LambdaQ - Gamma LambdaQ' = -1/y^3 exactly; near the origin
    Gamma = 1/(2 y^2) - (3/4) log y + O(1), and Gamma tends to a constant
    at infinity.
    """

    profile: RadialFunction
    wronskian_max_drift: float

    @property
    def grid(self):
        return self.profile.grid

    @property
    def values(self):
        return self.profile.values

    @property
    def dvalues(self):
        return self.profile.dvalues


def compute_gamma(grid: RadialGrid, rtol: float = 1e-12, atol: float = 1e-14,
                  drift_tol: float = 1e-7) -> GammaFunction:
    """Integrate H Gamma = 0 in both directions from the exact interior data
    Gamma(1) = 0, Gamma'(1) = -1/LambdaQ(1); the launch point normalizes the
    Wronskian exactly and avoids both the origin singularity and the
    (removable) zero of LambdaQ. Raises :class:`WronskianDrift` when the
    invariant is violated beyond tolerance."""
    nodes = grid.nodes
    if nodes[0] >= 1.0 or nodes[-1] <= 1.0:
        raise ValueError("gamma grid must bracket y = 1")

    def rhs(yv, u, du):
        return -3.0 / yv * du - v_pot(yv) * u

    g0 = 0.0
    dg0 = -1.0 / float(lambda_q(1.0))
    out_mask = nodes >= 1.0
    vals = np.empty(nodes.size)
    dvals = np.empty(nodes.size)
    u_out, du_out = integrate_between(rhs, 1.0, g0, dg0, nodes[out_mask],
                                      rtol=rtol, atol=atol)
    vals[out_mask] = u_out
    dvals[out_mask] = du_out
    if np.any(~out_mask):
        u_in, du_in = integrate_between(rhs, 1.0, g0, dg0, nodes[~out_mask][::-1],
                                        rtol=rtol, atol=atol)
        vals[~out_mask] = u_in[::-1]
        dvals[~out_mask] = du_in[::-1]

    wr = dvals * lambda_q(nodes) - vals * dlambda_q(nodes)
    drift = float(np.max(np.abs(wr * nodes ** 3 + 1.0)))
    if drift > drift_tol:
        raise WronskianDrift(f"Wronskian drift {drift:.3e} exceeds {drift_tol:.1e}")
    prof = RadialFunction(nodes, vals, dvals,
                          tail={"origin": "1/(2 y^2) - (3/4) log y + O(1)",
                                "infinity": "constant + O(1/y^2)"})
    return GammaFunction(prof, drift)


# ---- Pohozaev constant --------------------------------------------------------

@dataclass(frozen=True)
class PohozaevResult:
    value: float
    error_bar: float
    raw_at_cut: float
    r_cut: float
    integrand_integrable: bool

    def __float__(self):
        return self.value


def pohozaev_constant(r_cut: float = 1e3, n: int = 4001) -> PohozaevResult:
    """(Phi, Lambda Q) by quadrature with tail extrapolation.

    The truncated integral carries a pure surface deficit ~ C/R^2, so one
    Richardson step on the cumulative integral at R/2 and R removes it.
    """
    grid = RadialGrid.geometric(1e-3, r_cut, n)
    y = grid.nodes
    integrand = phi(y) * lambda_q(y)
    cum = cumulative_quadrature(integrand, grid, rule="parabolic")
    i_full = float(cum[-1])
    i_half = float(np.interp(r_cut / 2.0, y, cum))
    i_quarter = float(np.interp(r_cut / 4.0, y, cum))
    extrap = i_full + (i_full - i_half) / 3.0
    extrap_prev = i_half + (i_half - i_quarter) / 3.0
    error_bar = abs(extrap - extrap_prev) + 1e-12
    # integrability flag: the integrand decays like a pure surface term
    tail_ok = bool(np.all(np.abs(phi(y[y > 10]) * y[y > 10] ** 4) < 400.0))
    return PohozaevResult(extrap, error_bar, i_full, r_cut, tail_ok)


# ---- resonance / identity residuals ------------------------------------------

def check_resonance(grid: RadialGrid | None = None,
                    window: tuple[float, float] = (0.1, 50.0)) -> dict:
    """Finite-difference residuals of the exact identities satisfied by the
    family: H(Lambda Q) = 0 and H(Phi) = (2V + y V') Lambda Q, evaluated on a
    window away from the grid edges. Pure discretization error."""
    if grid is None:
        grid = RadialGrid.geometric(1e-3, 200.0, 4000)
    y = grid.nodes
    d1, d2 = radial_derivatives(lambda_q(y), y)
    res_lq = -d2 - 3.0 / y * d1 - v_pot(y) * lambda_q(y)
    d1p, d2p = radial_derivatives(phi(y), y)
    res_phi = (-d2p - 3.0 / y * d1p - v_pot(y) * phi(y)) - hphi_source(y)
    m = (y >= window[0]) & (y <= window[1])
    w3 = y[m] ** 3
    dy = np.gradient(y[m])

    def l2(res):
        return float(np.sqrt(np.sum(res[m] ** 2 * w3 * dy)))

    return {
        "resonance_max": float(np.max(np.abs(res_lq[m]))),
        "resonance_l2": l2(res_lq),
        "hphi_identity_max": float(np.max(np.abs(res_phi[m]))),
        "hphi_identity_l2": l2(res_phi),
        "window": window,
        "n_nodes": grid.size,
    }
