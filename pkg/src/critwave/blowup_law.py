"""Reduced blow-up dynamics: the scale functional G(b), the leading-order
scale ODE and its integrated laws, and the two-mode linear system with its
shooting dichotomy.

Two interchangeable reductions of the scale dynamics are provided:

* "b" mode:  b_s = -b^2 / (2 |log b|)            (leading reduction)
* "j" mode:  J_s = -J^2 / (128 |log J|^2),  b = J / (64 |log J|)

coupled in either case to lambda_s = -b lambda and t_s = lambda. Dropped
corrections are O(1/sqrt(|log .|)), which at reachable scales are tens of
percent; the trajectory carries fit diagnostics rather than asserting the
asymptotic laws. Note the dictionary between the two modes has relative
errors log(64 |log b|)/|log b|, which is O(1) for any b representable in
double precision, so the modes genuinely differ at desk scales (the fits
quantify by how much).

The dichotomy demo couples the "b" mode to the linear two-mode system

    dk+/ds = +sqrt(zeta) k+ + E+/(2 sqrt(zeta))
    dk-/ds = -sqrt(zeta) k- - E-/(2 sqrt(zeta))

with a deterministic sinusoidal forcing saturating the admissible envelope
sqrt(b) b^2/|log b|, and bisects the initial unstable amplitude on the exit
side of |k+| <= 2 b^2/|log b|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import groundstate as gs
from .errors import NoDichotomy, NonMonotoneB
from .numerics import RadialGrid, quadrature
from .profile import Cutoff

__all__ = [
    "ZETA_DEFAULT",
    "BlowupTrajectory",
    "ModeState",
    "G_functional",
    "integrate_reduced_system",
    "linear_mode_step",
    "dichotomy_demo",
    "DichotomyResult",
]

# bound-state eigenvalue of the linearized operator; importable without
# rerunning the shooting solver (spectral.solve_eigenpair reproduces it)
ZETA_DEFAULT = 0.5860808922

_B_FLOOR_LOG = 1e-12  # |log b| evaluated as -log(max(b, floor)) to keep logs finite


def _abs_log(x: float) -> float:
    return abs(math.log(max(x, _B_FLOOR_LOG)))


# ---------------------------------------------------------------------------
# G(b)
# ---------------------------------------------------------------------------

def G_functional(b: float, n_grid: int = 4000, n_b: int = 33) -> float:
    """b * ||Lambda Ptilde||^2 + int_0^b bt (d_b Ptilde, Lambda Ptilde) dbt
    with Ptilde = chi_{B0/4} Q; behaves like 64 b |log b| + O(b).

    The b-integrand tends to a constant as bt -> 0 (the inner product grows
    like 1/bt), so a uniform composite rule in bt converges cleanly.
    """
    if not 0.0 < b <= 0.1:
        raise ValueError("G functional expects b in (0, 0.1]")

    def lam_pt_norm_and_cross(bb: float):
        B = 0.5 / bb
        grid = RadialGrid.geometric(1e-3, 4.0 * B, n_grid)
        y = grid.nodes
        cut = Cutoff(B)
        lam_pt = cut(y) * gs.lambda_q(y) + cut.rho(y) * gs.q(y)
        norm = quadrature(lam_pt ** 2, grid, rule="simpson")
        dpt = cut.rho(y) * gs.q(y) / bb      # d_b chi(2 b y) = rho(2by)/b
        cross = quadrature(dpt * lam_pt, grid, rule="simpson")
        return norm, cross

    norm_b, _ = lam_pt_norm_and_cross(b)
    bts = np.linspace(b / n_b, b, n_b)
    integrand = np.array([bt * lam_pt_norm_and_cross(bt)[1] for bt in bts])
    inner = float(np.trapezoid(integrand, bts)) + bts[0] * integrand[0] / 2.0
    return b * norm_b + inner


# ---------------------------------------------------------------------------
# reduced system
# ---------------------------------------------------------------------------

@dataclass
class BlowupTrajectory:
    mode: str
    s: np.ndarray
    b: np.ndarray
    lam: np.ndarray
    t: np.ndarray
    j: np.ndarray | None
    status: str                   # "floor" | "horizon"
    T_estimate: float
    fits: dict = field(default_factory=dict)


def integrate_reduced_system(b0: float, mode: str = "b",
                             s_max: float = 1e6, b_floor: float = 1e-8,
                             rel_step: float = 5e-3) -> BlowupTrajectory:
    """March the reduced system with RK4 on geometrically growing steps
    (ds ~ rel_step * max(s, 1)); deterministic for fixed arguments.

    Returns the trajectory with fit diagnostics:
    ``law_b`` = b s/(2 log s), ``law_lambda`` = -log lambda/(log s)^2 at the
    end, and the terminal-time estimate T ~ t_end + lambda_end/b_end.
    Raises :class:`NonMonotoneB` if b ever increases (integration fault).
    """
    if not 1e-6 < b0 <= 0.05:
        raise ValueError("b0 must lie in (1e-6, 0.05]")
    if mode not in ("b", "j"):
        raise ValueError("mode must be 'b' or 'j'")

    if mode == "b":
        state = np.array([b0, 0.0, 0.0])  # (b, log lambda, t)

        def deriv(st):
            bb = st[0]
            return np.array([-bb * bb / (2.0 * _abs_log(bb)), -bb,
                             math.exp(st[1])])

        def b_of(st):
            return st[0]
    else:
        # initialize by inverting the output dictionary b = J/(64 |log J|) so
        # both modes start from exactly b0; J -> b is increasing on (0, 1), so
        # the inverse is a clean bisection. (The naive seed J = 64 b |log b|
        # crosses J = 1, where the dictionary is singular, for any b0 in the
        # admissible range.)
        def b_of_j(jj):
            return jj / (64.0 * _abs_log(jj))

        lo_j, hi_j = 1e-12, 1.0 - 1e-9
        for _ in range(200):
            mid = 0.5 * (lo_j + hi_j)
            if b_of_j(mid) < b0:
                lo_j = mid
            else:
                hi_j = mid
        j0 = 0.5 * (lo_j + hi_j)
        state = np.array([j0, 0.0, 0.0])  # (J, log lambda, t)

        def b_of(st):
            return b_of_j(st[0])

        def deriv(st):
            jj = st[0]
            lj = _abs_log(jj)
            return np.array([-jj * jj / (128.0 * lj * lj), -b_of(st),
                             math.exp(st[1])])

    s = 0.0
    rows = [(s, b_of(state), state[1], state[2], state[0])]
    b_prev = b_of(state)
    status = "horizon"
    while s < s_max:
        ds = min(rel_step * max(s, 1.0), s_max - s)
        k1 = deriv(state)
        k2 = deriv(state + 0.5 * ds * k1)
        k3 = deriv(state + 0.5 * ds * k2)
        k4 = deriv(state + ds * k3)
        state = state + ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        s += ds
        bb = b_of(state)
        if bb > b_prev * (1.0 + 1e-12):
            raise NonMonotoneB(f"b increased at s={s:.3g}")
        b_prev = bb
        rows.append((s, bb, state[1], state[2], state[0]))
        if bb <= b_floor:
            status = "floor"
            break

    arr = np.array(rows)
    s_a, b_a, ll_a, t_a, m_a = arr.T
    lam_a = np.exp(ll_a)
    T_est = float(t_a[-1] + lam_a[-1] / b_a[-1])
    fits = {}
    if s_a[-1] > 100.0:
        le = math.log(s_a[-1])
        fits["law_b"] = float(b_a[-1] * s_a[-1] / (2.0 * le))
        fits["law_lambda"] = float(-ll_a[-1] / le ** 2)
        # lambda(t) against the exact-law shape (T - t) e^{-sqrt(|log(T-t)|)}
        tcut = float(lam_a[-1] / b_a[-1])   # = T_est - t_end without cancellation
        if tcut > 0:
            shape = tcut * math.exp(-math.sqrt(abs(math.log(tcut))))
            fits["law_lambda_of_t"] = float(lam_a[-1] / shape)
    return BlowupTrajectory(mode=mode, s=s_a, b=b_a, lam=lam_a, t=t_a,
                            j=m_a if mode == "j" else None,
                            status=status, T_estimate=T_est, fits=fits)


# ---------------------------------------------------------------------------
# two-mode linear system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeState:
    """Stable/unstable projections; the eigen-directions of the first-order
    system are (1, +sqrt(zeta)) and (1, -sqrt(zeta))."""

    kappa_plus: float
    kappa_minus: float
    zeta: float = ZETA_DEFAULT


def linear_mode_step(state: ModeState, ds: float,
                     forcing: tuple[float, float]) -> ModeState:
    """One exact exponential-integrator step of the mode system with the
    forcing held at its supplied value across the step."""
    if not ds > 0:
        raise ValueError("ds must be positive")
    sq = math.sqrt(state.zeta)
    ep, em = forcing
    gp = ep / (2.0 * sq)
    gm = em / (2.0 * sq)
    grow = math.exp(sq * ds)
    decay = math.exp(-sq * ds)
    kp = grow * state.kappa_plus + (grow - 1.0) / sq * gp
    km = decay * state.kappa_minus - (1.0 - decay) / sq * gm
    return ModeState(kp, km, state.zeta)


# ---------------------------------------------------------------------------
# dichotomy demo (toy coupled system)
# ---------------------------------------------------------------------------

@dataclass
class DichotomyResult:
    a_plus_crit: float
    bracket_width: float
    exit_ledger: list
    s_max: float
    trapped_trace: np.ndarray     # columns (s, b, kappa_plus, kappa_minus)
    kappa_minus_envelope_K: float
    zeta: float


def _forcing(s: float, b: float, phase: float) -> float:
    # deterministic sinusoid saturating the admissible envelope
    return math.sqrt(b) * b * b / _abs_log(b) * math.sin(s + phase)


def _mode_leg(a_plus: float, b0: float, zeta: float, s_max: float,
              ds: float = 0.02, record: bool = False):
    """Integrate (b, k+, k-) until |k+| crosses 2 b^2/|log b| or s_max.
    Returns (exit_sign, s_exit, trace)."""
    sq = math.sqrt(zeta)
    b = b0
    state = ModeState(a_plus, 0.5 * a_plus, zeta)
    s = 0.0
    rows = [(s, b, state.kappa_plus, state.kappa_minus)]
    while s < s_max:
        h = min(ds, s_max - s)
        ep = _forcing(s + 0.5 * h, b, 0.0)
        em = _forcing(s + 0.5 * h, b, math.pi / 3.0)
        state = linear_mode_step(state, h, (ep, em))
        b = b - h * b * b / (2.0 * _abs_log(b))
        s += h
        if record:
            rows.append((s, b, state.kappa_plus, state.kappa_minus))
        bound = 2.0 * b * b / _abs_log(b)
        if abs(state.kappa_plus) > bound:
            return (1 if state.kappa_plus > 0 else -1), s, np.array(rows)
    return 0, s, np.array(rows)


def dichotomy_demo(b0: float = 1e-2, zeta: float = ZETA_DEFAULT,
                   s_max: float = 40.0, max_bisect: int = 80) -> DichotomyResult:
    """Bisect the initial unstable amplitude between an exiting-positive and
    an exiting-negative trajectory of the forced toy system.

    The horizon default (~30 e-foldings of sqrt(zeta)) is what double
    precision can certify: past it, amplitudes below the resolvable bracket
    width would decide the exit. Raises :class:`NoDichotomy` when both
    endpoints exit on the same side.
    """
    L0 = _abs_log(b0)
    lo, hi = -b0 * b0 / L0, b0 * b0 / L0
    ledger = []
    sg_lo, s_lo, _ = _mode_leg(lo, b0, zeta, s_max)
    sg_hi, s_hi, _ = _mode_leg(hi, b0, zeta, s_max)
    ledger.append(("endpoint", lo, sg_lo, s_lo))
    ledger.append(("endpoint", hi, sg_hi, s_hi))
    if not (sg_lo < 0 and sg_hi > 0):
        raise NoDichotomy(f"exit signs at bracket endpoints: {sg_lo}, {sg_hi}")
    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break  # bracket narrowed to adjacent floats
        sg, s_exit, _ = _mode_leg(mid, b0, zeta, s_max)
        ledger.append(("bisect", mid, sg, s_exit))
        if sg > 0:
            hi = mid
        elif sg < 0:
            lo = mid
        else:
            lo = hi = mid  # trapped through the horizon
            break
    a_crit = 0.5 * (lo + hi)
    _, _, trace = _mode_leg(a_crit, b0, zeta, s_max, record=True)
    bb = trace[:, 1]
    km = trace[:, 3]
    k_env = float(np.max(np.abs(km) * np.array([_abs_log(x) for x in bb]) / bb ** 2))
    return DichotomyResult(
        a_plus_crit=float(a_crit),
        bracket_width=float(hi - lo),
        exit_ledger=ledger,
        s_max=s_max,
        trapped_trace=trace,
        kappa_minus_envelope_K=k_env,
        zeta=zeta,
    )
