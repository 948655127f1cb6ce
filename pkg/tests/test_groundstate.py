import math

import numpy as np
import pytest

from critwave import groundstate as gs
from critwave.numerics import RadialGrid, radial_derivatives


def test_values_at_origin():
    v = gs.eval_ground_family(0.0)
    assert v.Q == 1.0 and v.LQ == 1.0 and v.V == 3.0 and v.W == 6.0
    assert v.Phi == 2.0


def test_zero_of_scaling_mode():
    v = gs.eval_ground_family(math.sqrt(8.0))
    assert abs(v.LQ) < 1e-15
    assert v.Q == pytest.approx(0.5, rel=1e-15)


def test_pohozaev_surface_limit():
    y = 1e3
    assert abs(y ** 4 * gs.lambda_q(y) ** 2 / 2.0 - 32.0) <= 0.01


def test_defining_odes_pointwise():
    grid = RadialGrid.geometric(1e-2, 60.0, 4000)
    y = grid.nodes
    d1, d2 = radial_derivatives(gs.q(y), y)
    res = d2 + 3.0 / y * d1 + gs.q(y) ** 3
    m = (y > 0.05) & (y < 50.0)
    assert np.max(np.abs(res[m])) < 1e-6


def test_derivative_formulas_against_differences():
    # hand-differentiated forms vs central differences of the closed forms
    ys = np.linspace(0.1, 30.0, 77)
    h = 1e-5
    for f, df, d2f in [(gs.q, gs.dq, gs.d2q),
                       (gs.lambda_q, gs.dlambda_q, gs.d2lambda_q),
                       (gs.phi, gs.dphi, gs.d2phi),
                       (gs.v_pot, gs.dv_pot, gs.d2v_pot),
                       (gs.w_pot, gs.dw_pot, gs.d2w_pot)]:
        num1 = (f(ys + h) - f(ys - h)) / (2 * h)
        num2 = (f(ys + h) - 2 * f(ys) + f(ys - h)) / h ** 2
        assert np.max(np.abs(num1 - df(ys))) < 1e-7
        assert np.max(np.abs(num2 - d2f(ys))) < 1e-4


def test_tail_laws():
    y = np.geomspace(50.0, 2e3, 200)
    assert np.max(np.abs(y ** 2 * gs.lambda_q(y) + 8.0)) < 8.0 * 0.01 * 64  # -> -8
    t = y ** 4 * gs.phi(y)
    assert np.all(np.abs(t) < 400.0)
    assert np.all(np.diff(np.abs(t)) > -1e-9)  # monotone approach


# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def gamma_pair():
    grid = RadialGrid.geometric(1e-3, 1e3, 6000)
    return grid, gs.compute_gamma(grid)


def test_gamma_wronskian(gamma_pair):
    grid, gam = gamma_pair
    y = grid.nodes
    w = gam.dvalues * gs.lambda_q(y) - gam.values * gs.dlambda_q(y)
    i = np.searchsorted(y, 1.0)
    assert abs(w[i] * y[i] ** 3 + 1.0) < 1e-8
    assert gam.wronskian_max_drift < 1e-7


def test_gamma_origin_coefficient(gamma_pair):
    grid, gam = gamma_pair
    val = float(gam.profile(1e-2)) * 1e-4
    assert abs(val - 0.5) < 1e-3


def test_gamma_tail_flattening(gamma_pair):
    grid, gam = gamma_pair
    y = grid.nodes
    d = float(np.interp(1e3, y, gam.values) - np.interp(1e2, y, gam.values))
    assert abs(d) < 5e-2


def test_gamma_smooth_through_zero_mode_zero(gamma_pair):
    # Gamma and Gamma' continuous through y = sqrt(8) where the companion
    # solution vanishes: second differences stay at smooth-function scale
    grid, gam = gamma_pair
    y = grid.nodes
    m = (y > 2.6) & (y < 3.1)
    d2 = np.diff(gam.values[m], 2)
    h = np.diff(y[m]).mean()
    assert np.max(np.abs(d2)) < 10.0 * h ** 2  # |Gamma''| stays O(1)


# ---------------------------------------------------------------------------
# Pohozaev constant
# ---------------------------------------------------------------------------

def test_pohozaev_default():
    res = gs.pohozaev_constant()
    assert abs(res.value - 32.0) <= 1e-3
    assert res.error_bar < 1e-3
    assert res.integrand_integrable


def test_pohozaev_truncated_at_100():
    res = gs.pohozaev_constant(r_cut=100.0)
    assert abs(res.value - 32.0) <= 1e-2


# ---------------------------------------------------------------------------
# resonance / identity residuals
# ---------------------------------------------------------------------------

def test_resonance_residual():
    res = gs.check_resonance()
    assert res["resonance_max"] <= 1e-6
    assert res["hphi_identity_max"] <= 1e-6


def test_resonance_refinement():
    coarse = gs.check_resonance(RadialGrid.geometric(1e-3, 200.0, 2000))
    fine = gs.check_resonance(RadialGrid.geometric(1e-3, 200.0, 4000))
    assert coarse["resonance_max"] / fine["resonance_max"] >= 3.0
