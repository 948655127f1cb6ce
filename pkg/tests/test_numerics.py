import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from critwave import groundstate as gs
from critwave.errors import DomainError, NoSignChange
from critwave.numerics import (
    RadialGrid,
    SeriesLaunch,
    bessel_j1_y1,
    bessel_j1_y1_derivatives,
    cumulative_quadrature,
    find_root,
    integrate_radial_ode,
    quadrature,
    radial_derivatives,
)

scipy_special = pytest.importorskip("scipy.special")


# ---------------------------------------------------------------------------
# grids and launches
# ---------------------------------------------------------------------------

def test_grid_invariants():
    g = RadialGrid.geometric(1e-3, 10.0, 64)
    assert g.r_min > 0 and g.r_max == 10.0 and np.all(np.diff(g.nodes) > 0)
    with pytest.raises(ValueError):
        RadialGrid(np.linspace(1.0, 0.0, 32))
    with pytest.raises(ValueError):
        RadialGrid(np.linspace(0.0, 1.0, 8))


def test_series_launch_even_ode():
    # psi'' + (3/y) psi' + (3 - zeta) psi = ... with known closed recursion
    zeta = 0.5
    launch = SeriesLaunch.for_even_ode([3.0 - zeta, -0.75], a0=1.0, y0=1e-3)
    a2 = -(3.0 - zeta) / 8.0
    a4 = -((3.0 - zeta) * a2 - 0.75) / 24.0
    assert launch.coefficients[2] == pytest.approx(a2, rel=1e-15)
    assert launch.coefficients[4] == pytest.approx(a4, rel=1e-15)


# ---------------------------------------------------------------------------
# radial ODE integration
# ---------------------------------------------------------------------------

def test_integrate_constant_solution():
    # u'' + (3/y) u' = 0 with u = 1, u' = 0 stays identically 1
    grid = RadialGrid.geometric(1e-3, 20.0, 200)
    launch = SeriesLaunch(np.array([1.0, 0.0, 0.0, 0.0, 0.0]), y0=1e-3)
    sol = integrate_radial_ode(lambda y, u, du: -3.0 / y * du, launch, grid)
    assert np.max(np.abs(sol.values - 1.0)) < 1e-12


def test_integrate_reproduces_zero_mode():
    # H u = 0 launched on the scaling mode matches its closed form
    grid = RadialGrid.geometric(1e-3, 5.0, 400)
    # LQ = 1 - (3/8) y^2 + (3/64) y^4 + ...
    launch = SeriesLaunch(np.array([1.0, 0.0, -3.0 / 8.0, 0.0, 3.0 / 64.0]), y0=1e-3)
    sol = integrate_radial_ode(
        lambda y, u, du: -3.0 / y * du - gs.v_pot(y) * u, launch, grid,
        rtol=1e-12)
    err = abs(sol.values[-1] - gs.lambda_q(5.0))
    assert err < 1e-8


def test_integrate_sin_reduction():
    # 1-D reduction u'' + u = 0 from a sine launch
    grid = RadialGrid.uniform(1e-3, 3.0, 64)
    y0 = 1e-3
    launch = SeriesLaunch(np.array([0.0, 1.0, 0.0, -1.0 / 6.0, 0.0]), y0=y0)
    sol = integrate_radial_ode(lambda y, u, du: -u, launch, grid, rtol=1e-12)
    assert abs(sol.values[-1] - math.sin(3.0)) < 1e-9


def test_integration_deterministic():
    grid = RadialGrid.geometric(1e-3, 5.0, 100)
    launch = SeriesLaunch(np.array([1.0, 0.0, -3.0 / 8.0, 0.0, 3.0 / 64.0]), y0=1e-3)

    def run():
        return integrate_radial_ode(
            lambda y, u, du: -3.0 / y * du - gs.v_pot(y) * u, launch, grid).values

    a, b = run(), run()
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def test_quadrature_monomial():
    grid = RadialGrid.uniform(0.0, 1.0, 4000)
    val = quadrature(np.ones(grid.size), grid, rule="simpson")
    assert abs(val - 0.25) < 1e-10


def test_quadrature_pohozaev_pairing():
    grid = RadialGrid.geometric(1e-3, 1e4, 6000)
    y = grid.nodes
    val = quadrature(gs.phi(y) * gs.lambda_q(y), grid, rule="trapezoid")
    assert abs(val - 32.0) < 2e-3


def test_quadrature_log_law_constant():
    # int_0^R (LQ)^2 y^3 dy = 64 log R + C with C grid-stable
    cs = []
    for R in (1e3, 1e4):
        grid = RadialGrid.geometric(1e-3, R, 8000)
        y = grid.nodes
        val = quadrature(gs.lambda_q(y) ** 2, grid, rule="simpson")
        cs.append(val - 64.0 * math.log(R))
    assert abs(cs[0] - cs[1]) < 1e-3
    # frozen: C = -(32 log 8 + 224/3), from the exact antiderivative
    c_exact = -(32.0 * math.log(8.0) + 224.0 / 3.0)
    assert cs[1] == pytest.approx(c_exact, abs=2e-3)


def test_refinement_convergence():
    # halving steps cuts the quadrature error by at least 3x
    def err(n):
        grid = RadialGrid.geometric(0.1, 30.0, n)
        y = grid.nodes
        exact = 32.0 * (math.log(1 + 900.0 / 8) - math.log(1 + 0.01 / 8)) \
            + 32.0 * (5 / (1 + 900 / 8) - 5 / (1 + 0.01 / 8)) \
            - 32.0 * (4 / (1 + 900 / 8) ** 2 - 4 / (1 + 0.01 / 8) ** 2) \
            + 32.0 * ((4 / 3) / (1 + 900 / 8) ** 3 - (4 / 3) / (1 + 0.01 / 8) ** 3)
        return abs(quadrature(gs.lambda_q(y) ** 2, grid) - exact)

    assert err(500) / err(1000) >= 3.0


def test_cumulative_matches_total():
    grid = RadialGrid.geometric(1e-3, 50.0, 3000)
    y = grid.nodes
    f = gs.phi(y) * gs.lambda_q(y)
    cum = cumulative_quadrature(f, grid, rule="parabolic")
    assert cum[-1] == pytest.approx(quadrature(f, grid, rule="simpson"), rel=1e-12)


@given(st.floats(0.4, 2.5), st.floats(0.3, 1.5), st.floats(-1.0, 1.0))
def test_adjointness_property(scale, width, c2):
    # |(Df, g) + (f, Dg)| small for smooth decaying pairs, D = 2 + y d/dy
    grid = RadialGrid.geometric(1e-4, 40.0, 3000)
    y = grid.nodes
    f = np.exp(-(y / scale) ** 2)
    df = -2.0 * y / scale ** 2 * f
    g = (1.0 + c2 * y ** 2) * np.exp(-(y / width) ** 2)
    dg = (2.0 * c2 * y) * np.exp(-(y / width) ** 2) - 2.0 * y / width ** 2 * g
    lhs = quadrature((2 * f + y * df) * g, grid, rule="simpson") \
        + quadrature(f * (2 * g + y * dg), grid, rule="simpson")
    scale_ref = quadrature(np.abs(f * g), grid, rule="simpson") + 1.0
    assert abs(lhs) < 1e-8 * scale_ref


# ---------------------------------------------------------------------------
# roots
# ---------------------------------------------------------------------------

def test_find_root_sqrt2():
    r = find_root(lambda x: x * x - 2.0, (1.0, 2.0), tol=1e-12)
    assert abs(r - math.sqrt(2.0)) < 1e-8


def test_find_root_zero_mode_zero():
    r = find_root(lambda y: float(gs.lambda_q(y)), (2.0, 3.0), tol=1e-12)
    assert abs(r - math.sqrt(8.0)) < 1e-10


def test_find_root_no_sign_change():
    with pytest.raises(NoSignChange):
        find_root(lambda x: x * x + 1.0, (0.0, 1.0))


# ---------------------------------------------------------------------------
# Bessel
# ---------------------------------------------------------------------------

def test_bessel_against_reference():
    xs = np.linspace(0.05, 11.5, 57)
    for x in xs:
        j1, y1 = bessel_j1_y1(float(x))
        assert abs(j1 - scipy_special.j1(x)) < 1e-10
        assert abs(y1 - scipy_special.y1(x)) < 1e-10


def test_bessel_first_zero():
    r = find_root(lambda x: bessel_j1_y1(x)[0], (3.0, 4.5), tol=1e-12)
    assert abs(r - 3.8317060) < 1e-6


def test_bessel_small_argument():
    j1, _ = bessel_j1_y1(1e-4)
    assert abs(j1 / 5e-5 - 1.0) < 1e-8


def test_bessel_wronskian():
    x = 2.0
    j1, y1, dj1, dy1 = bessel_j1_y1_derivatives(x)
    assert abs(j1 * dy1 - dj1 * y1 - 2.0 / (math.pi * x)) < 1e-9


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_j1_y1(0.0)
    with pytest.raises(DomainError):
        bessel_j1_y1(-1.0)
    with pytest.raises(DomainError):
        bessel_j1_y1(15.0)


# ---------------------------------------------------------------------------
# stencils
# ---------------------------------------------------------------------------

def test_radial_derivatives_quartic_exact():
    grid = RadialGrid.geometric(0.1, 5.0, 200)
    y = grid.nodes
    f = 0.3 * y ** 4 - y ** 2 + 2.0
    d1, d2 = radial_derivatives(f, y)
    assert np.max(np.abs(d1 - (1.2 * y ** 3 - 2 * y))) < 1e-9
    assert np.max(np.abs(d2 - (3.6 * y ** 2 - 2.0))) < 1e-8
