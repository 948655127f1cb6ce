"""Shared numerical kernels for radial problems in four space dimensions.

Everything downstream builds on four primitives:

* adaptive integration of second-order radial ODEs ``u'' = f(y, u, u')``,
  launched either from a power series at the origin (which absorbs the
  ``3/y`` first-derivative singularity of the radial Laplacian) or from
  explicit data at an interior point;
* composite quadrature against the radial measure ``y^3 dy`` (trapezoid
  by default, a parabolic/Simpson-type rule for convergence studies),
  plus cumulative variants used by variation-of-parameters formulas;
* bracketed root finding (bisection with optional secant polish);
* Bessel functions J1/Y1 by ascending power series on the bounded domain
  where they are needed (x <= 12), including first derivatives.

All operations are pure and deterministic: identical inputs produce
bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainError,
    MaxIterations,
    NonFiniteState,
    NoSignChange,
    StepSizeUnderflow,
)

__all__ = [
    "RadialGrid",
    "SeriesLaunch",
    "RadialFunction",
    "integrate_radial_ode",
    "integrate_between",
    "quadrature",
    "cumulative_quadrature",
    "find_root",
    "bessel_j1_y1",
    "bessel_j1_y1_derivatives",
    "radial_derivatives",
]


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing radii with a grading descriptor.

    ``kind`` is "uniform" or "geometric"; ``ratio`` is the per-step factor
    for geometric grids (1.0 for uniform).
    """

    nodes: np.ndarray
    kind: str = "geometric"
    ratio: float = 1.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.size < 16:
            raise ValueError("radial grid needs at least 16 nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("radial grid nodes must be strictly increasing")
        if nodes[0] < 0:
            raise ValueError("radial grid requires r_min >= 0")

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @staticmethod
    def geometric(r_min: float, r_max: float, n: int) -> "RadialGrid":
        if r_min <= 0:
            raise ValueError("geometric grading requires r_min > 0")
        nodes = np.geomspace(r_min, r_max, n)
        return RadialGrid(nodes, "geometric", float((r_max / r_min) ** (1.0 / (n - 1))))

    @staticmethod
    def uniform(r_min: float, r_max: float, n: int) -> "RadialGrid":
        return RadialGrid(np.linspace(r_min, r_max, n), "uniform", 1.0)


# ---------------------------------------------------------------------------
# series launch at the origin
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesLaunch:
    """Power series ``u(y) = sum_k coefficients[k] * y^k`` used to start
    integration at a small radius ``y0 > 0``.

    The series must be consistent with the ODE at the origin to its stated
    order; :func:`SeriesLaunch.for_even_ode` builds it for the common case.
    """

    coefficients: np.ndarray
    y0: float = 1e-3

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "coefficients", coeffs)
        if coeffs.size < 3:
            raise ValueError("series launch needs expansion order >= 2")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("series launch coefficients must be finite")
        if not self.y0 > 0:
            raise ValueError("launch radius must be positive")

    @property
    def order(self) -> int:
        return int(self.coefficients.size - 1)

    def value(self, y: float | np.ndarray):
        y = np.asarray(y, dtype=float)
        return np.polynomial.polynomial.polyval(y, self.coefficients)

    def derivative(self, y: float | np.ndarray):
        y = np.asarray(y, dtype=float)
        dcoef = self.coefficients[1:] * np.arange(1, self.coefficients.size)
        return np.polynomial.polynomial.polyval(y, dcoef)

    @staticmethod
    def for_even_ode(c_even: Sequence[float], r_even: Sequence[float] = (),
                     a0: float = 1.0, y0: float = 1e-3, order: int = 4) -> "SeriesLaunch":
        """Degree-``order`` even Taylor series of the regular solution of

            u'' + (3/y) u' + c(y) u = r(y),   u(0) = a0, u'(0) = 0,

        where ``c(y) = sum_j c_even[j] y^(2j)`` and similarly for ``r``.
        The recursion is ``2k (2k+2) a_{2k} = r_{2k-2} - sum_j c_{2j} a_{2k-2-2j}``.
        """
        if order % 2 or order < 2:
            raise ValueError("even series launch needs an even order >= 2")
        c_even = list(c_even)
        r_even = list(r_even)
        a = {0: float(a0)}
        for k in range(1, order // 2 + 1):
            rhs = r_even[k - 1] if k - 1 < len(r_even) else 0.0
            for j, cj in enumerate(c_even):
                m = k - 1 - j
                if m < 0:
                    break
                rhs -= cj * a[2 * m]
            a[2 * k] = rhs / (2 * k * (2 * k + 2))
        coeffs = np.zeros(order + 1)
        for p, v in a.items():
            coeffs[p] = v
        return SeriesLaunch(coeffs, y0=y0)


# ---------------------------------------------------------------------------
# tabulated radial functions
# ---------------------------------------------------------------------------

@dataclass
class RadialFunction:
    """Radial profile tabulated on a grid, with first derivative when the
    producer had one, plus symbolic tail-law metadata (power/log exponents)."""

    grid: np.ndarray
    values: np.ndarray
    dvalues: np.ndarray | None = None
    tail: dict = field(default_factory=dict)

    def __call__(self, y):
        """Evaluate by interpolation (cubic Hermite when a derivative is
        stored, linear otherwise). Outside the grid: constant extension."""
        y = np.asarray(y, dtype=float)
        if self.dvalues is None:
            return np.interp(y, self.grid, self.values)
        x = np.clip(y, self.grid[0], self.grid[-1])
        j = np.clip(np.searchsorted(self.grid, x) - 1, 0, self.grid.size - 2)
        h = self.grid[j + 1] - self.grid[j]
        t = (x - self.grid[j]) / h
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        return (h00 * self.values[j] + h10 * h * self.dvalues[j]
                + h01 * self.values[j + 1] + h11 * h * self.dvalues[j + 1])

    def derivative(self, y):
        if self.dvalues is None:
            raise ValueError("no derivative tabulated")
        return np.interp(np.asarray(y, dtype=float), self.grid, self.dvalues)


# ---------------------------------------------------------------------------
# adaptive Runge-Kutta (Cash-Karp 4(5)) for u'' = f(y, u, u')
# ---------------------------------------------------------------------------

_CK_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_CK_C = (0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8)
_CK_B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_CK_B4 = (2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4)


def _ck_step(f, y, u, du, h):
    ku = [0.0] * 6
    kv = [0.0] * 6
    ku[0] = du
    kv[0] = f(y, u, du)
    for i in range(1, 6):
        ui = u
        vi = du
        for j, a in enumerate(_CK_A[i]):
            ui += h * a * ku[j]
            vi += h * a * kv[j]
        ku[i] = vi
        kv[i] = f(y + _CK_C[i] * h, ui, vi)
    u5 = u + h * sum(b * k for b, k in zip(_CK_B5, ku))
    v5 = du + h * sum(b * k for b, k in zip(_CK_B5, kv))
    u4 = u + h * sum(b * k for b, k in zip(_CK_B4, ku))
    v4 = du + h * sum(b * k for b, k in zip(_CK_B4, kv))
    return u5, v5, abs(u5 - u4), abs(v5 - v4)


def integrate_between(f: Callable[[float, float, float], float],
                      y0: float, u0: float, du0: float,
                      targets: Sequence[float],
                      rtol: float = 1e-11, atol: float = 1e-14,
                      max_steps: int = 2_000_000):
    """March ``u'' = f(y, u, u')`` from ``(y0, u0, du0)`` through ``targets``
    (monotone, first target may equal y0) with embedded 4(5) step control.

    Returns arrays (u, du) at the targets. Raises :class:`NonFiniteState` on
    overflow and :class:`StepSizeUnderflow` if step control stalls.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.size == 0:
        return np.array([]), np.array([])
    forward = targets[-1] >= y0
    sign = 1.0 if forward else -1.0
    out_u = np.empty(targets.size)
    out_du = np.empty(targets.size)
    y, u, du = float(y0), float(u0), float(du0)
    h = sign * max(1e-6, 0.01 * abs(y0) if y0 != 0 else 1e-6)
    idx = 0
    while idx < targets.size and (targets[idx] - y) * sign <= 1e-15 * max(1.0, abs(y)):
        out_u[idx] = u
        out_du[idx] = du
        idx += 1
    steps = 0
    while idx < targets.size:
        if steps >= max_steps:
            raise MaxIterations("ODE step budget exhausted")
        target = targets[idx]
        if (y + h - target) * sign > 0:
            h = target - y
        u5, v5, eu, ev = _ck_step(f, y, u, du, h)
        if not (math.isfinite(u5) and math.isfinite(v5)):
            raise NonFiniteState(f"state overflow near y={y:.6g}")
        scale_u = atol + rtol * max(abs(u), abs(u5))
        scale_v = atol + rtol * max(abs(du), abs(v5))
        err = max(eu / scale_u, ev / scale_v, 1e-300)
        if err <= 1.0:
            y += h
            u, du = u5, v5
            while idx < targets.size and (targets[idx] - y) * sign <= 1e-12 * max(1.0, abs(y)):
                out_u[idx] = u
                out_du[idx] = du
                idx += 1
            h *= min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            h *= max(0.2, 0.9 * err ** -0.25)
        if abs(h) < 1e-14 * max(1.0, abs(y)):
            raise StepSizeUnderflow(f"step control stalled at y={y:.6g}")
        steps += 1
    return out_u, out_du


def integrate_radial_ode(f: Callable[[float, float, float], float],
                         launch: SeriesLaunch, grid: RadialGrid,
                         rtol: float = 1e-11, atol: float = 1e-14) -> RadialFunction:
    """Integrate ``u'' = f(y, u, u')`` outward from a series launch.

    Grid nodes at or below the launch radius are filled from the series;
    the rest come from adaptive integration. Local error per step is held
    below ``atol + rtol*|u|``.
    """
    nodes = grid.nodes
    below = nodes <= launch.y0
    u = np.empty(nodes.size)
    du = np.empty(nodes.size)
    u[below] = launch.value(nodes[below])
    du[below] = launch.derivative(nodes[below])
    above = ~below
    if np.any(above):
        u0 = float(launch.value(launch.y0))
        du0 = float(launch.derivative(launch.y0))
        u[above], du[above] = integrate_between(
            f, launch.y0, u0, du0, nodes[above], rtol=rtol, atol=atol)
    return RadialFunction(nodes, u, du)


# ---------------------------------------------------------------------------
# quadrature against y^3 dy
# ---------------------------------------------------------------------------

def _lagrange3_panel(x0, x1, x2, h):
    """Integrals over [0, h] of the quadratic Lagrange basis on nodes
    (x0, x1, x2), all coordinates local to the panel's left edge (keeps the
    cubic antiderivative well conditioned on grids reaching large radii)."""
    def prim(p, q, t):
        return t ** 3 / 3.0 - (p + q) * t ** 2 / 2.0 + p * q * t

    l0 = prim(x1, x2, h) / ((x0 - x1) * (x0 - x2))
    l1 = prim(x0, x2, h) / ((x1 - x0) * (x1 - x2))
    l2 = prim(x0, x1, h) / ((x2 - x0) * (x2 - x1))
    return l0, l1, l2


def _parabolic_panel_weights(x: np.ndarray) -> np.ndarray:
    """Integral of f over each panel [x_i, x_{i+1}] as a stencil on
    (f_{i-1}, f_i, f_{i+1}, f_{i+2}); average of the two quadratics through
    the neighboring triples (one-sided at the ends). Returns per-panel
    contribution matrix of shape (n-1, 4) indexed (left-1, left, right, right+1).
    """
    n = x.size
    w = np.zeros((n - 1, 4))
    h = np.diff(x)

    # left triples (x_{i-1}, x_i, x_{i+1}) for panels i >= 1, local origin x_i
    i = np.arange(1, n - 1)
    l0, l1, l2 = _lagrange3_panel(x[i - 1] - x[i], 0.0, x[i + 1] - x[i], h[i])
    wl = np.zeros((n - 1, 4))
    wl[i, 0] = l0
    wl[i, 1] = l1
    wl[i, 2] = l2

    # right triples (x_i, x_{i+1}, x_{i+2}) for panels i <= n-3
    i = np.arange(0, n - 2)
    r0, r1, r2 = _lagrange3_panel(0.0, x[i + 1] - x[i], x[i + 2] - x[i], h[i])
    wr = np.zeros((n - 1, 4))
    wr[i, 1] = r0
    wr[i, 2] = r1
    wr[i, 3] = r2

    counts = np.ones(n - 1)
    counts[1:n - 2] = 2.0
    w = (wl + wr) / counts[:, None]
    return w


_PANEL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _panel_weights_cached(x: np.ndarray) -> np.ndarray:
    key = (x.size, float(x[0]), float(x[-1]), float(x[min(7, x.size - 1)]))
    hashed = hash(key)
    hit = _PANEL_CACHE.get(hashed)
    if hit is not None and hit[0] is not None and np.shares_memory(hit[0], x):
        return hit[1]
    w = _parabolic_panel_weights(x)
    if len(_PANEL_CACHE) > 8:
        _PANEL_CACHE.clear()
    _PANEL_CACHE[hashed] = (x, w)
    return w


def cumulative_quadrature(values: np.ndarray, grid, weight: str = "y3",
                          rule: str = "parabolic") -> np.ndarray:
    """Cumulative integral of ``values`` (optionally against y^3 dy) from the
    first node; index j holds the integral up to node j."""
    x = grid.nodes if isinstance(grid, RadialGrid) else np.asarray(grid, dtype=float)
    f = np.asarray(values, dtype=float)
    if weight == "y3":
        f = f * x ** 3
    elif weight != "none":
        raise ValueError(f"unknown weight {weight!r}")
    out = np.zeros_like(f)
    if rule == "trapezoid":
        out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(x))
    elif rule == "parabolic":
        w = _panel_weights_cached(x)
        fm = np.empty((x.size - 1, 4))
        fm[:, 1] = f[:-1]
        fm[:, 2] = f[1:]
        fm[1:, 0] = f[:-2]
        fm[0, 0] = 0.0
        fm[:-1, 3] = f[2:]
        fm[-1, 3] = 0.0
        out[1:] = np.cumsum(np.einsum("ij,ij->i", w, fm))
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return out


def quadrature(values: np.ndarray, grid, weight: str = "y3",
               rule: str = "trapezoid") -> float:
    """Composite integral of ``values`` over the grid span, by default against
    the radial measure y^3 dy. Rules: "trapezoid" (default), "simpson"
    (parabolic composite, for convergence studies)."""
    x = grid.nodes if isinstance(grid, RadialGrid) else np.asarray(grid, dtype=float)
    f = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(f)):
        raise NonFiniteState("quadrature input contains non-finite values")
    if weight == "y3":
        f = f * x ** 3
    elif weight != "none":
        raise ValueError(f"unknown weight {weight!r}")
    if rule == "trapezoid":
        return float(np.trapezoid(f, x))
    if rule == "simpson":
        w = _panel_weights_cached(x)
        fm = np.empty((x.size - 1, 4))
        fm[:, 1] = f[:-1]
        fm[:, 2] = f[1:]
        fm[1:, 0] = f[:-2]
        fm[0, 0] = 0.0
        fm[:-1, 3] = f[2:]
        fm[-1, 3] = 0.0
        return float(np.einsum("ij,ij->i", w, fm).sum())
    raise ValueError(f"unknown rule {rule!r}")


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def find_root(f: Callable[[float], float], bracket: tuple[float, float],
              tol: float = 1e-12, max_iter: int = 200,
              secant_polish: bool = True) -> float:
    """Bracketed root by bisection, with optional final secant refinement.

    Raises :class:`NoSignChange` if f has the same sign at both endpoints and
    :class:`MaxIterations` if the budget is exhausted before |hi-lo| <= tol.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoSignChange(f"no sign change on [{lo}, {hi}]: f={flo:.3g},{fhi:.3g}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    else:
        raise MaxIterations(f"bisection did not reach tol={tol}")
    if secant_polish and fhi != flo:
        x = hi - fhi * (hi - lo) / (fhi - flo)
        if lo <= x <= hi:
            return x
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Bessel functions J1, Y1 (ascending series; domain 0 < x <= 12)
# ---------------------------------------------------------------------------

_EULER_GAMMA = 0.5772156649015328606

_SERIES_XMAX = 12.0
_SERIES_CUT = 1e-12  # terms below this fraction of the running sum are dropped


def _j0_j1(x: float) -> tuple[float, float]:
    half = 0.5 * x
    q = half * half
    # J0
    term = 1.0
    s0 = term
    k = 1
    while True:
        term *= -q / (k * k)
        s0 += term
        if abs(term) < _SERIES_CUT * 1e-4 * max(1.0, abs(s0)) or k > 60:
            break
        k += 1
    # J1
    term = half
    s1 = term
    k = 1
    while True:
        term *= -q / (k * (k + 1))
        s1 += term
        if abs(term) < _SERIES_CUT * 1e-4 * max(1.0, abs(s1)) or k > 60:
            break
        k += 1
    return s0, s1


def _y0_y1(x: float, j0: float, j1: float) -> tuple[float, float]:
    half = 0.5 * x
    q = half * half
    lg = math.log(half)
    # Y0 = (2/pi) [ (ln(x/2)+gamma) J0 + sum_{k>=1} (-1)^{k+1} H_k q^k / (k!)^2 ]
    s = 0.0
    term = 1.0
    hk = 0.0
    for k in range(1, 61):
        term *= q / (k * k)
        hk += 1.0 / k
        contrib = ((-1) ** (k + 1)) * hk * term
        s += contrib
        if abs(contrib) < _SERIES_CUT * 1e-4 * max(1.0, abs(s)):
            break
    y0 = (2.0 / math.pi) * ((lg + _EULER_GAMMA) * j0 + s)
    # Y1 = (2/pi) ln(x/2) J1 - 2/(pi x)
    #      - (1/pi) sum_{k>=0} (-1)^k (H_k + H_{k+1} - 2 gamma) q^k half / (k! (k+1)!)
    s = 0.0
    term = half  # half * q^k / (k! (k+1)!) at k=0
    hk = 0.0
    hk1 = 1.0
    k = 0
    while k <= 60:
        contrib = ((-1) ** k) * (hk + hk1 - 2.0 * _EULER_GAMMA) * term
        s += contrib
        if k > 2 and abs(contrib) < _SERIES_CUT * 1e-4 * max(1.0, abs(s)):
            break
        k += 1
        term *= q / (k * (k + 1))
        hk += 1.0 / k
        hk1 += 1.0 / (k + 1)
    y1 = (2.0 / math.pi) * lg * j1 - 2.0 / (math.pi * x) - s / math.pi
    return y0, y1


def bessel_j1_y1(x: float) -> tuple[float, float]:
    """(J1(x), Y1(x)) by ascending series; absolute error <= 1e-10 on the
    supported domain 0 < x <= 12. Y1 is singular at 0: x <= 0 raises."""
    if not x > 0:
        raise DomainError("Bessel Y1 requires x > 0")
    if x > _SERIES_XMAX:
        raise DomainError(f"series evaluation supported for x <= {_SERIES_XMAX}")
    j0, j1 = _j0_j1(x)
    _, y1 = _y0_y1(x, j0, j1)
    return j1, y1


def bessel_j1_y1_derivatives(x: float) -> tuple[float, float, float, float]:
    """(J1, Y1, J1', Y1') using C1'(x) = C0(x) - C1(x)/x."""
    if not x > 0:
        raise DomainError("Bessel Y1 requires x > 0")
    if x > _SERIES_XMAX:
        raise DomainError(f"series evaluation supported for x <= {_SERIES_XMAX}")
    j0, j1 = _j0_j1(x)
    y0, y1 = _y0_y1(x, j0, j1)
    return j1, y1, j0 - j1 / x, y0 - y1 / x


# ---------------------------------------------------------------------------
# finite-difference derivatives on (possibly graded) grids
# ---------------------------------------------------------------------------

def derivative_stencils(nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-node 5-point stencil data for first/second derivatives on an
    arbitrary strictly increasing grid: (window starts, first-derivative
    weights, second-derivative weights). Exact for quartics."""
    x = np.asarray(nodes, dtype=float)
    n = x.size
    if n < 5:
        raise ValueError("need at least 5 nodes")
    starts = np.clip(np.arange(n) - 2, 0, n - 5)
    offsets = x[starts[:, None] + np.arange(5)] - x[:, None]  # (n, 5)
    # Vandermonde in Taylor form: V[p, j] = d_j^p / p!
    powers = np.cumprod(np.broadcast_to(offsets[:, None, :], (n, 5, 5)), axis=1)
    fact = np.array([1.0, 1.0, 2.0, 6.0, 24.0])
    V = np.concatenate([np.ones((n, 1, 5)), powers[:, :4, :]], axis=1) / fact[None, :, None]
    rhs = np.zeros((n, 5, 2))
    rhs[:, 1, 0] = 1.0
    rhs[:, 2, 1] = 1.0
    coeffs = np.linalg.solve(V, rhs)  # (n, 5, 2)
    return starts, coeffs[:, :, 0], coeffs[:, :, 1]


def apply_stencils(values: np.ndarray, starts: np.ndarray,
                   weights: np.ndarray) -> np.ndarray:
    window = values[starts[:, None] + np.arange(5)]
    return np.einsum("nj,nj->n", weights, window)


def radial_derivatives(values: np.ndarray, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of tabulated values by 5-point stencils
    (windows clamped at the boundary). Exact for quartics on any grid."""
    f = np.asarray(values, dtype=float)
    starts, w1, w2 = derivative_stencils(nodes)
    return apply_stencils(f, starts, w1), apply_stencils(f, starts, w2)
