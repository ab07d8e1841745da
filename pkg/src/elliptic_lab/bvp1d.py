"""Graded grids, radial profiles, and the regularized monotone solver for the
singular two-point problems -(r^{N-1} u')' = r^{N-1} w(r) f(u).

The discretization is the conservative flux form on graded grids: face
conductances are exact integrals of s^{1-N}, so pure harmonics a + b r^{2-N}
are reproduced nodally and the operator stays an M-matrix, which is what the
discrete comparison arguments lean on.  The nonlinearity is handled by a
shifted monotone fixed-point iteration inside a decreasing regularization
schedule f(. + eps_k), eps_k -> 0; the converged iterates are nondecreasing as
eps decreases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.linalg import solve_banded

from .errors import DomainError, NonConvergenceError, NoSolutionError, SolverFault
from . import funcs as _funcs
from . import quad as _quad


# ---------------------------------------------------------------------------
# grids and profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing positive nodes with a grading descriptor.

    grading "geometric" has constant node ratio; "offset-geometric" is
    geometric in the distance to an inner anchor (boundary layers);
    "two-sided" grades into both endpoints of a unit interval.
    """

    nodes: np.ndarray
    dimension: int
    grading: str = "geometric"
    ratio: float | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 16:
            raise DomainError("grid needs at least 16 nodes")
        if nodes[0] < 0 or np.any(np.diff(nodes) <= 0):
            raise DomainError("nodes must be nonnegative and strictly increasing")
        if self.dimension < 1:
            raise DomainError("dimension must be >= 1")

    @staticmethod
    def geometric(ra: float, rb: float, count: int, dimension: int) -> "RadialGrid":
        if not (0 < ra < rb):
            raise DomainError("geometric grid requires 0 < ra < rb")
        nodes = np.geomspace(ra, rb, count)
        ratio = (rb / ra) ** (1.0 / (count - 1))
        return RadialGrid(nodes=nodes, dimension=dimension, grading="geometric", ratio=ratio)

    @staticmethod
    def boundary_layer(anchor: float, delta_min: float, span: float,
                       count: int, dimension: int) -> "RadialGrid":
        """Nodes anchor + delta with delta geometric in (delta_min, span]."""
        if anchor < 0 or delta_min <= 0 or span <= delta_min:
            raise DomainError("bad boundary-layer grid parameters")
        delta = np.geomspace(delta_min, span, count - 1)
        nodes = np.concatenate(([anchor], anchor + delta))
        ratio = (span / delta_min) ** (1.0 / (count - 2))
        return RadialGrid(nodes=nodes, dimension=dimension,
                          grading="offset-geometric", ratio=ratio)

    @staticmethod
    def two_sided_unit(t_min: float, count: int) -> "RadialGrid":
        """Grid on [0, 1] graded smoothly into both endpoints (tanh mapping).

        The smooth mapping avoids spacing kinks, so the scheme's truncation
        stays uniformly second order; t_min sets the first interior node.
        """
        if not (0 < t_min < 0.25):
            raise DomainError("t_min must lie in (0, 0.25)")
        if count < 16:
            raise DomainError("grid needs at least 16 nodes")
        from scipy.optimize import brentq

        if count % 2 == 0:
            count += 1  # keep the midpoint as an exact node
        xi = np.linspace(0.0, 1.0, count)

        def first_node(gamma: float) -> float:
            s = math.tanh(gamma * (xi[1] - 0.5)) / math.tanh(gamma * 0.5)
            return 0.5 * (1.0 + s)

        gamma = brentq(lambda g: first_node(g) - t_min, 1e-2, 80.0, xtol=1e-12)
        s = np.tanh(gamma * (xi - 0.5)) / np.tanh(gamma * 0.5)
        nodes = 0.5 * (1.0 + s)
        nodes[0], nodes[-1] = 0.0, 1.0
        return RadialGrid(nodes=nodes, dimension=1, grading="two-sided", ratio=None)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]


@dataclass(eq=False)
class RadialProfile:
    """Sampled positive profile on a graded grid with monotone cubic interpolation.

    Node values at the two ends may be zero (Dirichlet data); interior values
    are strictly positive.  Evaluation interpolates log-values against log-radius
    (pchip), with power-law continuation beyond the sampled range.
    """

    grid: RadialGrid
    values: np.ndarray
    _interp: PchipInterpolator | None = field(default=None, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        self.values = values
        if values.shape != self.grid.nodes.shape:
            raise DomainError("values must match grid nodes")
        if np.any(values[1:-1] <= 0):
            raise SolverFault("interior profile values must be positive")
        if np.any(values < 0):
            raise SolverFault("profile values must be nonnegative")

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def r_min(self) -> float:
        return float(self.grid.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.grid.nodes[-1])

    def _positive_view(self) -> tuple[np.ndarray, np.ndarray]:
        mask = self.values > 0
        return self.grid.nodes[mask], self.values[mask]

    def _build(self) -> PchipInterpolator:
        if self._interp is None:
            r, v = self._positive_view()
            if r[0] <= 0:
                r = r[1:]
                v = v[1:]
            self._interp = PchipInterpolator(np.log(r), np.log(v), extrapolate=False)
        return self._interp

    def __call__(self, r) -> np.ndarray:
        interp = self._build()
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        rr = np.atleast_1d(r)
        if np.any(rr <= 0):
            raise DomainError("profiles are evaluated at positive radii")
        x = np.log(rr)
        lo, hi = interp.x[0], interp.x[-1]
        out = np.empty_like(rr)
        inside = (x >= lo) & (x <= hi)
        out[inside] = np.exp(interp(x[inside]))
        if np.any(~inside):
            # one-sided power-law continuation from the end segments
            xl = interp.x[:2]
            yl = interp(xl)
            sl = (yl[1] - yl[0]) / (xl[1] - xl[0])
            xr = interp.x[-2:]
            yr = interp(xr)
            sr = (yr[1] - yr[0]) / (xr[1] - xr[0])
            left = x < lo
            right = x > hi
            out[left] = np.exp(yl[0] + sl * (x[left] - lo))
            out[right] = np.exp(yr[1] + sr * (x[right] - hi))
        return float(out[0]) if scalar else out

    def to_csv_rows(self) -> list[list[str]]:
        return [[f"{r:.16e}", f"{u:.16e}"] for r, u in zip(self.grid.nodes, self.values)]


@dataclass(frozen=True)
class SolveConfig:
    """Stopping control for the regularized monotone iteration."""

    tol_sup: float = 1e-8
    eps_schedule: tuple[float, ...] | None = None
    max_outer: int = 64
    max_picard: int = 600

    def __post_init__(self):
        if self.tol_sup <= 0:
            raise DomainError("tol_sup must be positive")
        if self.max_outer < 1 or self.max_picard < 1:
            raise DomainError("iteration caps must be positive")
        if self.eps_schedule is not None:
            eps = tuple(float(e) for e in self.eps_schedule)
            if any(e <= 0 for e in eps):
                raise DomainError("eps_schedule must be positive")
            if any(b >= a for a, b in zip(eps, eps[1:])):
                raise DomainError("eps_schedule must be strictly decreasing")
            if eps[-1] >= self.tol_sup:
                raise DomainError("eps_schedule must descend below tol_sup")
            object.__setattr__(self, "eps_schedule", eps)

    def schedule(self) -> tuple[float, ...]:
        if self.eps_schedule is not None:
            return self.eps_schedule
        eps = []
        e = 1.0
        while e >= self.tol_sup / 10.0 and len(eps) < self.max_outer:
            eps.append(e)
            e *= 0.5
        eps.append(e)
        return tuple(eps)


# ---------------------------------------------------------------------------
# core solver
# ---------------------------------------------------------------------------

def _face_conductance(nodes: np.ndarray, N: int) -> np.ndarray:
    """c_{i+1/2} = int_{r_i}^{r_{i+1}} s^{1-N} ds, exact per segment."""
    lo, hi = nodes[:-1], nodes[1:]
    if N == 1:
        return hi - lo
    if N == 2:
        if lo[0] <= 0:
            raise DomainError("N=2 grids must have positive nodes")
        return np.log(hi / lo)
    if lo[0] == 0.0:
        c = np.empty_like(lo)
        c[0] = np.inf  # handled by caller guards; never hit for N>=3 with positive nodes
        c[1:] = (lo[1:] ** (2 - N) - hi[1:] ** (2 - N)) / (N - 2)
        return c
    return (lo ** (2.0 - N) - hi ** (2.0 - N)) / (N - 2)


def _cell_volumes(nodes: np.ndarray, N: int) -> np.ndarray:
    """int_{m-}^{m+} s^{N-1} ds around each interior node."""
    m = 0.5 * (nodes[:-1] + nodes[1:])
    return (m[1:] ** N - m[:-1] ** N) / N


def solve_on_nodes(
    nodes: np.ndarray,
    N: int,
    weight: Callable[[np.ndarray], np.ndarray],
    f: "_funcs.FSpec",
    va: float,
    vb: float,
    config: SolveConfig,
    initial: np.ndarray | None = None,
    enforce_monotone: bool = True,
) -> np.ndarray:
    """Interior solution values of the flux-form system with Dirichlet data va, vb.

    Each regularization level is solved by the shifted fixed-point iteration
        (L + Lam) u_new = Lam u + V w f(u + eps),   Lam = V w |f'(u + eps)|,
    which is monotone from the zero subsolution.  Converged levels must be
    pointwise nondecreasing as eps decreases (checked when enforce_monotone).
    """
    nodes = np.asarray(nodes, dtype=float)
    M = len(nodes)
    if M < 16:
        raise DomainError("need at least 16 nodes")
    if va < 0 or vb < 0:
        raise DomainError("boundary data must be nonnegative")
    c = _face_conductance(nodes, N)
    V = _cell_volumes(nodes, N)
    w_i = np.asarray(weight(nodes[1:-1]), dtype=float)
    if np.any(w_i < 0) or np.any(~np.isfinite(w_i)):
        raise DomainError("weight must be finite and nonnegative at interior nodes")

    lower = -1.0 / c[:-1]
    upper = -1.0 / c[1:]
    diag = 1.0 / c[:-1] + 1.0 / c[1:]
    ab_base = np.zeros((3, M - 2))
    ab_base[0, 1:] = upper[:-1]
    ab_base[2, :-1] = lower[1:]

    u = np.zeros(M - 2) if initial is None else np.asarray(initial, dtype=float).copy()
    if initial is not None and len(u) != M - 2:
        raise DomainError("initial iterate must have one value per interior node")

    prev_level = None
    schedule = config.schedule()
    for eps in schedule:
        last_inc = np.inf
        prev_inc = np.inf
        delta = None
        for it in range(config.max_picard):
            ueps = u + eps
            fvals = _funcs.f_values(f, ueps)
            lam = V * w_i * _funcs.f_slope_bound(f, ueps)
            ab = ab_base.copy()
            ab[1, :] = diag + lam
            rhs = V * w_i * fvals + lam * u
            rhs[0] += va / c[0]
            rhs[-1] += vb / c[-1]
            unew = solve_banded((1, 1), ab, rhs)
            delta = unew - u
            prev_inc, last_inc = last_inc, float(np.max(np.abs(delta)))
            u = unew
            scale = max(1.0, float(np.max(u)))
            if last_inc < max(1e-13 * scale, 3e-13):
                break
            # geometric jump past slow monotone creep: the shifted map is
            # isotone, so an overshoot relaxes back monotonically
            if it % 20 == 19 and np.isfinite(prev_inc) and prev_inc > 0:
                rho = last_inc / prev_inc
                if 0.5 < rho < 0.99995:
                    u = np.maximum(u + delta * (rho / (1.0 - rho)), 0.0)
        else:
            raise NonConvergenceError(
                f"fixed-point iteration cap at eps={eps:g}", last_increment=last_inc
            )
        if np.any(u < 0):
            raise SolverFault("iterate went negative")
        if enforce_monotone and prev_level is not None:
            slack = 1e-12 * max(1.0, float(np.max(u)))
            worst = float(np.min(u - prev_level))
            if worst < -max(slack, 50.0 * last_inc):
                raise SolverFault(
                    f"regularization levels lost monotonicity by {worst:.3e}"
                )
        prev_level = u.copy()
    return u


def solve_radial_dirichlet(
    N: int,
    weight: Callable[[np.ndarray], np.ndarray] | "_funcs.PhiSpec",
    f: "_funcs.FSpec",
    interval: tuple[float, float],
    boundary: tuple[float, float],
    config: SolveConfig | None = None,
    nodes: int = 1024,
    grid: RadialGrid | None = None,
    initial: np.ndarray | None = None,
) -> RadialProfile:
    """Radial Dirichlet problem -(r^{N-1} u')' = r^{N-1} w(r) f(u) on (ra, rb).

    The flat surrogate N=1 drops the geometric factor entirely and admits
    ra = 0 (a uniform grid is used there).
    """
    config = config or SolveConfig()
    ra, rb = interval
    if N == 1:
        if not (0 <= ra < rb):
            raise DomainError("interval must satisfy 0 <= ra < rb")
    elif not (0 < ra < rb):
        raise DomainError("interval must satisfy 0 < ra < rb")
    if grid is None:
        if ra == 0.0:
            grid = RadialGrid(nodes=np.linspace(ra, rb, nodes), dimension=1,
                              grading="uniform")
        else:
            grid = RadialGrid.geometric(ra, rb, nodes, N)
    w = weight if callable(weight) else _funcs.phi_callable(weight)
    va, vb = boundary
    interior = solve_on_nodes(grid.nodes, N, w, f, va, vb, config, initial=initial)
    vals = np.concatenate(([va], interior, [vb]))
    return RadialProfile(grid=grid, values=vals)


def solve_H(
    phi: "_funcs.PhiSpec",
    f: "_funcs.FSpec",
    config: SolveConfig | None = None,
    nodes: int = 4096,
    t_min: float = 1e-7,
) -> RadialProfile:
    """Boundary gauge profile: -H'' = phi(t) f(H) on (0,1), H(0) = H(1) = 0.

    Requires the first moment of phi near zero to be finite; the resulting
    profile is positive and concave, which is verified on the discrete second
    difference.
    """
    config = config or SolveConfig()
    w = _funcs.phi_callable(phi)
    moment = _quad.integrate_singular(lambda s: s * w(s), 0.0, 1.0,
                                      criterion="gauge-moment")
    if moment.status == _quad.INFINITE:
        raise NoSolutionError("near-zero first moment of the weight diverges",
                              certificate=moment.certificate)
    grid = RadialGrid.two_sided_unit(t_min, nodes)
    t = grid.nodes
    interior = solve_on_nodes(t, 1, w, f, 0.0, 0.0, config)
    vals = np.concatenate(([0.0], interior, [0.0]))
    # concavity: second differences of a concave profile are nonpositive
    h = np.diff(t)
    sec = (vals[2:] - vals[1:-1]) / h[1:] - (vals[1:-1] - vals[:-2]) / h[:-1]
    if np.any(sec > 1e-9 * max(1.0, float(np.max(vals)))):
        raise SolverFault("gauge profile lost concavity")
    return RadialProfile(grid=grid, values=vals)


def comparison_check(
    u_super: RadialProfile,
    v_sub: RadialProfile,
    weight=None,
    f=None,
    tol: float = 1e-8,
) -> bool:
    """Nodewise ordering u >= v on a shared grid, within tol * scale slack.

    The caller is responsible for the defect signs (u on the supersolution
    side, v on the subsolution side, ordered boundary data); this check is the
    conclusion of the comparison argument, used as a test oracle.
    """
    if u_super.grid.nodes.shape != v_sub.grid.nodes.shape or not np.allclose(
        u_super.grid.nodes, v_sub.grid.nodes, rtol=1e-14, atol=0.0
    ):
        raise DomainError("comparison requires a shared grid")
    scale = max(1.0, float(np.max(np.abs(v_sub.values))))
    return bool(np.all(u_super.values >= v_sub.values - tol * scale))
