"""Solution constructions: minimal solutions by expanding-annulus exhaustion,
two-parameter families, exterior-ball minimal solutions, glued global
supersolutions, and point-set superpositions.

Exhaustion truncation converges only algebraically for slowly decaying
minimal solutions (the measured deficit follows (r/n)^kappa with kappa < 1),
so the returned minimal profile is a guarded pointwise extrapolation of the
monotone ladder; the raw iterates and their increments stay available on the
result for the discrete order checks, which hold exactly on shared grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainError,
    GluingError,
    NoSolutionError,
    UnsupportedCombinationError,
)
from ._extrapolate import aitken_limit_rows
from .bvp1d import RadialGrid, RadialProfile, SolveConfig, solve_on_nodes
from .problem import Ball, Origin, ProblemSpec
from . import funcs as _funcs
from . import quad as _quad

# extrapolation ladder refinement: steps of 2^(1/3) below the final annulus
_REFINE_STEPS = 6
_COVER_MARGIN = 1.10


def _require_positive_weight(phi) -> None:
    if isinstance(phi, _funcs.TabulatedPhi) and phi.is_zero:
        raise DomainError("constructions require a positive weight")


def _trusted_window(n_max: float) -> tuple[float, float]:
    """Radius range covered (with margin) by the three deepest ladder levels.

    Inside this range the pointwise extrapolation has at least three entries,
    so profile values approximate the exhaustion limit rather than the
    truncated last iterate.
    """
    n3 = n_max * 2.0 ** (-2.0 / 3.0)
    return (_COVER_MARGIN / n3, n3 / _COVER_MARGIN)


def _grid_for_annulus(ra: float, rb: float, nodes_final: int,
                      decades_final: float, dimension: int) -> RadialGrid:
    decades = math.log10(rb / ra)
    count = max(192, int(round(nodes_final * decades / decades_final)))
    return RadialGrid.geometric(ra, rb, count, dimension)


@dataclass(eq=False)
class MinimalSolutionResult:
    """Accelerated minimal-solution estimate plus the raw monotone ladder."""

    profile: RadialProfile
    raw_last: RadialProfile
    raw_levels: list[RadialProfile]
    raw_ns: list[float]
    ladder_ns: list[float]
    ladder_levels: list[RadialProfile] = field(repr=False, default_factory=list)
    window_increments: list[float] = field(default_factory=list)
    converged: bool = False
    truncation: np.ndarray | None = None
    trusted_window: tuple[float, float] = (0.0, np.inf)

    def __call__(self, r):
        return self.profile(r)


def _window_increment(prev: RadialProfile, cur: RadialProfile,
                      window: tuple[float, float]) -> float:
    lo, hi = window
    mask = (cur.grid.interior >= lo) & (cur.grid.interior <= hi)
    if not np.any(mask):
        return np.inf
    rw = cur.grid.interior[mask]
    return float(np.max(np.abs(cur.values[1:-1][mask] - prev(rw))))


def _assert_exhaustion_monotone(prev: RadialProfile, cur: RadialProfile,
                                window: tuple[float, float]) -> None:
    lo = max(window[0], prev.r_min * 1.05)
    hi = min(window[1], prev.r_max / 1.05)
    mask = (cur.grid.interior >= lo) & (cur.grid.interior <= hi)
    if not np.any(mask):
        return
    rw = cur.grid.interior[mask]
    gap = cur.values[1:-1][mask] - prev(rw)
    scale = max(1.0, float(np.max(prev.values)))
    if float(np.min(gap)) < -1e-8 * scale:
        raise NoSolutionError(
            f"expanding-annulus iterates lost monotonicity by {float(np.min(gap)):.3e}"
        )


def minimal_solution(
    problem: ProblemSpec,
    n_max: int = 64,
    config: SolveConfig | None = None,
    nodes: int = 2048,
    window: tuple[float, float] = (0.5, 2.0),
) -> MinimalSolutionResult:
    """Minimal solution around the origin as the limit of zero-data annulus problems.

    Solves on [1/n, n] for doubling n up to n_max (the raw monotone ladder),
    refines the top of the ladder at ratio 2^(1/3), and returns a guarded
    pointwise Aitken extrapolation on the final grid.  Refuses when the
    existence criteria fail.
    """
    config = config or SolveConfig()
    if not isinstance(problem.K, Origin):
        raise DomainError("minimal_solution expects the origin as compact set")
    _require_positive_weight(problem.phi)
    prediction = _quad.classify_existence(problem)
    if prediction.exists is not True:
        _refuse(prediction)
    if n_max < 4:
        raise DomainError("n_max must be at least 4")
    w = _funcs.phi_callable(problem.phi)
    decades_final = math.log10(float(n_max) ** 2)

    raw_ns: list[float] = []
    n = 2.0
    while n <= n_max:
        raw_ns.append(n)
        n *= 2.0
    refine_ns = sorted(
        {float(n_max) * 2.0 ** (-j / 3.0) for j in range(1, _REFINE_STEPS + 1)}
        - set(raw_ns)
    )
    all_ns = sorted(set(raw_ns) | set(refine_ns))

    levels: dict[float, RadialProfile] = {}
    increments: list[float] = []
    prev_raw: RadialProfile | None = None
    for nv in all_ns:
        grid = _grid_for_annulus(1.0 / nv, nv, nodes, decades_final, problem.N)
        interior = solve_on_nodes(grid.nodes, problem.N, w, problem.f, 0.0, 0.0, config)
        prof = RadialProfile(grid=grid, values=np.concatenate(([0.0], interior, [0.0])))
        levels[nv] = prof
        if nv in raw_ns:
            if prev_raw is not None:
                _assert_exhaustion_monotone(prev_raw, prof, window)
                increments.append(_window_increment(prev_raw, prof, window))
            prev_raw = prof

    raw_levels = [levels[nv] for nv in raw_ns]
    raw_last = raw_levels[-1]

    final_grid = RadialGrid.geometric(1.0 / n_max, float(n_max), nodes, problem.N)
    accel, trunc = _extrapolate_ladder(levels, all_ns, final_grid)
    profile = RadialProfile(grid=final_grid, values=accel)
    converged = bool(increments and increments[-1] < config.tol_sup)
    return MinimalSolutionResult(
        profile=profile,
        raw_last=raw_last,
        raw_levels=raw_levels,
        raw_ns=[float(v) for v in raw_ns],
        ladder_ns=[float(v) for v in all_ns],
        ladder_levels=[levels[nv] for nv in all_ns],
        window_increments=increments,
        converged=converged,
        truncation=trunc,
        trusted_window=_trusted_window(float(n_max)),
    )


def _extrapolate_ladder(
    levels: dict[float, RadialProfile],
    all_ns: Sequence[float],
    final_grid: RadialGrid,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-node guarded Aitken on the uniform-ratio top of the ladder."""
    top = [nv for nv in all_ns if nv >= all_ns[-1] * 2.0 ** (-(_REFINE_STEPS + 0.5) / 3.0)]
    r = final_grid.nodes
    interior = slice(1, len(r) - 1)
    rv = r[interior]
    table = np.full((len(top), len(rv)), np.nan)
    valid = np.zeros_like(table, dtype=bool)
    for i, nv in enumerate(top):
        prof = levels[nv]
        lo = prof.r_min * _COVER_MARGIN
        hi = prof.r_max / _COVER_MARGIN
        mask = (rv >= lo) & (rv <= hi)
        table[i, mask] = prof(rv[mask])
        valid[i, mask] = True
    last = levels[all_ns[-1]]
    raw_vals = last(rv)
    limits, errors = aitken_limit_rows(table, valid)
    use = np.isfinite(limits) & (np.sum(valid, axis=0) >= 3)
    out = np.where(use, limits, raw_vals)
    # the exhaustion is nondecreasing, so the limit cannot fall below the last iterate
    out = np.maximum(out, raw_vals)
    trunc = np.where(use, errors, np.inf)
    vals = np.concatenate(([0.0], out, [0.0]))
    vals[0] = last.values[0]
    vals[-1] = last.values[-1]
    return vals, trunc


@dataclass(eq=False)
class FamilyMemberResult:
    """Two-parameter family member with its discrete sandwich margins."""

    profile: RadialProfile
    raw_last: RadialProfile
    a: float
    b: float
    sandwich_lower_margin: float
    sandwich_upper_margin: float
    window_increments: list[float] = field(default_factory=list)
    trusted_window: tuple[float, float] = (0.0, np.inf)

    def __call__(self, r):
        return self.profile(r)


def family_member(
    problem: ProblemSpec,
    a: float,
    b: float,
    xi: MinimalSolutionResult,
    n_max: int = 64,
    config: SolveConfig | None = None,
    nodes: int = 2048,
    window: tuple[float, float] = (0.5, 2.0),
    initial_scale: float = 0.0,
) -> FamilyMemberResult:
    """Family member with boundary data a r^{2-N} + b + xi_n(r) on each annulus.

    The data uses the level-matched raw minimal iterate xi_n (same grid), which
    makes a r^{2-N} + b a discrete subsolution and a r^{2-N} + b + xi_n a
    discrete supersolution of the same tridiagonal system; the sandwich then
    holds at solver tolerance independent of discretization error.
    """
    config = config or SolveConfig()
    if a < 0 or b < 0:
        raise DomainError("family parameters must be nonnegative")
    if not isinstance(problem.K, Origin):
        raise DomainError("family members are built around the origin")
    if not isinstance(problem.f, _funcs.PowerF):
        raise UnsupportedCombinationError("family construction requires a power nonlinearity")
    w = _funcs.phi_callable(problem.phi)
    Nd = problem.N

    ladder_ns = [nv for nv in xi.ladder_ns if nv <= n_max]
    if not ladder_ns:
        raise DomainError("minimal-solution ladder does not reach n_max")
    raw_set = set(xi.raw_ns)

    levels: dict[float, RadialProfile] = {}
    increments: list[float] = []
    low_margin = np.inf
    up_margin = np.inf
    prev: RadialProfile | None = None
    for nv, xi_prof in zip(xi.ladder_ns, xi.ladder_levels):
        if nv > n_max:
            continue
        grid = xi_prof.grid
        rn = grid.nodes
        lower = a * rn ** (2.0 - Nd) + b
        data = lower + xi_prof.values
        initial = None
        if initial_scale > 0.0:
            initial = np.full(len(rn) - 2, initial_scale)
        interior = solve_on_nodes(
            grid.nodes, Nd, w, problem.f, float(data[0]), float(data[-1]),
            config, initial=initial,
        )
        vals = np.concatenate(([data[0]], interior, [data[-1]]))
        prof = RadialProfile(grid=grid, values=vals)
        levels[nv] = prof
        low_margin = min(low_margin, float(np.min(vals - lower)))
        up_margin = min(up_margin, float(np.min(lower + xi_prof.values - vals)))
        if nv in raw_set:
            if prev is not None:
                increments.append(_window_increment(prev, prof, window))
            prev = prof

    final_ns = sorted(levels)
    raw_last = levels[final_ns[-1]]
    final_grid = raw_last.grid
    accel, _ = _extrapolate_ladder(levels, final_ns, final_grid)
    accel[0] = raw_last.values[0]
    accel[-1] = raw_last.values[-1]
    profile = RadialProfile(grid=final_grid, values=accel)
    return FamilyMemberResult(
        profile=profile,
        raw_last=raw_last,
        a=a,
        b=b,
        sandwich_lower_margin=low_margin,
        sandwich_upper_margin=up_margin,
        window_increments=increments,
        trusted_window=_trusted_window(float(final_ns[-1])),
    )


@dataclass(eq=False)
class ExteriorBallResult:
    """Exterior minimal solution with its boundary-layer window for ratio analysis."""

    profile: RadialProfile
    layer_window: tuple[float, float]
    window_increments: list[float] = field(default_factory=list)
    converged: bool = False

    def __call__(self, r):
        return self.profile(r)


def exterior_ball_minimal(
    problem: ProblemSpec,
    n_max: int = 32,
    config: SolveConfig | None = None,
    nodes: int = 2048,
    delta_min: float = 1e-6,
) -> ExteriorBallResult:
    """Minimal solution outside a ball as the limit of zero-data shell problems.

    Solves on (R, R+n) for doubling n with zero data at both ends; the weight
    argument is the distance r - R, so the grid grades geometrically in that
    distance.  Refused when the full first-moment criterion fails.
    """
    config = config or SolveConfig()
    if not isinstance(problem.K, Ball):
        raise DomainError("exterior_ball_minimal expects a ball compact set")
    _require_positive_weight(problem.phi)
    prediction = _quad.classify_existence(problem)
    if prediction.exists is not True:
        _refuse(prediction)
    R = problem.K.radius
    w = _funcs.phi_callable(problem.phi)

    def shifted_weight(r: np.ndarray) -> np.ndarray:
        return w(np.maximum(np.asarray(r, dtype=float) - R, 1e-300))

    prev: RadialProfile | None = None
    increments: list[float] = []
    profile: RadialProfile | None = None
    n = 2.0
    while n <= n_max:
        grid = RadialGrid.boundary_layer(R, delta_min, float(n), nodes, problem.N)
        interior = solve_on_nodes(grid.nodes, problem.N, shifted_weight, problem.f,
                                  0.0, 0.0, config)
        profile = RadialProfile(grid=grid,
                                values=np.concatenate(([0.0], interior, [0.0])))
        if prev is not None:
            lo, hi = R + 10.0 * delta_min, R + 0.5
            mask = (profile.grid.interior >= lo) & (profile.grid.interior <= hi)
            rw = profile.grid.interior[mask]
            increments.append(float(np.max(np.abs(profile.values[1:-1][mask] - prev(rw)))))
        prev = profile
        n *= 2.0
    converged = bool(increments and increments[-1] < max(config.tol_sup, 1e-6))
    return ExteriorBallResult(
        profile=profile,
        layer_window=(max(1e-3, 2.0 * delta_min), 0.1),
        window_increments=increments,
        converged=converged,
    )


def _refuse(prediction) -> None:
    for rep in prediction.reports:
        if rep.status == _quad.INFINITE and rep.certificate:
            raise NoSolutionError(
                f"criterion {rep.criterion} diverges",
                certificate=rep.certificate,
            )
    raise NoSolutionError(
        f"existence criteria refuse this problem (exists={prediction.exists})"
    )


# ---------------------------------------------------------------------------
# glued global supersolutions
# ---------------------------------------------------------------------------

def _smoothstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return s ** 3 * (10.0 + s * (-15.0 + 6.0 * s))


@dataclass(eq=False)
class GluedField:
    """U(r) = W(r) + M (1+r^2)^{(2-N)/2} with W blended from two branches.

    W follows the inner branch below rho0 and the outer branch above R_blend,
    with a quintic smoothstep blend of log-values in between; the superharmonic
    bump absorbs the blend defect once the amplitude M is large enough.
    """

    inner: RadialProfile
    outer: RadialProfile
    rho0: float
    R_blend: float
    M: float
    N: int
    problem: ProblemSpec

    def W(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        rr = np.atleast_1d(r)
        out = np.empty_like(rr)
        lo = rr <= self.rho0
        hi = rr >= self.R_blend
        mid = ~(lo | hi)
        if np.any(lo):
            out[lo] = self.inner(rr[lo])
        if np.any(hi):
            out[hi] = self.outer(rr[hi])
        if np.any(mid):
            s = (np.log(rr[mid]) - np.log(self.rho0)) / (
                np.log(self.R_blend) - np.log(self.rho0)
            )
            sm = _smoothstep(s)
            out[mid] = np.exp(
                (1.0 - sm) * np.log(self.inner(rr[mid]))
                + sm * np.log(self.outer(rr[mid]))
            )
        return float(out[0]) if scalar else out

    def bump(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return (1.0 + r ** 2) ** ((2.0 - self.N) / 2.0)

    def __call__(self, r) -> np.ndarray:
        return self.W(r) + self.M * self.bump(r)


def _radial_inequality_residual(
    U: Callable, problem: ProblemSpec, radii: np.ndarray, h_log: float = 1e-3
) -> np.ndarray:
    """Normalized residual of -Lap(U) - phi(delta) f(U) at the given radii."""
    r = np.asarray(radii, dtype=float)
    rp = r * math.exp(h_log)
    rm = r * math.exp(-h_log)
    u0 = np.asarray(U(r), dtype=float)
    up = np.asarray(U(rp), dtype=float)
    um = np.asarray(U(rm), dtype=float)
    hp = rp - r
    hm = r - rm
    d1 = (hm * hm * up - hp * hp * um + (hp * hp - hm * hm) * u0) / (
        hp * hm * (hp + hm)
    )
    d2 = 2.0 * (hm * up + hp * um - (hp + hm) * u0) / (hp * hm * (hp + hm))
    lap = d2 + (problem.N - 1) / r * d1
    delta = problem.delta_radial(r)
    rhs = _funcs.phi_values(problem.phi, delta) * _funcs.f_values(problem.f, u0)
    return (-lap - rhs) / np.maximum(1.0, rhs)


def glue_supersolution(
    inner: RadialProfile,
    outer: RadialProfile,
    problem: ProblemSpec,
    audit_radii: Sequence[float] | None = None,
    tol: float = 1e-6,
    max_pow: int = 40,
) -> GluedField:
    """Join a near-singularity branch and a tail branch into a global supersolution.

    The amplitude M runs over powers of two until the finite-difference
    inequality residual is >= -tol (normalized by the local equation scale) at
    every audit radius.  Residual improvement is monotone in M because the bump
    is superharmonic with -Lap bounded away from zero on compact annuli.
    """
    if inner.r_min >= outer.r_min:
        raise DomainError("inner branch must start below the outer branch")
    R_blend = outer.r_min
    rho0 = R_blend / 2.0
    if inner.r_max < rho0:
        raise DomainError("branches must overlap enough to blend")
    if audit_radii is None:
        lo = inner.r_min * 2.0
        hi = outer.r_max / 2.0
        audit = np.concatenate(
            [np.geomspace(lo, hi, 200), np.geomspace(rho0, R_blend, 32)]
        )
        audit = np.sort(audit)
    else:
        audit = np.sort(np.asarray(list(audit_radii), dtype=float))

    M = 1.0
    for _ in range(max_pow + 1):
        field_ = GluedField(inner=inner, outer=outer, rho0=rho0,
                            R_blend=R_blend, M=M, N=problem.N, problem=problem)
        res = _radial_inequality_residual(field_, problem, audit)
        worst = float(np.min(res))
        if worst >= -tol:
            return field_
        M *= 2.0
    raise GluingError(
        f"no amplitude up to 2^{max_pow} yields a nonnegative residual",
        worst_radius=float(audit[int(np.argmin(res))]),
    )


# ---------------------------------------------------------------------------
# superpositions over point sets
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SuperpositionField:
    """V(x) = sum over centers of U(|x - a|); evaluation-only."""

    U: Callable[[np.ndarray], np.ndarray]
    centers: np.ndarray

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if self.centers.shape[0] < 1:
            raise DomainError("superposition requires at least one center")

    def delta(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d = np.full(x.shape[0], np.inf)
        for a in self.centers:
            d = np.minimum(d, np.linalg.norm(x - a[None, :], axis=1))
        return d

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        total = np.zeros(x.shape[0])
        for a in self.centers:
            total += np.asarray(self.U(np.linalg.norm(x - a[None, :], axis=1)))
        return total


def superposition_field(U, centers) -> SuperpositionField:
    """Superpose a positive decreasing radial bound over finitely many centers."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[0] == 0:
        raise DomainError("superposition requires at least one center")
    for i in range(centers.shape[0]):
        for j in range(i + 1, centers.shape[0]):
            if np.linalg.norm(centers[i] - centers[j]) == 0.0:
                raise DomainError("centers must be pairwise distinct")
    fn = U if callable(U) else _funcs.phi_callable(U)
    return SuperpositionField(U=fn, centers=centers)
