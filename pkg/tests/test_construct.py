"""Minimal solutions, two-parameter families, exterior shells, gluing, superposition."""

from __future__ import annotations

import numpy as np
import pytest

import elliptic_lab as el
from elliptic_lab.construct import _radial_inequality_residual


# ---------------------------------------------------------------------------
# minimal solution around the origin
# ---------------------------------------------------------------------------

def test_minimal_matches_closed_form(minimal64, closed_form):
    rw = np.geomspace(0.1, 10.0, 400)
    rel = np.max(np.abs(minimal64.value.profile(rw) - closed_form(rw)) / closed_form(rw))
    assert rel <= 0.02


def test_minimal_refuses_nonexistent():
    bad = el.ProblemSpec(3, el.PowerSplitPhi(-3.0, -2.0), el.PowerF(1.0), el.Origin())
    with pytest.raises(el.NoSolutionError):
        el.minimal_solution(bad, n_max=8, nodes=512)


def test_minimal_vanishing_moment_at_origin(minimal64):
    # r^{N-2} u -> 0 toward the puncture: decreasing trend on the smallest
    # trusted octaves
    prof = minimal64.value.profile
    lo = minimal64.value.trusted_window[0]
    r = lo * 2.0 ** np.arange(4)[::-1]
    vals = r * prof(r)
    assert np.all(np.diff(vals) < 0)
    assert vals[-1] < 0.3


def test_minimal_monotone_exhaustion(minimal64):
    # raw iterates are pointwise nondecreasing across the ladder; evaluation
    # of the finer level on the coarser nodes carries only interpolation slack
    levels = minimal64.value.raw_levels
    for prev, cur in zip(levels, levels[1:]):
        lo = prev.r_min * 1.05
        hi = prev.r_max / 1.05
        r = prev.grid.interior
        mask = (r >= lo) & (r <= hi)
        gap = cur(r[mask]) - prev.values[1:-1][mask]
        scale = max(1.0, float(np.max(prev.values)))
        assert float(np.min(gap)) >= -1e-8 * scale


def test_minimal_window_increments_decrease(minimal64):
    inc = minimal64.value.window_increments
    assert all(b < a for a, b in zip(inc, inc[1:]))


def test_minimal_tail_decay(minimal64):
    vals = minimal64.value.profile.values
    tail = vals[-80:-1]
    assert np.all(np.diff(tail[tail > 0]) < 0)


def test_minimal_generalizes_to_other_parameters():
    # N=4, p=2, alpha=-3: the substitution oracle gives c^3 = 9/5, q = -1/3
    cf = el.xi_closed_form(4, 2.0, -3.0)
    assert cf.coefficient ** 3 == pytest.approx(1.8, rel=1e-12)
    problem = el.ProblemSpec(4, el.PowerPhi(-3.0), el.PowerF(2.0), el.Origin())
    ms = el.minimal_solution(problem, n_max=64, nodes=2048)
    rw = np.geomspace(0.1, 10.0, 300)
    rel = np.max(np.abs(ms.profile(rw) - cf(rw)) / cf(rw))
    assert rel <= 0.02
    # the per-node truncation estimate covers the true error where extrapolated
    r = ms.profile.grid.nodes[1:-1]
    err = np.abs(ms.profile.values[1:-1] - cf(r))
    mask = np.isfinite(ms.truncation)
    covered = err[mask] <= 5.0 * np.maximum(ms.truncation[mask], 1e-14) + 0.05 * cf(r)[mask]
    assert np.mean(covered) >= 0.95


def test_minimal_with_log_corrected_weight():
    phi = el.PowerLogPhi(-3.2, 0.5)
    pb = el.ProblemSpec(3, phi, el.PowerF(1.0), el.Origin())
    assert el.classify_existence(pb).exists is True
    ms = el.minimal_solution(pb, n_max=32, nodes=1024)
    rep = el.residual_radial(ms.raw_last, pb, "equality", r_window=ms.trusted_window)
    assert rep.sup_norm_equation_defect <= 1e-8
    assert np.all(ms.raw_last.values[1:-1] > 0)


def test_exterior_with_general_nonlinearity(ball_problem):
    f = el.GeneralDecreasingF(lambda t: np.exp(-t))
    pb = el.ProblemSpec(3, el.PowerSplitPhi(-1.0, -3.0), f, el.Ball(1.0))
    ext = el.exterior_ball_minimal(pb, n_max=16, nodes=1024)
    vals = ext.profile.values
    assert np.all(vals[1:-1] > 0)
    assert np.all(np.diff(vals[-30:-1]) < 0)


def test_constructions_refuse_zero_weight():
    phi0 = el.TabulatedPhi(knots=np.array([0.5, 2.0]), values=np.array([0.0, 0.0]),
                           near0_exp=0.0, tail_exp=-3.0)
    with pytest.raises(el.DomainError):
        el.exterior_ball_minimal(el.ProblemSpec(3, phi0, el.PowerF(1.0), el.Ball(1.0)),
                                 n_max=4, nodes=256)
    with pytest.raises(el.DomainError):
        el.minimal_solution(el.ProblemSpec(3, phi0, el.PowerF(1.0), el.Origin()),
                            n_max=4, nodes=256)


# ---------------------------------------------------------------------------
# two-parameter family
# ---------------------------------------------------------------------------

def test_family_sandwich_margins(family_grid):
    for (a, b), fm in family_grid.value.items():
        scale = max(1.0, a * 4096.0 + b)
        assert fm.sandwich_lower_margin >= -1e-8 * scale
        assert fm.sandwich_upper_margin >= -1e-8 * scale


def test_family_asymptotics(family_grid):
    for (a, b), fm in family_grid.value.items():
        est = el.asymptotics(fm.profile, 3, samples=8, window=fm.trusted_window)
        tol = 0.01 * max(1.0, a, b)
        assert abs(est.a_hat - a) <= tol, (a, b, est.a_hat)
        assert abs(est.b_hat - b) <= tol, (a, b, est.b_hat)


def test_family_minimality(problem_power, minimal64):
    # the zero-parameter member dominates the minimal iterate on the same grid
    fm = el.family_member(problem_power, 1.0, 0.5, minimal64.value, n_max=64)
    assert el.comparison_check(fm.raw_last, minimal64.value.raw_last)


def test_family_zero_parameters_consistent(problem_power, minimal64):
    # a = b = 0 reproduces the minimal solution within the construction's
    # own truncation scale (both estimate the same exhaustion limit)
    fm = el.family_member(problem_power, 0.0, 0.0, minimal64.value, n_max=64)
    rw = np.geomspace(0.5, 2.0, 50)
    rel = np.max(np.abs(fm.profile(rw) - minimal64.value.profile(rw))
                 / minimal64.value.profile(rw))
    assert rel <= 0.01
    assert el.comparison_check(fm.raw_last, minimal64.value.raw_last)


def test_family_harnack_type_lower_bound(problem_power, minimal64):
    # inf of u(r) r^{-(2+alpha)/(1+p)} over r <= 1, and the tail-side analogue
    # over r >= 1, are positive and stable under refinement (exponent -1/2 here)
    inner_vals = {}
    outer_vals = {}
    for nodes in (1024, 2048):
        ms = el.minimal_solution(problem_power, n_max=32, nodes=nodes)
        prof = ms.profile
        r = prof.grid.nodes
        lo, hi = ms.trusted_window
        inner = (r >= lo) & (r <= 1.0)
        outer = (r >= 1.0) & (r <= hi)
        inner_vals[nodes] = float(np.min(prof.values[inner] * r[inner] ** 0.5))
        outer_vals[nodes] = float(np.min(prof.values[outer] * r[outer] ** 0.5))
        assert inner_vals[nodes] > 0
        assert outer_vals[nodes] > 0
    assert abs(inner_vals[2048] - inner_vals[1024]) <= 0.2 * inner_vals[2048]
    assert abs(outer_vals[2048] - outer_vals[1024]) <= 0.2 * outer_vals[2048]


def test_family_rejects_general_f(minimal64):
    f = el.GeneralDecreasingF(lambda t: 1.0 / (1.0 + t))
    problem = el.ProblemSpec(3, el.PowerPhi(-3.0), f, el.Origin())
    with pytest.raises(el.UnsupportedCombinationError):
        el.family_member(problem, 1.0, 0.0, minimal64.value, n_max=8)


# ---------------------------------------------------------------------------
# exterior shells
# ---------------------------------------------------------------------------

def test_exterior_profile_shape(exterior32, ball_problem):
    prof = exterior32.value.profile
    assert prof.values[0] == 0.0
    assert np.all(prof.values[1:-1] > 0)
    tail = prof.values[-40:-1]
    assert np.all(np.diff(tail) < 0)


def test_exterior_refusal():
    bad = el.ProblemSpec(3, el.PowerPhi(-3.0), el.PowerF(1.0), el.Ball(1.0))
    with pytest.raises((el.NoSolutionError, el.DivergenceError)):
        el.exterior_ball_minimal(bad, n_max=4, nodes=256)


def test_exterior_ratio_bracket(exterior32, ball_problem):
    H = el.solve_H(ball_problem.phi, ball_problem.f, nodes=4096)
    lo, hi, _ = el.ratio_bracket(exterior32.value.profile, H, 1.0, (1e-3, 0.1))
    assert hi / lo <= 10.0


# ---------------------------------------------------------------------------
# gluing
# ---------------------------------------------------------------------------

def test_glue_on_identical_supersolution_branches(closed_form, problem_power):
    # the closed-form solution satisfies the equation exactly, so the first
    # amplitude already passes and the glued field dominates the branch
    r_in = np.geomspace(1e-3, 1.0, 300)
    r_out = np.geomspace(1.0, 1e3, 300)
    inner = el.RadialProfile(grid=el.RadialGrid(nodes=r_in, dimension=3),
                             values=closed_form(r_in))
    outer = el.RadialProfile(grid=el.RadialGrid(nodes=r_out, dimension=3),
                             values=closed_form(r_out))
    U = el.glue_supersolution(inner, outer, problem_power)
    assert U.M == 1.0
    rr = np.geomspace(2e-3, 500.0, 200)
    assert np.all(U(rr) >= closed_form(rr))


def test_glued_field_residual(glued_split):
    U = glued_split.value
    problem = U.problem
    rr = np.geomspace(U.inner.r_min * 2.0, U.outer.r_max / 2.0, 400)
    res = _radial_inequality_residual(U, problem, rr)
    assert float(np.min(res)) >= -1e-6


def test_glue_amplitude_monotone_improvement(glued_split):
    # on the blend annulus the residual improves when the bump amplitude grows
    U = glued_split.value
    rr = np.geomspace(U.rho0, U.R_blend, 64)
    res1 = _radial_inequality_residual(U, U.problem, rr)
    bigger = el.GluedField(inner=U.inner, outer=U.outer, rho0=U.rho0,
                           R_blend=U.R_blend, M=2.0 * U.M, N=U.N, problem=U.problem)
    res2 = _radial_inequality_residual(bigger, U.problem, rr)
    assert float(np.min(res2)) >= float(np.min(res1)) - 1e-12


def test_glue_needs_overlap(problem_power, closed_form):
    r_in = np.geomspace(1e-3, 0.2, 64)
    r_out = np.geomspace(1.0, 100.0, 64)
    inner = el.RadialProfile(grid=el.RadialGrid(nodes=r_in, dimension=3),
                             values=closed_form(r_in))
    outer = el.RadialProfile(grid=el.RadialGrid(nodes=r_out, dimension=3),
                             values=closed_form(r_out))
    with pytest.raises(el.DomainError):
        el.glue_supersolution(inner, outer, problem_power)


# ---------------------------------------------------------------------------
# superposition
# ---------------------------------------------------------------------------

def test_superposition_single_center_identity(glued_split):
    U = glued_split.value
    V = el.superposition_field(U, [[0.0, 0.0, 0.0]])
    rng = np.random.default_rng(7)
    pts = rng.normal(size=(64, 3)) * 3.0
    exact = U(np.linalg.norm(pts, axis=1))
    assert np.max(np.abs(V(pts) - exact)) == 0.0


def test_superposition_delta_geometry(glued_split):
    V = el.superposition_field(glued_split.value, [[0, 0, 0], [4, 0, 0]])
    assert V.delta(np.array([[2.0, 0.0, 0.0]]))[0] == pytest.approx(2.0)
    assert V.delta(np.array([[4.0, 1.0, 0.0]]))[0] == pytest.approx(1.0)


def test_superposition_two_center_audit(glued_split):
    centers = ((0.0, 0.0, 0.0), (4.0, 0.0, 0.0))
    V = el.superposition_field(glued_split.value, centers)
    problem = el.ProblemSpec(3, el.PowerSplitPhi(-3.0, -3.0), el.PowerF(1.0),
                             el.PointSet(centers))
    rep = el.residual_field(V, problem, samples=10_000, h=0.01, seed=42)
    assert rep.fraction_nonnegative >= 0.99


def test_superposition_empty_centers():
    with pytest.raises(el.DomainError):
        el.superposition_field(lambda r: 1.0 / r, np.zeros((0, 3)))
