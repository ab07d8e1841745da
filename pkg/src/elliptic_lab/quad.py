"""Improper-integral machinery: windowed geometric scans, finiteness verdicts with
certificates, the existence criteria, and the simple/iterated integral equivalence.

Every improper integral here is reduced to a stream of dyadic windows marching
toward the singular endpoint (zero or infinity).  Window increments of a
power-like integrand decay or grow geometrically, so a stable increment ratio
rho < 1 permits an exact-on-powers tail extrapolation, while a ratio pinned at
or above 1 - DIV_FLOOR for several consecutive windows certifies divergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DivergenceError, DomainError, UnsupportedCombinationError
from . import funcs as _funcs
from . import problem as _problem

FINITE = "finite"
INFINITE = "infinite"
INCONCLUSIVE = "inconclusive"

DIV_FLOOR = 1e-3          # increments failing to decay by this much look divergent
DIV_CONSECUTIVE = 6       # consecutive non-decaying windows required
BLOWUP = 1e6              # fast-divergence value threshold
MAX_WINDOWS = 420
DEFAULT_REL_TOL = 1e-9

_GL_NODES, _GL_WTS = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class ConditionReport:
    """Finiteness verdict for one integral criterion."""

    criterion: str
    status: str
    value: float | None
    certificate: tuple[float, ...] | None
    method: str
    evaluations: int
    error_estimate: float | None = None

    def csv_row(self) -> list[str]:
        val = "" if self.value is None else f"{self.value:.16e}"
        return [self.criterion, self.status, val, self.method, str(self.evaluations)]


@dataclass(frozen=True)
class ExistencePrediction:
    """Existence verdict assembled from the criteria matched to the compact set."""

    exists: bool | None
    criterion_used: str
    reports: tuple[ConditionReport, ...]

    @property
    def determinate(self) -> bool:
        return self.exists is not None


class _EvalCounter:
    __slots__ = ("g", "count")

    def __init__(self, g: Callable):
        self.g = g
        self.count = 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        self.count += len(x)
        v = np.asarray(self.g(x), dtype=float)
        if np.any(v < 0) or np.any(~np.isfinite(v)):
            raise DomainError("integrand must be nonnegative and finite on the interior")
        return v


def _panel(g: _EvalCounter, lo: float, hi: float) -> float:
    x = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
    return 0.5 * (hi - lo) * float(np.dot(_GL_WTS, g(x)))


def _scan(
    g: _EvalCounter,
    windows,
    criterion: str,
    rel_tol: float,
    allow_divergence: bool = True,
    max_windows: int = MAX_WINDOWS,
) -> ConditionReport:
    """Classify sum of window integrals as finite (with value) or infinite (with certificate).

    With allow_divergence=False the streak and blow-up exits are disabled, for
    integrals known finite whose integrand has a long 1/x plateau before its
    vanishing endpoint factor takes over.
    """
    total = 0.0
    cert: list[float] = []
    prev_inc = None
    prev_rho = None
    streak = 0
    zero_run = 0
    for k, (lo, hi) in enumerate(windows):
        if k >= max_windows:
            break
        inc = _panel(g, lo, hi)
        total += inc
        if inc > 0.0:
            cert.append(total)
        if inc == 0.0:
            zero_run += 1
            if zero_run >= 4 and k >= 8:
                return ConditionReport(criterion, FINITE, total, None, "quadrature",
                                       g.count, 0.0)
            continue
        zero_run = 0
        if allow_divergence and total > BLOWUP:
            return ConditionReport(criterion, INFINITE, None, tuple(cert), "quadrature", g.count)
        if prev_inc is not None and prev_inc > 0:
            rho = inc / prev_inc
            streak = streak + 1 if rho >= 1.0 - DIV_FLOOR else 0
            if allow_divergence and streak >= DIV_CONSECUTIVE:
                return ConditionReport(criterion, INFINITE, None, tuple(cert), "quadrature", g.count)
            if rho < 1.0 - 3.0 * DIV_FLOOR and prev_rho is not None:
                remainder = inc * rho / (1.0 - rho)
                drift = abs(rho - prev_rho) / (1.0 - rho)
                err = remainder * drift + 1e-15 * total
                if remainder + err < rel_tol * max(total, 1e-300):
                    value = total + remainder
                    return ConditionReport(criterion, FINITE, value, None, "quadrature",
                                           g.count, err + remainder * drift)
            prev_rho = rho
        prev_inc = inc
    return ConditionReport(criterion, INCONCLUSIVE, None, tuple(cert) or None,
                           "quadrature", g.count)


def _windows_to_point(a: float, width: float):
    """Dyadic windows shrinking toward the endpoint a from a+width."""
    k = 0
    while True:
        yield a + width * 2.0 ** -(k + 1), a + width * 2.0 ** -k
        k += 1


def _windows_to_inf(a: float):
    k = 0
    while True:
        yield a * 2.0 ** k, a * 2.0 ** (k + 1)
        k += 1


def integrate_singular(
    g: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    endpoint_exponents: tuple[float, float] = (0.0, 0.0),
    rel_tol: float = DEFAULT_REL_TOL,
    criterion: str = "integral",
) -> ConditionReport:
    """Improper integral on (a, b) with possible power singularities at both ends.

    The declared endpoint exponents document the expected local behavior
    g(x) ~ (x-a)**sigma_a, (b-x)**sigma_b; the verdict itself comes from the
    windowed scan.  Divergent cases carry the monotone partial-sum certificate.
    """
    if not (a < b):
        raise DomainError("integrate_singular requires a < b")
    counter = _EvalCounter(g)
    mid = float(np.sqrt(a * b)) if a > 0 else 0.5 * (a + b)
    left = _scan(counter, _windows_to_point(a, mid - a), criterion, rel_tol)
    if left.status == INFINITE:
        return left
    gb = _EvalCounter(lambda y: counter.g(b - y))
    right = _scan(gb, _windows_to_point(0.0, b - mid), criterion, rel_tol)
    evals = counter.count + gb.count
    if right.status == INFINITE:
        lift = left.value if left.status == FINITE and left.value else 0.0
        cert = tuple(c + lift for c in right.certificate)
        return ConditionReport(criterion, INFINITE, None, cert, "quadrature", evals)
    if left.status == FINITE and right.status == FINITE:
        err = (left.error_estimate or 0.0) + (right.error_estimate or 0.0)
        return ConditionReport(criterion, FINITE, left.value + right.value, None,
                               "quadrature", evals, err)
    return ConditionReport(criterion, INCONCLUSIVE, None, None, "quadrature", evals)


def integrate_tail(
    g: Callable[[np.ndarray], np.ndarray],
    a: float,
    tail_exponent: float = 0.0,
    rel_tol: float = DEFAULT_REL_TOL,
    criterion: str = "tail-integral",
) -> ConditionReport:
    """Improper integral on (a, inf); same verdict machinery on doubling windows."""
    if a <= 0:
        raise DomainError("integrate_tail requires a > 0")
    counter = _EvalCounter(g)
    return _scan(counter, _windows_to_inf(a), criterion, rel_tol)


# ---------------------------------------------------------------------------
# iterated double integrals
# ---------------------------------------------------------------------------

def _dyadic_anchors_up(w, N: int, lo: float, hi: float, counter: _EvalCounter):
    """Cumulative J(t) = int_lo^t s^{N-1} w(s) ds at dyadic anchors, ascending.

    All additions are of positive segment integrals, so no cancellation occurs.
    A knot is forced at s = 1 to respect spliced weights.
    """
    edges = [lo]
    t = lo
    while t < hi * (1.0 - 1e-12):
        t = min(t * 2.0, hi)
        edges.append(t)
    if lo < 1.0 < hi and not np.any(np.isclose(edges, 1.0)):
        edges = sorted(set(edges) | {1.0})
    edges = np.asarray(edges, dtype=float)
    J = np.zeros_like(edges)
    for i in range(len(edges) - 1):
        seg_lo, seg_hi = edges[i], edges[i + 1]
        x = 0.5 * (seg_hi - seg_lo) * _GL_NODES + 0.5 * (seg_hi + seg_lo)
        J[i + 1] = J[i] + 0.5 * (seg_hi - seg_lo) * float(
            np.dot(_GL_WTS, counter(x) * x ** (N - 1))
        )
    return edges, J


class _InnerCumulative:
    """J(t) for t in [lo, hi] from precomputed ascending anchors plus a local panel.

    Below the first anchor, J is continued by the power law J ~ base (t/lo)^kappa
    (when a positive base and exponent are supplied), matching the local growth
    of the cumulative of a power-like integrand.
    """

    def __init__(self, w, N: int, lo: float, hi: float, counter: _EvalCounter,
                 base: float = 0.0, base_kappa: float | None = None):
        self.N = N
        self.counter = counter
        self.base = base
        self.base_kappa = base_kappa
        self.edges, self.J = _dyadic_anchors_up(w, N, lo, hi, counter)

    def extend_to(self, w, hi: float):
        if hi <= self.edges[-1]:
            return
        edges2, J2 = _dyadic_anchors_up(w, self.N, self.edges[-1], hi, self.counter)
        self.edges = np.concatenate([self.edges, edges2[1:]])
        self.J = np.concatenate([self.J, self.J[-1] + J2[1:]])

    def _below_floor(self, t: float) -> float:
        if self.base <= 0.0:
            return self.base
        if self.base_kappa is None:
            return self.base
        return self.base * (t / self.edges[0]) ** self.base_kappa

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        idx = np.searchsorted(self.edges, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.edges) - 2)
        for j, (tj, i) in enumerate(zip(t, idx)):
            lo = self.edges[i]
            if tj < self.edges[0]:
                out[j] = self._below_floor(tj)
                continue
            if tj <= lo:
                out[j] = self.J[i] + self.base
                continue
            x = 0.5 * (tj - lo) * _GL_NODES + 0.5 * (tj + lo)
            seg = 0.5 * (tj - lo) * float(np.dot(_GL_WTS, self.counter(x) * x ** (self.N - 1)))
            out[j] = self.J[i] + seg + self.base
        return out


def _near0_inner_floor(hi: float) -> float:
    # far below any radius that can influence the verdicts at double precision
    return hi * 2.0 ** -64


def _near0_stub(w, N: int, floor: float, rel_tol: float) -> tuple[float, float]:
    """(int_0^floor s^(N-1) w(s) ds, local growth exponent of the cumulative).

    The stub decays like floor^(sigma+1), which is not negligible for barely
    integrable inner singularities; the exponent lets callers continue the
    cumulative below the floor by a power law.
    """
    counter = _EvalCounter(lambda s: w(s) * s ** (N - 1))
    rep = _scan(counter, _windows_to_point(0.0, floor), "inner-stub", rel_tol)
    value = rep.value if rep.status == FINITE and rep.value is not None else 0.0
    kappa = float(N)
    if value > 0.0:
        rep2 = _scan(counter, _windows_to_point(0.0, 2.0 * floor), "inner-stub2", rel_tol)
        if rep2.status == FINITE and rep2.value is not None and rep2.value > value:
            kappa = float(np.log2(rep2.value / value))
    return value, kappa


def iterated_near0(
    w: Callable[[np.ndarray], np.ndarray],
    N: int,
    t_hi: float = 1.0,
    rel_tol: float = DEFAULT_REL_TOL,
) -> ConditionReport:
    """int_0^{t_hi} t^{1-N} int_0^t s^{N-1} w(s) ds dt with divergence certificates."""
    if N < 3:
        raise DomainError("iterated integrals require N >= 3")
    counter = _EvalCounter(w)
    floor = _near0_inner_floor(t_hi)
    inner_report = _scan(
        _EvalCounter(lambda s: counter.g(s) * s ** (N - 1)),
        _windows_to_point(0.0, t_hi),
        "inner-near0",
        rel_tol,
    )
    if inner_report.status == INFINITE:
        # inner integrand already non-integrable: the outer integrand is +inf
        return ConditionReport("iterated-near0", INFINITE, None, inner_report.certificate,
                               "quadrature", inner_report.evaluations)
    if inner_report.status == INCONCLUSIVE:
        return ConditionReport("iterated-near0", INCONCLUSIVE, None, None,
                               "quadrature", inner_report.evaluations)
    stub, kappa = _near0_stub(w, N, floor, rel_tol)
    J = _InnerCumulative(w, N, floor, t_hi, counter, base=stub, base_kappa=kappa)
    outer = _EvalCounter(lambda t: J(t) * t ** (1 - N))
    rep = _scan(outer, _windows_to_point(0.0, t_hi), "iterated-near0", rel_tol)
    evals = counter.count + outer.count + inner_report.evaluations
    return ConditionReport(rep.criterion, rep.status, rep.value, rep.certificate,
                           "quadrature", evals, rep.error_estimate)


def iterated_tail(
    w: Callable[[np.ndarray], np.ndarray],
    N: int,
    t_lo: float = 1.0,
    inner_lower: float | None = None,
    inner_base: float = 0.0,
    rel_tol: float = DEFAULT_REL_TOL,
) -> ConditionReport:
    """int_{t_lo}^inf t^{1-N} (inner_base + int_{inner_lower}^t s^{N-1} w ds) dt."""
    if N < 3:
        raise DomainError("iterated integrals require N >= 3")
    if inner_lower is None:
        inner_lower = t_lo
    counter = _EvalCounter(w)
    J = _InnerCumulative(w, N, inner_lower, 2.0 * t_lo, counter, base=inner_base)

    def outer_fn(t: np.ndarray) -> np.ndarray:
        J.extend_to(w, float(np.max(t)))
        return J(t) * t ** (1 - N)

    outer = _EvalCounter(outer_fn)
    rep = _scan(outer, _windows_to_inf(t_lo), "iterated-tail", rel_tol)
    evals = counter.count + outer.count
    return ConditionReport(rep.criterion, rep.status, rep.value, rep.certificate,
                           "quadrature", evals, rep.error_estimate)


def iterated_tail_value(
    w: Callable,
    N: int,
    inner_lower: float,
    r: float,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """Scalar double-integral profile value; raises DivergenceError when infinite."""
    if inner_lower == 0.0:
        counter = _EvalCounter(w)
        inner_rep = _scan(
            _EvalCounter(lambda s: counter.g(s) * s ** (N - 1)),
            _windows_to_point(0.0, max(r, 1.0)),
            "inner-near0",
            rel_tol,
        )
        if inner_rep.status == INFINITE:
            raise DivergenceError(
                "inner integrand non-integrable at zero", inner_rep.certificate
            )
        floor = _near0_inner_floor(max(r, 1.0))
        stub, _ = _near0_stub(w, N, floor, rel_tol)
        rep = iterated_tail(w, N, t_lo=r, inner_lower=floor, inner_base=stub,
                            rel_tol=rel_tol)
    else:
        rep = iterated_tail(w, N, t_lo=r, inner_lower=inner_lower, rel_tol=rel_tol)
    if rep.status == INFINITE:
        raise DivergenceError("double-integral profile diverges", rep.certificate)
    if rep.status == INCONCLUSIVE:
        raise DivergenceError("double-integral profile could not be classified", None)
    return float(rep.value)


def iterated_tail_profile(
    w: Callable,
    N: int,
    inner_lower: float,
    radii: np.ndarray,
    rel_tol: float = DEFAULT_REL_TOL,
) -> np.ndarray:
    """Double-integral profile on a whole increasing radius grid.

    The tail beyond the last radius is evaluated once; interior values follow by
    a backward cumulative pass with positive per-segment additions.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise DomainError("radii must be strictly increasing")
    r_last = float(radii[-1])
    tail_val = iterated_tail_value(w, N, inner_lower, r_last, rel_tol=rel_tol)
    counter = _EvalCounter(w)
    stub = 0.0
    kappa = None
    if inner_lower == 0.0:
        lo_anchor = _near0_inner_floor(max(r_last, 1.0))
        stub, kappa = _near0_stub(w, N, lo_anchor, rel_tol)
    else:
        lo_anchor = inner_lower
    start = min(lo_anchor, float(radii[0]))
    J = _InnerCumulative(w, N, start, r_last, counter, base=stub, base_kappa=kappa)
    out = np.empty_like(radii)
    out[-1] = tail_val
    for i in range(len(radii) - 2, -1, -1):
        lo, hi = radii[i], radii[i + 1]
        x = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
        seg = 0.5 * (hi - lo) * float(np.dot(_GL_WTS, J(x) * x ** (1 - N)))
        out[i] = out[i + 1] + seg
    return out


# ---------------------------------------------------------------------------
# existence classification
# ---------------------------------------------------------------------------

def _analytic_report(criterion: str, finite: bool) -> ConditionReport:
    return ConditionReport(criterion, FINITE if finite else INFINITE, None, None, "analytic", 0)


def _analytic_near0_finite(phi, weight_shift: float) -> bool | None:
    """Finiteness of int_0^1 r^(1+weight_shift) phi(r) dr for the exact families."""
    if isinstance(phi, (_funcs.PowerPhi, _funcs.PowerSplitPhi, _funcs.PowerLogPhi,
                        _funcs.IterLogPhi)):
        sigma = phi.near0_exponent() + 1.0 + weight_shift
        # at sigma = -1 the integral is logarithmically divergent
        return sigma > -1.0
    return None


def _analytic_tail_finite(phi) -> bool | None:
    if isinstance(phi, (_funcs.PowerPhi, _funcs.PowerSplitPhi)):
        return phi.tail_exponent() + 1.0 < -1.0
    if isinstance(phi, (_funcs.PowerLogPhi, _funcs.IterLogPhi)):
        # positive slowly-varying log factors push the boundary case to divergence
        return phi.tail_exponent() + 1.0 < -1.0
    return None


def classify_existence(problem: "_problem.ProblemSpec", rel_tol: float = DEFAULT_REL_TOL) -> ExistencePrediction:
    """Existence verdict for the inequality on the complement of the compact set.

    Compact sets with a smooth solid component use the full-line first-moment
    criterion; finite point sets (power nonlinearity only) use the tail first
    moment together with the shifted near-zero moment.  For the exact weight
    families the quadrature verdict is cross-checked against the closed
    exponent inequalities; disagreement yields an inconclusive prediction.
    """
    phi = problem.phi
    w = _funcs.phi_callable(phi)
    if problem.N == 2:
        # positive superharmonic functions on the plane admit no decaying states
        return ExistencePrediction(False, "two-dimensional-obstruction", ())

    if isinstance(problem.K, _problem.Ball):
        near0 = integrate_singular(lambda s: s * w(s), 0.0, 1.0,
                                   criterion="first-moment-near0", rel_tol=rel_tol)
        tail = integrate_tail(lambda s: s * w(s), 1.0,
                              criterion="first-moment-tail", rel_tol=rel_tol)
        reports = [near0, tail]
        quad_exists = _both_finite(near0, tail)
        ana0 = _analytic_near0_finite(phi, 0.0)
        ana1 = _analytic_tail_finite(phi)
        analytic_exists = None if (ana0 is None or ana1 is None) else (ana0 and ana1)
        if analytic_exists is not None:
            reports.append(_analytic_report("first-moment-analytic", analytic_exists))
        exists = _combine(quad_exists, analytic_exists)
        return ExistencePrediction(exists, "first-moment", tuple(reports))

    # degenerate compact set: origin or a finite set of points
    if not isinstance(problem.f, _funcs.PowerF):
        raise UnsupportedCombinationError(
            "point-set compact sets are classified only for power nonlinearities"
        )
    p = problem.f.p
    shift = (1.0 + p) * (problem.N - 2)
    near0 = integrate_singular(lambda s: s ** (1.0 + shift) * w(s), 0.0, 1.0,
                               criterion="shifted-moment-near0", rel_tol=rel_tol)
    tail = integrate_tail(lambda s: s * w(s), 1.0,
                          criterion="first-moment-tail", rel_tol=rel_tol)
    reports = [near0, tail]
    quad_exists = _both_finite(near0, tail)
    ana0 = _analytic_near0_finite(phi, shift)
    ana1 = _analytic_tail_finite(phi)
    analytic_exists = None if (ana0 is None or ana1 is None) else (ana0 and ana1)
    if analytic_exists is not None:
        reports.append(_analytic_report("shifted-moment-analytic", analytic_exists))
    exists = _combine(quad_exists, analytic_exists)
    return ExistencePrediction(exists, "shifted-moment", tuple(reports))


def _both_finite(*reports: ConditionReport) -> bool | None:
    if any(r.status == INCONCLUSIVE for r in reports):
        return None
    return all(r.status == FINITE for r in reports)


def _combine(quad_exists: bool | None, analytic_exists: bool | None) -> bool | None:
    if analytic_exists is None:
        return quad_exists
    if quad_exists is None:
        return None
    return quad_exists if quad_exists == analytic_exists else None


# ---------------------------------------------------------------------------
# simple vs iterated equivalence and boundary certificates
# ---------------------------------------------------------------------------

def lemma_zero_check(
    phi: "_funcs.PhiSpec",
    N: int,
    regime: str,
    rel_tol: float = DEFAULT_REL_TOL,
) -> tuple[ConditionReport, ConditionReport]:
    """Verdicts for the simple first moment and the iterated double integral.

    regime is one of "near0", "tail", "full".  The two verdicts agree for any
    continuous nonnegative weight; callers may assert that equivalence.
    """
    if N < 3:
        raise DomainError("equivalence check requires N >= 3")
    if regime not in ("near0", "tail", "full"):
        raise DomainError("regime must be near0 | tail | full")
    w = _funcs.phi_callable(phi)
    if regime == "near0":
        simple = integrate_singular(lambda s: s * w(s), 0.0, 1.0,
                                    criterion="simple-near0", rel_tol=rel_tol)
        iterated = iterated_near0(w, N, 1.0, rel_tol=rel_tol)
        return simple, iterated
    if regime == "tail":
        simple = integrate_tail(lambda s: s * w(s), 1.0,
                                criterion="simple-tail", rel_tol=rel_tol)
        iterated = iterated_tail(w, N, 1.0, rel_tol=rel_tol)
        return simple, iterated
    s0 = integrate_singular(lambda s: s * w(s), 0.0, 1.0,
                            criterion="simple-full", rel_tol=rel_tol)
    s1 = integrate_tail(lambda s: s * w(s), 1.0, criterion="simple-full", rel_tol=rel_tol)
    simple = _merge_reports("simple-full", s0, s1)
    it0 = iterated_near0(w, N, 1.0, rel_tol=rel_tol)
    if it0.status == FINITE:
        counter = _EvalCounter(w)
        base_rep = _scan(
            _EvalCounter(lambda s: counter.g(s) * s ** (N - 1)),
            _windows_to_point(0.0, 1.0), "inner-near0", rel_tol,
        )
        base = base_rep.value if base_rep.value is not None else 0.0
        it1 = iterated_tail(w, N, 1.0, inner_lower=1.0, inner_base=base, rel_tol=rel_tol)
    else:
        it1 = it0
    iterated = _merge_reports("iterated-full", it0, it1)
    return simple, iterated


def _merge_reports(criterion: str, a: ConditionReport, b: ConditionReport) -> ConditionReport:
    evals = a.evaluations + (b.evaluations if b is not a else 0)
    if a.status == INFINITE or b.status == INFINITE:
        src = a if a.status == INFINITE else b
        return ConditionReport(criterion, INFINITE, None, src.certificate, "quadrature", evals)
    if a.status == FINITE and b.status == FINITE:
        err = (a.error_estimate or 0.0) + (b.error_estimate or 0.0)
        return ConditionReport(criterion, FINITE, a.value + b.value, None, "quadrature", evals, err)
    return ConditionReport(criterion, INCONCLUSIVE, None, None, "quadrature", evals)


@dataclass(frozen=True)
class BoundaryCertificate:
    """Monotone sequence I_k = int_{r_k}^{r0} (rho - r_k) phi(rho) d rho, r_k = r0 2^-k."""

    radii: tuple[float, ...]
    values: tuple[float, ...]
    divergent: bool
    limit: float | None


def divergence_certificate_boundary(
    phi: "_funcs.PhiSpec",
    r0: float,
    levels: int = 24,
) -> BoundaryCertificate:
    """Near-boundary divergence certificate from shrinking moment integrals."""
    if levels < 3:
        raise DomainError("levels must be >= 3")
    if r0 <= 0:
        raise DomainError("r0 must be positive")
    w = _funcs.phi_callable(phi)
    radii = [r0 * 2.0 ** -(k + 1) for k in range(levels)]
    values = []
    for rk in radii:
        counter = _EvalCounter(lambda rho, rk=rk: np.maximum(rho - rk, 0.0) * w(rho))
        # each level is a proper integral: the integrand vanishes linearly at rk,
        # so the scan runs in convergence-only mode and divergence is judged
        # across levels below
        rep = _scan(counter, _windows_to_point(rk, r0 - rk), "boundary-moment",
                    1e-10, allow_divergence=False, max_windows=2 * MAX_WINDOWS)
        if rep.status != FINITE:
            raise DomainError("boundary moment integral failed to converge")
        values.append(rep.value)
    vals = np.asarray(values)
    inc = np.diff(vals)
    divergent = False
    if len(inc) >= DIV_CONSECUTIVE + 1:
        ratios = inc[1:] / np.where(inc[:-1] > 0, inc[:-1], np.inf)
        tail_ratios = ratios[-DIV_CONSECUTIVE:]
        divergent = bool(np.all(tail_ratios >= 1.0 - DIV_FLOOR))
    limit = None
    if not divergent and len(inc) >= 2 and inc[-2] > 0:
        rho_last = inc[-1] / inc[-2]
        if rho_last < 0.95:
            limit = float(vals[-1] + inc[-1] * rho_last / (1.0 - rho_last))
        else:
            limit = float(vals[-1])
    return BoundaryCertificate(tuple(radii), tuple(values), divergent, limit)


def monotone_tail_minorant(phi: "_funcs.PhiSpec", r0: float) -> Callable:
    """Running-minimum wrapper min_{r0/2 <= rho <= r} phi(rho) for non-monotone tails.

    Valid for evaluation streams with nondecreasing maxima, which is how the
    tail scans sample.
    """
    state = {"min": float(_funcs.eval_phi(phi, r0 / 2.0)), "hi": r0 / 2.0}

    def psi(r: np.ndarray) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        for i, ri in enumerate(np.maximum(r, r0 / 2.0)):
            if ri > state["hi"]:
                grid = np.geomspace(state["hi"], ri, 17)
                state["min"] = min(state["min"], float(np.min(_funcs.phi_values(phi, grid))))
                state["hi"] = ri
            out[i] = min(state["min"], _funcs.eval_phi(phi, ri))
        return out

    return psi


def phi_tail_monotone(phi: "_funcs.PhiSpec", r0: float, samples: int = 64) -> bool:
    """Sampled monotonicity of the weight beyond r0 (hypothesis check for tail verdicts)."""
    r = np.geomspace(r0, r0 * 1e6, samples)
    v = _funcs.phi_values(phi, r)
    dv = np.diff(v)
    tol = 1e-12 * np.maximum(v[:-1], v[1:])
    return bool(np.all(dv <= tol) or np.all(dv >= -tol))
