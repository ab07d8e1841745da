"""Weight and nonlinearity families, their closed-form companions, and profiles built from them.

The weight families model phi(delta): pure powers, a spliced two-exponent power,
power-log corrections, iterated-log corrections, and tabulated data with declared
endpoint growth.  The nonlinearity families model positive nonincreasing f(t),
with the antiderivative map G(v) = int_0^v dt/f(t) and its inverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import ConstructionError, DomainError, NoSolutionError
from . import quad as _quad
from . import bvp1d as _bvp1d


# ---------------------------------------------------------------------------
# weight families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerPhi:
    """phi(r) = r**alpha."""

    alpha: float

    def near0_exponent(self) -> float:
        return self.alpha

    def tail_exponent(self) -> float:
        return self.alpha

    def has_log_factor(self) -> bool:
        return False


@dataclass(frozen=True)
class PowerSplitPhi:
    """phi(r) = r**alpha on (0,1], r**beta on (1,inf); both branches equal 1 at r=1."""

    alpha: float
    beta: float

    def near0_exponent(self) -> float:
        return self.alpha

    def tail_exponent(self) -> float:
        return self.beta

    def has_log_factor(self) -> bool:
        return False


@dataclass(frozen=True)
class PowerLogPhi:
    """phi(r) = r**alpha * log(1+r)**beta with beta > 0."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise DomainError("PowerLogPhi requires beta > 0")

    def near0_exponent(self) -> float:
        # log(1+r) ~ r as r -> 0, so the log factor contributes a full power.
        return self.alpha + self.beta

    def tail_exponent(self) -> float:
        return self.alpha

    def has_log_factor(self) -> bool:
        return True


@dataclass(frozen=True)
class IterLogPhi:
    """phi(r) = r**alpha * prod_k ell_k(r)**beta_k with iterated logs.

    ell_1(r) = log(1+r) and ell_{k+1}(r) = log(1 + ell_k(r)).  Every factor
    behaves like r near zero, so the near-zero exponent is alpha + sum(betas);
    at infinity all factors are slowly varying and the tail exponent is alpha.
    """

    alpha: float
    betas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not self.betas:
            raise DomainError("IterLogPhi requires at least one log exponent")
        if any(b <= 0 for b in self.betas):
            raise DomainError("IterLogPhi exponents must be positive")

    def near0_exponent(self) -> float:
        return self.alpha + sum(self.betas)

    def tail_exponent(self) -> float:
        return self.alpha

    def has_log_factor(self) -> bool:
        return True


@dataclass(frozen=True, eq=False)
class TabulatedPhi:
    """Log-log interpolated weight with declared power behavior outside the knots."""

    knots: np.ndarray
    values: np.ndarray
    near0_exp: float
    tail_exp: float

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        if knots.ndim != 1 or knots.size < 2:
            raise DomainError("TabulatedPhi needs at least two knots")
        if np.any(np.diff(knots) <= 0) or knots[0] <= 0:
            raise DomainError("TabulatedPhi knots must be positive and strictly increasing")
        if values.shape != knots.shape:
            raise DomainError("TabulatedPhi values must match knots")
        if np.any(values < 0):
            raise DomainError("TabulatedPhi values must be nonnegative")

    def near0_exponent(self) -> float:
        return self.near0_exp

    def tail_exponent(self) -> float:
        return self.tail_exp

    def has_log_factor(self) -> bool:
        return False

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.values == 0.0))


PhiSpec = PowerPhi | PowerSplitPhi | PowerLogPhi | IterLogPhi | TabulatedPhi


def _iterlog_factors(r: np.ndarray, betas: Sequence[float]) -> np.ndarray:
    out = np.ones_like(r)
    ell = np.log1p(r)
    for b in betas:
        out = out * ell ** b
        ell = np.log1p(ell)
    return out


def phi_values(phi: PhiSpec, r: np.ndarray) -> np.ndarray:
    """Vectorized weight evaluation on positive radii."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("weight evaluation requires r > 0")
    if isinstance(phi, PowerPhi):
        return r ** phi.alpha
    if isinstance(phi, PowerSplitPhi):
        return np.where(r <= 1.0, r ** phi.alpha, r ** phi.beta)
    if isinstance(phi, PowerLogPhi):
        return r ** phi.alpha * np.log1p(r) ** phi.beta
    if isinstance(phi, IterLogPhi):
        return r ** phi.alpha * _iterlog_factors(r, phi.betas)
    if isinstance(phi, TabulatedPhi):
        if phi.is_zero:
            return np.zeros_like(r)
        logk = np.log(phi.knots)
        with np.errstate(divide="ignore"):
            logv = np.log(phi.values)
        out = np.exp(np.interp(np.log(r), logk, logv))
        lo = r < phi.knots[0]
        hi = r > phi.knots[-1]
        out = np.where(lo, phi.values[0] * (r / phi.knots[0]) ** phi.near0_exp, out)
        out = np.where(hi, phi.values[-1] * (r / phi.knots[-1]) ** phi.tail_exp, out)
        return out
    raise DomainError(f"unknown weight family: {type(phi).__name__}")


def eval_phi(phi: PhiSpec, r: float) -> float:
    """Weight value at a single radius r > 0."""
    return float(phi_values(phi, np.asarray([r]))[0])


def phi_callable(phi: PhiSpec) -> Callable[[np.ndarray], np.ndarray]:
    return lambda r: phi_values(phi, r)


# ---------------------------------------------------------------------------
# nonlinearity families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerF:
    """f(t) = t**(-p), p > 0."""

    p: float

    def __post_init__(self):
        if self.p <= 0:
            raise DomainError("PowerF requires p > 0")


@dataclass(frozen=True, eq=False)
class GeneralDecreasingF:
    """Positive nonincreasing nonlinearity given by an evaluator callable.

    Positivity and monotonicity are spot-checked on a log-spaced sample grid at
    construction.  Constant evaluators are admitted as the degenerate case.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    def __post_init__(self):
        t = np.geomspace(1e-6, 1e3, 121)
        v = np.asarray(self.evaluator(t), dtype=float)
        if v.shape != t.shape:
            raise ConstructionError("evaluator must be vectorized over t")
        if np.any(~np.isfinite(v)) or np.any(v < 0):
            raise ConstructionError("f must be finite and nonnegative on (0, inf)")
        # rapidly decaying evaluators may underflow at huge t; demand strict
        # positivity on the moderate range only
        if np.any(v[t <= 10.0] <= 0):
            raise ConstructionError("f must be positive")
        if np.any(np.diff(v) > 1e-12 * np.maximum(v[:-1], v[1:])):
            raise ConstructionError("f must be nonincreasing on (0, inf)")


FSpec = PowerF | GeneralDecreasingF


def f_values(f: FSpec, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if isinstance(f, PowerF):
        return t ** (-f.p)
    return np.asarray(f.evaluator(t), dtype=float)


def f_slope_bound(f: FSpec, t: np.ndarray) -> np.ndarray:
    """Pointwise bound on |f'(t)|, used by the monotone solver shift."""
    t = np.asarray(t, dtype=float)
    if isinstance(f, PowerF):
        return f.p * t ** (-f.p - 1.0)
    h = 1e-6 * (1.0 + np.abs(t))
    lo = np.maximum(t - h, 1e-300)
    return np.abs(f_values(f, t + h) - f_values(f, lo)) / (t + h - lo)


def G_and_inverse(f: FSpec) -> tuple[Callable, Callable]:
    """Antiderivative map G(v) = int_0^v dt/f(t) and its inverse.

    For f = t**(-p) both directions are closed form.  Otherwise G is computed
    by composite Gauss quadrature and the inverse by bracketed root finding on
    the strictly increasing G (relative tolerance 1e-12).
    """
    if isinstance(f, PowerF):
        p = f.p

        def G(v):
            v = np.asarray(v, dtype=float)
            return v ** (1.0 + p) / (1.0 + p)

        def Ginv(s):
            s = np.asarray(s, dtype=float)
            if np.any(s < 0):
                raise DomainError("G inverse requires s >= 0")
            return ((1.0 + p) * s) ** (1.0 / (1.0 + p))

        return G, Ginv

    nodes, wts = np.polynomial.legendre.leggauss(48)

    def G_scalar(v: float) -> float:
        if v < 0:
            raise DomainError("G requires v >= 0")
        if v == 0.0:
            return 0.0
        total = 0.0
        pieces = 64
        edges = np.geomspace(v / 2.0 ** pieces, v, pieces + 1)
        edges[0] = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            x = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
            fx = f_values(f, x)
            if np.any(fx <= 0):
                raise ConstructionError("1/f not integrable: f vanishes")
            total += 0.5 * (hi - lo) * float(np.sum(wts / fx))
        return total

    def G(v):
        arr = np.asarray(v, dtype=float)
        out = np.array([G_scalar(x) for x in np.atleast_1d(arr)])
        return out.reshape(arr.shape) if arr.ndim else float(out[0])

    def Ginv_scalar(s: float) -> float:
        if s < 0:
            raise DomainError("G inverse requires s >= 0")
        if s == 0.0:
            return 0.0
        hi = 1.0
        for _ in range(200):
            if G_scalar(hi) >= s:
                break
            hi *= 2.0
        else:
            raise ConstructionError("G appears bounded; cannot invert")
        lo = 0.0
        return brentq(lambda v: G_scalar(v) - s, lo, hi, xtol=1e-300, rtol=1e-12)

    def Ginv(s):
        arr = np.asarray(s, dtype=float)
        out = np.array([Ginv_scalar(x) for x in np.atleast_1d(arr)])
        return out.reshape(arr.shape) if arr.ndim else float(out[0])

    return G, Ginv


# ---------------------------------------------------------------------------
# closed-form power solution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormPower:
    """u(r) = coefficient * r**exponent, a verified-by-substitution solution."""

    coefficient: float
    exponent: float

    def __call__(self, r):
        return self.coefficient * np.asarray(r, dtype=float) ** self.exponent


def xi_closed_form(N: int, p: float, alpha: float) -> ClosedFormPower:
    """Minimal power solution of -Lap(u) = r**alpha * u**(-p) around an isolated point.

    The exponent follows from matching powers, q = (2+alpha)/(1+p).  The
    coefficient is re-derived by substituting c*r**q into the equation:

        -Lap(c r**q) = -c q (q+N-2) r**(q-2)  must equal  c**(-p) r**(alpha-p q),

    giving c**(1+p) = -(1+p)**2 / ((2+alpha) (N+alpha+p(N-2))).  Admissibility
    requires N+alpha+p(N-2) > 0 and alpha < -2, which makes the right side
    positive.
    """
    if N < 3:
        raise DomainError("closed-form power solution requires N >= 3")
    if p <= 0:
        raise DomainError("requires p > 0")
    if not (N + alpha + p * (N - 2) > 0 and alpha < -2):
        raise NoSolutionError(
            f"no positive solution: need N+alpha+p(N-2) > 0 and alpha < -2, "
            f"got N={N}, p={p}, alpha={alpha}"
        )
    q = (2.0 + alpha) / (1.0 + p)
    cpow = -((1.0 + p) ** 2) / ((2.0 + alpha) * (N + alpha + p * (N - 2)))
    c = cpow ** (1.0 / (1.0 + p))
    return ClosedFormPower(coefficient=c, exponent=q)


# ---------------------------------------------------------------------------
# double-integral profiles and implicit supersolutions
# ---------------------------------------------------------------------------

def double_integral_profile(
    phi: PhiSpec,
    N: int,
    inner_lower: float,
    r: float,
    rel_tol: float = 1e-9,
) -> float:
    """Value of int_r^inf t**(1-N) int_{inner_lower}^t s**(N-1) phi(s) ds dt.

    Raises DivergenceError (with a certificate) when either the inner integrand
    is non-integrable at zero or the outer tail diverges.
    """
    if N < 3:
        raise DomainError("profile requires N >= 3")
    if inner_lower < 0:
        raise DomainError("inner_lower must be >= 0")
    if inner_lower > 0 and r < inner_lower * (1.0 - 1e-12):
        raise DomainError("evaluation radius must not precede inner_lower")
    if isinstance(phi, TabulatedPhi) and phi.is_zero:
        return 0.0
    w = phi_callable(phi)
    return _quad.iterated_tail_value(w, N, inner_lower, r, rel_tol=rel_tol)


@dataclass(frozen=True, eq=False)
class SupersolutionData:
    """Radii, profile values, and the underlying double-integral values."""

    r: np.ndarray
    values: np.ndarray
    A: np.ndarray


def supersolution_values(
    phi: PhiSpec,
    f: FSpec,
    N: int,
    inner_lower: float,
    r_min: float,
    r_max: float | None = None,
    nodes: int = 1024,
    rel_tol: float = 1e-9,
) -> SupersolutionData:
    """Sampled v(r) = G^{-1}(A(r)) on a geometric grid from r_min.

    A is the double-integral profile; the chain rule together with f
    nonincreasing makes v satisfy -Lap(v) >= phi * f(v).  The tail value is
    computed once and extended inward by a backward cumulative pass, so all
    additions are of positive quantities.
    """
    if r_min <= 0:
        raise DomainError("r_min must be positive")
    if r_max is None:
        r_max = 4096.0 * max(r_min, 1.0, inner_lower)
    if r_max <= r_min:
        raise DomainError("r_max must exceed r_min")
    if inner_lower > 0 and r_min < inner_lower * (1.0 - 1e-12):
        raise DomainError("grid must start at or after inner_lower")
    w = phi_callable(phi)
    r = np.geomspace(r_min, r_max, nodes)
    A = _quad.iterated_tail_profile(w, N, inner_lower, r, rel_tol=rel_tol)
    _, Ginv = G_and_inverse(f)
    v = np.asarray(Ginv(A), dtype=float)
    if np.any(v <= 0):
        raise ConstructionError("supersolution profile must be positive")
    return SupersolutionData(r=r, values=v, A=A)


def supersolution_profile(
    phi: PhiSpec,
    f: FSpec,
    N: int,
    inner_lower: float,
    r_min: float,
    r_max: float | None = None,
    nodes: int = 1024,
    rel_tol: float = 1e-9,
) -> "_bvp1d.RadialProfile":
    """RadialProfile carrier of v(r) = G^{-1}(double-integral profile at r)."""
    data = supersolution_values(phi, f, N, inner_lower, r_min, r_max=r_max,
                                nodes=nodes, rel_tol=rel_tol)
    grid = _bvp1d.RadialGrid(nodes=data.r, dimension=N, grading="geometric",
                             ratio=float((data.r[-1] / data.r[0]) ** (1.0 / (len(data.r) - 1))))
    return _bvp1d.RadialProfile(grid=grid, values=data.values)
