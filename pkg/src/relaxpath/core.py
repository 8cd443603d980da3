"""Problem instances, the capping function and point solves.

The relaxed maximum entropy problem is

    min_{p in Delta(m)}  sum_j m_j p_j log(p_j / u_j)   s.t.  |p_j - q_j| <= 1/nu

with ``Delta(m) = {p >= 0 : m . p = 1}``.  Every optimum is described by one
scalar ``mu`` through ``p_j = q_j + theta(mu u_j - nu q_j) / nu`` where ``mu``
solves ``G(nu, mu) = sum_j m_j theta(mu u_j - nu q_j) = 0``.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .config import TOL
from .errors import (
    DimensionMismatch,
    InfeasiblePoint,
    InvalidNu,
    NegativeObserved,
    NoConvergence,
    NonPositivePrior,
    NotNormalized,
    ZeroPrimal,
)


def _frozen(x):
    x = np.array(x, dtype=np.float64)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Prior ``u``, observation ``q`` and multiplicities ``m`` (all length n)."""

    u: np.ndarray
    q: np.ndarray
    m: np.ndarray

    @property
    def n(self):
        return self.u.shape[0]

    @property
    def total_mass(self):
        return float(self.m.sum())

    def __repr__(self):
        return f"ProblemInstance(n={self.n})"


class SegmentSums(NamedTuple):
    """Sums over one path segment, defining the line ``mu U - nu Q + M = 0``.

    ``M`` is the signed multiplicity of the bound coordinates and ``U``, ``Q``
    the m-weighted prior and observed mass of the free coordinates.
    """

    M: float
    U: float
    Q: float

    def mu_at(self, nu):
        return (nu * self.Q - self.M) / self.U

    @property
    def slope(self):
        return self.Q / self.U


@dataclass(frozen=True, eq=False)
class PrimalDualPoint:
    nu: float
    mu: float
    p: np.ndarray
    alpha: np.ndarray
    Z: float
    eta: float
    s: np.ndarray


def validate_instance(u, q, m=None, tol=TOL.simplex):
    """Check the simplex invariants and return a :class:`ProblemInstance`.

    ``m`` defaults to all ones.  The sums ``m.u`` and ``m.q`` must equal one
    to relative tolerance ``tol``.
    """
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    q = np.atleast_1d(np.asarray(q, dtype=np.float64))
    m = np.ones_like(u) if m is None else np.atleast_1d(np.asarray(m, dtype=np.float64))
    if u.ndim != 1 or u.shape != q.shape or u.shape != m.shape:
        raise DimensionMismatch(
            f"u, q and m must be 1-d of equal length, got {u.shape}, {q.shape}, {m.shape}")
    if u.size == 0:
        raise DimensionMismatch("instance must have at least one coordinate")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(q)) and np.all(np.isfinite(m))):
        raise NotNormalized("non-finite entries")
    if np.any(u <= 0) or np.any(m <= 0):
        raise NonPositivePrior("u and m must be strictly positive")
    if np.any(q < 0):
        raise NegativeObserved("q must be nonnegative")
    su = float(np.dot(m, u))
    sq = float(np.dot(m, q))
    if abs(su - 1.0) > tol or abs(sq - 1.0) > tol:
        raise NotNormalized(f"m.u = {su!r}, m.q = {sq!r}; both must be 1")
    return ProblemInstance(_frozen(u), _frozen(q), _frozen(m))


def theta(x):
    """Capping function, clamp to [-1, 1]."""
    if np.ndim(x) == 0:
        return max(-1.0, min(1.0, float(x)))
    return np.clip(x, -1.0, 1.0)


def evaluate_G(inst, nu, mu):
    return _kernels.capped_sum(inst.u, inst.q, inst.m, float(nu), float(mu))


def signs_at(inst, nu, mu, tol=1e-10):
    """Partition at ``(nu, mu)``: +1 / -1 for upper / lower bound, 0 if free."""
    x = mu * inst.u - nu * inst.q
    scale = tol * np.maximum(1.0, np.abs(mu * inst.u) + np.abs(nu * inst.q))
    s = np.zeros(inst.n, dtype=np.int8)
    s[x >= 1.0 - scale] = 1
    s[x <= -1.0 + scale] = -1
    return s


def solve_mu_at(inst, nu, tol=1e-10, max_iter=TOL.bisect_iters):
    """Zero of ``G(nu, .)`` by bisection after doubling an upper bracket.

    Bisection runs to floating point resolution; ``tol`` only governs the
    classification of the returned sign vector.  When the zero set is an
    interval (no free coordinates) any point of it is returned.
    """
    nu = float(nu)
    if not nu > 0 or not np.isfinite(nu):
        raise InvalidNu(f"nu must be positive and finite, got {nu!r}")
    # grow the bracket instead of dividing by u, which overflows for tiny u_j
    lo = 0.0
    hi = 1.0 + nu * float(np.max(inst.q))
    while evaluate_G(inst, nu, hi) < 0:
        lo, hi = hi, 2.0 * hi
        if not np.isfinite(hi):
            raise NoConvergence(f"no sign change of G at nu={nu!r}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = evaluate_G(inst, nu, mid)
        if g < 0:
            lo = mid
        elif g > 0:
            hi = mid
        else:
            lo = hi = mid
            break
    else:
        raise NoConvergence(f"bisection did not converge in {max_iter} iterations")
    # prefer the endpoint with the smaller residual
    mu = lo if abs(evaluate_G(inst, nu, lo)) <= abs(evaluate_G(inst, nu, hi)) else hi
    return mu, signs_at(inst, nu, mu, tol)


def _check_on_path(inst, nu, mu, tol):
    if not nu > 0:
        raise InvalidNu(f"nu must be positive, got {nu!r}")
    g = evaluate_G(inst, nu, mu)
    scale = float(np.dot(inst.m, 1.0 + np.abs(mu * inst.u) + np.abs(nu * inst.q)))
    if abs(g) > tol * scale:
        raise InfeasiblePoint(f"G({nu!r}, {mu!r}) = {g!r} is not zero")


def primal_from(inst, nu, mu, tol=1e-9):
    """``p_j = q_j + theta(mu u_j - nu q_j) / nu`` for a point on the path."""
    nu = float(nu)
    mu = float(mu)
    _check_on_path(inst, nu, mu, tol)
    return inst.q + np.clip(mu * inst.u - nu * inst.q, -1.0, 1.0) / nu


def dual_from(inst, nu, mu, tol=1e-9, sign_tol=1e-10):
    """Sparse tilt ``alpha``, normaliser ``Z`` and ``eta`` at a path point.

    ``p_j = u_j exp(alpha_j) / Z`` with ``Z = nu / mu`` and ``alpha_j = 0``
    exactly for free coordinates.  ``eta = log(mu / nu) - 1``.
    """
    p = primal_from(inst, nu, mu, tol)
    if np.any(p <= 0):
        raise ZeroPrimal(f"primal has non-positive entries at nu={nu!r}")
    s = signs_at(inst, nu, mu, sign_tol)
    Z = nu / mu
    alpha = np.log(p * Z / inst.u)
    alpha[s == 0] = 0.0
    eta = float(np.log(mu / nu) - 1.0)
    return alpha, Z, eta


def point_at(inst, nu, mu, tol=1e-9, sign_tol=1e-10):
    p = primal_from(inst, nu, mu, tol)
    alpha, Z, eta = dual_from(inst, nu, mu, tol, sign_tol)
    return PrimalDualPoint(float(nu), float(mu), p, alpha, Z, eta,
                           signs_at(inst, nu, mu, sign_tol))


@dataclass
class KKTReport:
    ok: bool
    passed: np.ndarray       # per coordinate
    condition: np.ndarray    # 4 lower bound, 5 interior, 6 upper bound
    violation: np.ndarray
    worst: float
    simplex_residual: float
    box_excess: float


def kkt_check(inst, point, tol=1e-8):
    """Verify the optimality conditions at ``point`` against one multiplier.

    With the per-unit gradient ``g_j = log(p_j / u_j) + 1`` and the level
    ``1 - log Z`` shared by every coordinate, a coordinate at its lower bound
    needs ``g_j >= level``, a free one ``g_j == level`` and one at its upper
    bound ``g_j <= level``.  Feasibility (simplex and box) is checked too.
    """
    p = np.asarray(point.p, dtype=np.float64)
    if np.any(p <= 0):
        raise ZeroPrimal("kkt_check needs a strictly positive primal")
    nu = float(point.nu)
    g = np.log(p / inst.u) + 1.0
    level = 1.0 - np.log(point.Z)
    gap = p - inst.q
    at_lower = np.abs(gap + 1.0 / nu) <= tol
    at_upper = np.abs(gap - 1.0 / nu) <= tol
    condition = np.full(inst.n, 5, dtype=np.int8)
    condition[at_lower] = 4
    condition[at_upper] = 6
    violation = np.abs(g - level)
    violation[at_lower] = np.maximum(level - g[at_lower], 0.0)
    violation[at_upper] = np.maximum(g[at_upper] - level, 0.0)
    passed = violation <= tol
    simplex_residual = abs(float(np.dot(inst.m, p)) - 1.0)
    box_excess = max(float(np.max(np.abs(gap))) - 1.0 / nu, 0.0)
    ok = bool(passed.all() and simplex_residual <= tol and box_excess <= tol)
    return KKTReport(ok, passed, condition, violation, float(violation.max()),
                     simplex_residual, box_excess)


def weighted_transform(u, q, delta, tol=TOL.simplex):
    """Turn per-coordinate accuracies ``|p_j - q_j| <= delta_j / nu`` into an
    instance with multiplicities ``m = delta`` and ``u / delta``, ``q / delta``.

    Map a solution back with :func:`unweight`.
    """
    u = np.asarray(u, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)
    if u.shape != q.shape or u.shape != delta.shape:
        raise DimensionMismatch("u, q and delta must have equal length")
    if np.any(delta <= 0):
        raise NonPositivePrior("delta must be strictly positive")
    if abs(u.sum() - 1.0) > tol or abs(q.sum() - 1.0) > tol:
        raise NotNormalized("u and q must lie in the plain simplex")
    return validate_instance(u / delta, q / delta, delta, tol)


def unweight(p_tilde, delta):
    return np.asarray(delta, dtype=np.float64) * np.asarray(p_tilde, dtype=np.float64)


def sums_from_signs(inst, s):
    """Segment sums recomputed from a sign vector."""
    s = np.asarray(s)
    free = s == 0
    return SegmentSums(float(np.dot(inst.m, s)),
                       float(np.dot(inst.m[free], inst.u[free])),
                       float(np.dot(inst.m[free], inst.q[free])))


def direct_sums(inst, nu, mu, tol=1e-10):
    """Segment sums read off a point ``(nu, mu)`` by comparing against the caps."""
    return sums_from_signs(inst, signs_at(inst, nu, mu, tol))
