"""Squared-loss relaxation path.

Projects ``u`` onto ``{p : m.p = 1, |p_j - q_j| <= 1/nu}`` in the m-weighted
Euclidean norm for every ``nu``.  Optimal points have the form

    p_j = q_j + theta(nu (u_j - q_j) + mu) / nu

so the coordinate lines are ``mu - (q_j - u_j) nu = +-1`` and the same line
tracking engine as the entropy path applies with ``a = 1, b = q - u``.  On a
segment ``nu R + mu B + M = 0`` with ``R = sum_{I_0} m (u - q)`` and
``B = sum_{I_0} m``.  Unlike the entropy path ``mu`` may be negative.
"""
from typing import NamedTuple

import numpy as np

from .config import TOL
from .errors import InfeasiblePoint, InvalidNu, NoConvergence
from .path import _trace_lines


class SqSegmentSums(NamedTuple):
    R: float
    B: float
    M: float

    @classmethod
    def from_line(cls, sums):
        """Convert generic line sums ``(M, U, Q)`` with ``U = B, Q = -R``."""
        M, U, Q = sums
        return cls(-Q, U, M)

    def mu_at(self, nu):
        return -(nu * self.R + self.M) / self.B


def _lines(inst):
    return np.ones(inst.n), inst.q - inst.u


def sq_track_local(inst, tol=TOL):
    a, b = _lines(inst)
    idx = np.arange(inst.n, dtype=np.int64)
    # R = m.(u - q) vanishes in exact arithmetic; the rounded value keeps the
    # start line consistent with the coordinate lines when u and q nearly agree
    return _trace_lines(a, b, inst.m, inst.total_mass, float(inst.m @ b), idx,
                        objective="squared", tol=tol)


def sq_segment_sums(path):
    return [SqSegmentSums.from_line(seg) for seg in path.segments]


def _capped(inst, nu, mu):
    return np.clip(nu * (inst.u - inst.q) + mu, -1.0, 1.0)


def sq_primal_from(inst, nu, mu, tol=1e-9):
    nu = float(nu)
    if not nu > 0:
        raise InvalidNu(f"nu must be positive, got {nu!r}")
    th = _capped(inst, nu, float(mu))
    g = float(np.dot(inst.m, th))
    if abs(g) > tol * float(np.dot(inst.m, 1.0 + nu * np.abs(inst.u - inst.q) + abs(mu))):
        raise InfeasiblePoint(f"({nu!r}, {mu!r}) is not on the squared-loss path")
    return inst.q + th / nu


def sq_solve_mu_at(inst, nu, max_iter=TOL.bisect_iters):
    """Zero of ``sum_j m_j theta(nu (u_j - q_j) + mu)`` by bisection."""
    nu = float(nu)
    if not nu > 0 or not np.isfinite(nu):
        raise InvalidNu(f"nu must be positive and finite, got {nu!r}")
    hi = 1.0 + nu * float(np.max(np.abs(inst.u - inst.q)))
    lo = -hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = float(np.dot(inst.m, _capped(inst, nu, mid)))
        if g < 0:
            lo = mid
        elif g > 0:
            hi = mid
        else:
            return mid
    else:
        raise NoConvergence(f"bisection did not converge in {max_iter} iterations")
    return 0.5 * (lo + hi)


def sq_projection_oracle(inst, nu, max_iter=TOL.bisect_iters):
    """Direct projection: ``p = clip(u + t, q - 1/nu, q + 1/nu)`` with ``t``
    chosen by bisection so that ``m.p = 1``.  Independent of the path code."""
    nu = float(nu)
    if not nu > 0 or not np.isfinite(nu):
        raise InvalidNu(f"nu must be positive and finite, got {nu!r}")
    lower = inst.q - 1.0 / nu
    upper = inst.q + 1.0 / nu
    lo = float(np.min(lower - inst.u))
    hi = float(np.max(upper - inst.u))
    for _ in range(max_iter):
        t = 0.5 * (lo + hi)
        if t <= lo or t >= hi:
            break
        mass = float(np.dot(inst.m, np.clip(inst.u + t, lower, upper)))
        if mass < 1.0:
            lo = t
        elif mass > 1.0:
            hi = t
        else:
            break
    t = 0.5 * (lo + hi)
    return np.clip(inst.u + t, lower, upper)
