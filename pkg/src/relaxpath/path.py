"""Relaxation paths and the local trackers.

A path is the piecewise linear map ``nu -> mu(nu)``.  Between breakpoints the
partition of coordinates into lower bound / free / upper bound is fixed and
``mu`` lies on the line ``mu U - nu Q + M = 0``.  A breakpoint occurs where this
line meets one of the coordinate lines ``u_k mu - q_k nu = +-1``.

Coordinates are 0-based in code.  Transition records name the line that was
hit with the signed 1-based id ``+-(k + 1)``, matching the usual ``l_{+-j}``.
"""
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .config import CANCEL, TOL, geom_tol
from .core import SegmentSums, sums_from_signs
from .errors import (
    DegenerateInstance,
    EmptyInterior,
    IllegalTransition,
    IterationCapExceeded,
    NonUniformPrior,
)

TO_PLUS = "to_plus"
TO_MINUS = "to_minus"
TO_ZERO_FROM_PLUS = "to_zero_from_plus"
TO_ZERO_FROM_MINUS = "to_zero_from_minus"

# (old sign, change) -> direction name
_DIRECTION = {
    (0, 1): TO_PLUS,
    (0, -1): TO_MINUS,
    (1, -1): TO_ZERO_FROM_PLUS,
    (-1, 1): TO_ZERO_FROM_MINUS,
}
_DELTA = {TO_PLUS: 1, TO_MINUS: -1, TO_ZERO_FROM_PLUS: -1, TO_ZERO_FROM_MINUS: 1}
_OLD_SIGN = {TO_PLUS: 0, TO_MINUS: 0, TO_ZERO_FROM_PLUS: 1, TO_ZERO_FROM_MINUS: -1}


class Transition(NamedTuple):
    line: int          # +-(k + 1)
    direction: str

    @property
    def coord(self):
        return abs(self.line) - 1

    @property
    def delta(self):
        return _DELTA[self.direction]


class Breakpoint(NamedTuple):
    nu: float
    mu: float
    transitions: tuple


@dataclass(frozen=True, eq=False)
class RelaxationPath:
    """Breakpoints plus the segment sums in force after each of them.

    ``segments[0]`` is the initial segment, ``segments[i]`` holds on
    ``[nu_i, nu_{i+1})``.  When the free set empties at the last breakpoint,
    ``nu_inf`` is that breakpoint and ``segments[-1]`` has ``U == 0``; for
    larger ``nu`` the point stays on the last proper line.

    For squared-loss paths the sums are stored in the same line form, i.e.
    ``U`` holds ``B`` and ``Q`` holds ``-R``.
    """

    n: int
    breakpoints: tuple
    segments: tuple
    nu_inf: float
    mu_inf: float
    objective: str = "entropy"
    _nus: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nus = np.array([b.nu for b in self.breakpoints], dtype=np.float64)
        object.__setattr__(self, "_nus", nus)

    @property
    def kappa(self):
        return len(self.breakpoints)

    @property
    def nus(self):
        return self._nus

    @property
    def mus(self):
        return np.array([b.mu for b in self.breakpoints], dtype=np.float64)

    @property
    def terminal(self):
        return math.isfinite(self.nu_inf)

    def slopes(self):
        """Slope of every proper segment (segments with a free coordinate)."""
        return [seg.Q / seg.U for seg in self.segments if seg.U > 0]

    def signs_after(self, i):
        """Sign vector after the first ``i`` breakpoints (replays transitions)."""
        s = np.zeros(self.n, dtype=np.int8)
        for bp in self.breakpoints[:i]:
            for t in bp.transitions:
                s[t.coord] += t.delta
        return s

    def segment_index(self, nu):
        return bisect_right(self._nus, nu)

    def line_for(self, i):
        """Sums of the line carrying ``mu`` on segment ``i``."""
        if self.segments[i].U > 0:
            return self.segments[i]
        return self.segments[i - 1]

    def mu(self, nu):
        """Vectorised ``mu(nu)``."""
        nu = np.asarray(nu, dtype=np.float64)
        idx = np.searchsorted(self._nus, nu, side="right")
        M = np.array([self.line_for(i).M for i in range(self.kappa + 1)])
        U = np.array([self.line_for(i).U for i in range(self.kappa + 1)])
        Q = np.array([self.line_for(i).Q for i in range(self.kappa + 1)])
        out = (nu * Q[idx] - M[idx]) / U[idx]
        return out if out.ndim else float(out)

    def support_sizes(self):
        """Number of bound coordinates on each segment."""
        s = np.zeros(self.n, dtype=np.int8)
        sizes = [0]
        for bp in self.breakpoints:
            for t in bp.transitions:
                s[t.coord] += t.delta
            sizes.append(int(np.count_nonzero(s)))
        return sizes


def path_eval(path, nu):
    """``(mu, s, sums)`` at ``nu >= 0``.

    ``mu`` is found by binary search over the breakpoints; the sign vector is
    rebuilt by replaying transitions.  Past ``nu_inf`` the partition is frozen
    and ``mu`` continues on the terminal line.
    """
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    i = path.segment_index(nu)
    line = path.line_for(i)
    return line.mu_at(nu), path.signs_after(i), path.segments[i]


def first_breakpoint_check(inst):
    """``1 / max_j |u_j - q_j|``, where the first segment ``mu = nu`` ends."""
    gap = float(np.max(np.abs(inst.u - inst.q)))
    if gap == 0.0:
        raise DegenerateInstance("u == q has no breakpoints")
    return 1.0 / gap


# --------------------------------------------------------------------------
# single-step operations
# --------------------------------------------------------------------------

def next_intersection(sums, s, inst, nu_current, tol=TOL):
    """Next breakpoint from the current segment, or ``None``.

    Returns ``(nu, line, direction)``.  Ties are broken towards the smaller
    coordinate index.
    """
    M, U, Q = sums
    if not U > 0:
        raise EmptyInterior("no free coordinates; the path has ended")
    s = np.asarray(s, dtype=np.int8)
    idx = np.arange(inst.n, dtype=np.int64)
    mu_c = (nu_current * Q - M) / U
    nu, k, sigma, d = _kernels.scan_lines(inst.u, inst.q, s, idx, M, U, Q,
                                          float(nu_current), mu_c, tol.geom, tol.parallel)
    if k < 0:
        return None
    return max(nu, nu_current), sigma * (k + 1), _DIRECTION[(int(s[k]), d)]


def apply_transition(sums, s, inst, line, direction):
    """Incremental update of the sums and sign vector for one transition."""
    k = abs(line) - 1
    s = np.array(s, dtype=np.int8)
    if direction not in _DELTA or not 0 <= k < inst.n:
        raise IllegalTransition(f"bad transition {line!r}, {direction!r}")
    if s[k] != _OLD_SIGN[direction]:
        raise IllegalTransition(
            f"coordinate {k} has sign {int(s[k])}, cannot apply {direction}")
    sigma = 1 if line > 0 else -1
    if direction in (TO_PLUS, TO_ZERO_FROM_PLUS) and sigma < 0 or \
            direction in (TO_MINUS, TO_ZERO_FROM_MINUS) and sigma > 0:
        raise IllegalTransition(f"line {line} does not bound {direction}")
    d = _DELTA[direction]
    M, U, Q = sums
    mk = inst.m[k]
    M += d * mk
    # leaving the free set removes its mass, entering adds it
    leave = -1.0 if s[k] == 0 else 1.0
    U += leave * mk * inst.u[k]
    Q += leave * mk * inst.q[k]
    s[k] += d
    return SegmentSums(M, U, Q), s


# --------------------------------------------------------------------------
# path assembly
# --------------------------------------------------------------------------

class _PathBuilder:
    """Collects transitions; those at (numerically) equal nu share a breakpoint."""

    def __init__(self, n, sums0, objective, tol):
        self.n = n
        self.objective = objective
        self.tol = tol
        self.nus = []
        self.mus = []
        self.transitions = []
        self.segments = [SegmentSums(*(float(x) for x in sums0))]

    def add(self, nu, mu, line, direction, sums_after):
        nu, mu = float(nu), float(mu)
        sums_after = tuple(float(x) for x in sums_after)
        if self.nus and nu <= self.nus[-1] + geom_tol(self.nus[-1], self.tol):
            self.transitions[-1].append(Transition(line, direction))
            self.segments[-1] = SegmentSums(*sums_after)
            return self.nus[-1]
        self.nus.append(nu)
        self.mus.append(mu)
        self.transitions.append([Transition(line, direction)])
        self.segments.append(SegmentSums(*sums_after))
        return nu

    def finish(self, emptied):
        # canonical order inside a breakpoint: by coordinate (sort is stable)
        bps = tuple(Breakpoint(nu, mu, tuple(sorted(tr, key=lambda t: abs(t.line))))
                    for nu, mu, tr in zip(self.nus, self.mus, self.transitions))
        if emptied and bps:
            nu_inf, mu_inf = bps[-1].nu, bps[-1].mu
        else:
            nu_inf = mu_inf = math.inf
        return RelaxationPath(self.n, bps, tuple(self.segments), nu_inf, mu_inf,
                              self.objective)


def _trace_lines(a, b, m, U0, Q0, scan_idx, horizontals=None, objective="entropy",
                 tol=TOL):
    """Follow the segment line from ``(0, 0)`` through all its breakpoints.

    ``scan_idx`` are the coordinates examined on every step.  ``horizontals``
    optionally lists coordinates with ``b == 0`` in the order they are met
    (decreasing ``a``); only the next one of them is examined per step.
    """
    n = a.shape[0]
    s = np.zeros(n, dtype=np.int8)
    M, U, Q = 0.0, float(U0), float(Q0)
    n_free = n
    n_free_sloped = int(np.count_nonzero(b))
    nu = 0.0
    builder = _PathBuilder(n, (M, U, Q), objective, tol)
    hp = 0
    n_h = 0 if horizontals is None else len(horizontals)
    cap = 4 * n * n + 16
    refresh_every = tol.refresh_every * n
    steps = 0
    since_refresh = 0
    scan = _kernels.scan_lines

    while n_free > 0:
        mu = (nu * Q - M) / U
        c_nu, k, sigma, d = scan(a, b, s, scan_idx, M, U, Q, nu, mu, tol.geom, tol.parallel)
        if hp < n_h:
            h = horizontals[hp]
            h_nu = _horizontal_candidate(a[h], M, U, Q, nu, mu, tol)
            if h_nu is not None:
                tie = geom_tol(min(h_nu, c_nu), tol)
                if k < 0 or h_nu < c_nu - tie or (h_nu <= c_nu + tie and h < k):
                    c_nu, k, sigma, d = h_nu, h, 1, 1
                    hp += 1
        if k < 0:
            break
        steps += 1
        if steps > cap:
            raise IterationCapExceeded(f"more than {cap} transitions for n={n}")

        c_nu = max(c_nu, nu)
        mu_c = (c_nu * Q - M) / U
        old = int(s[k])
        mk = m[k]
        M += d * mk
        if old == 0:
            u_before = U
            U -= mk * a[k]
            Q -= mk * b[k]
            n_free -= 1
            if b[k] != 0:
                n_free_sloped -= 1
            if n_free > 0 and U <= CANCEL * u_before:
                since_refresh = refresh_every
        else:
            U += mk * a[k]
            Q += mk * b[k]
            n_free += 1
            if b[k] != 0:
                n_free_sloped += 1
        s[k] = old + d
        if n_free == 0:
            U = Q = 0.0
        elif n_free_sloped == 0:
            Q = 0.0
        since_refresh += 1
        if since_refresh >= refresh_every and n_free > 0:
            free = s == 0
            M = float(np.dot(m, s))
            U = float(np.dot(m[free], a[free]))
            Q = float(np.dot(m[free], b[free])) if n_free_sloped else 0.0
            since_refresh = 0
        nu = builder.add(c_nu, mu_c, sigma * (k + 1), _DIRECTION[(old, d)], (M, U, Q))

    return builder.finish(emptied=n_free == 0)


def _horizontal_candidate(ak, M, U, Q, nu, mu, tol):
    # line a_k mu = 1 with b_k = 0; the segment can only climb towards it
    if Q > 0:
        den = Q * ak
        if not den > 0:
            return None
        # an overflow to inf just means the line is out of reach
        with np.errstate(over="ignore"):
            return max((M * ak + U) / den, nu)
    if mu * ak >= 1.0 - geom_tol(mu * ak, tol):
        return nu
    return None


# --------------------------------------------------------------------------
# trackers
# --------------------------------------------------------------------------

def track_local(inst, tol=TOL):
    """Local tracking: every step scans all ``2n`` coordinate lines."""
    idx = np.arange(inst.n, dtype=np.int64)
    return _trace_lines(inst.u, inst.q, inst.m, 1.0, 1.0, idx, tol=tol)


def track_sparse(inst, tol=TOL):
    """Local tracking for sparse ``q``.

    Coordinates with ``q_k = 0`` have horizontal lines ``u_k mu = 1`` that are
    met once each, in decreasing order of ``u_k``.  They are sorted up front
    and only the next one is examined per step, so a step costs O(s) for
    ``s`` nonzeros instead of O(n).
    """
    zero = inst.q == 0
    idx = np.flatnonzero(~zero).astype(np.int64)
    zidx = np.flatnonzero(zero)
    horizontals = zidx[np.lexsort((zidx, -inst.u[zidx]))].tolist()
    return _trace_lines(inst.u, inst.q, inst.m, 1.0, 1.0, idx, horizontals, tol=tol)


def is_uniform_prior(inst, tol=TOL):
    u0 = 1.0 / inst.total_mass
    return bool(np.all(np.abs(inst.u - u0) <= max(tol.geom, tol.simplex) * u0))


def track_uniform(inst, tol=TOL):
    """Tracker for a uniform prior ``u_j = 1 / sum(m)``.

    Coordinates leave the free set in order of how far ``q_j`` is from the
    prior value: the largest ``q`` go to the lower bound and the smallest to
    the upper bound.  No coordinate ever returns, so each step compares just
    two candidates.
    """
    if not is_uniform_prior(inst, tol):
        raise NonUniformPrior("track_uniform needs u_j = 1/sum(m) for all j")
    n = inst.n
    q, m = inst.q, inst.m
    u0 = 1.0 / inst.total_mass
    order = np.lexsort((np.arange(n), -q))   # decreasing q, ties by index
    jm, jp = 0, n - 1
    M, U, Q = 0.0, 1.0, 1.0
    nu = 0.0
    builder = _PathBuilder(n, (M, U, Q), "entropy", tol)
    emptied = False

    while jm <= jp:
        km, kp = int(order[jm]), int(order[jp])
        den_m = Q * u0 - U * q[km]
        den_p = Q * u0 - U * q[kp]
        ok_m = den_m < -tol.parallel * (abs(Q * u0) + abs(U * q[km]))
        ok_p = den_p > tol.parallel * (abs(Q * u0) + abs(U * q[kp]))
        mu = (nu * Q - M) / U
        if not (ok_m or ok_p):
            # every remaining line is parallel to the segment; pinned if on a bound
            th = mu * u0 - nu * q[km]
            if abs(th) >= 1.0 - geom_tol(abs(mu * u0) + abs(nu * q[km]), tol):
                sigma = 1 if th > 0 else -1
                for k in sorted(int(x) for x in order[jm:jp + 1]):
                    M += sigma * m[k]
                    U -= m[k] * u0
                    Q -= m[k] * q[k]
                    nu = builder.add(nu, mu, sigma * (k + 1),
                                     TO_PLUS if sigma > 0 else TO_MINUS, (M, 0.0, 0.0))
                U = Q = 0.0
                emptied = True
            break
        nu_m = (M * u0 - U) / den_m if ok_m else math.inf
        nu_p = (M * u0 + U) / den_p if ok_p else math.inf
        tie = geom_tol(min(nu_m, nu_p), tol)
        if nu_m < nu_p - tie or (nu_m <= nu_p + tie and km < kp):
            c_nu, k, sigma = max(nu_m, nu), km, -1
            jm += 1
        else:
            c_nu, k, sigma = max(nu_p, nu), kp, 1
            jp -= 1
        mu_c = (c_nu * Q - M) / U
        M += sigma * m[k]
        U -= m[k] * u0
        Q -= m[k] * q[k]
        if jm > jp:
            U = Q = 0.0
            emptied = True
        nu = builder.add(c_nu, mu_c, sigma * (k + 1),
                         TO_PLUS if sigma > 0 else TO_MINUS, (M, U, Q))
    return builder.finish(emptied)


def check_sums(path, inst):
    """Largest gap between stored segment sums and sums rebuilt from signs."""
    worst = 0.0
    s = np.zeros(inst.n, dtype=np.int8)
    for i, seg in enumerate(path.segments):
        if i:
            for t in path.breakpoints[i - 1].transitions:
                s[t.coord] += t.delta
        ref = sums_from_signs(inst, s)
        worst = max(worst, abs(seg.M - ref.M), abs(seg.U - ref.U), abs(seg.Q - ref.Q))
    return worst
