"""Model selection along a relaxation path with held-out counts.

Work in ``lambda = 1 / nu``.  On a path segment with sums ``(M, U, Q)``

    p_j = q_j + s_j lambda              (bound coordinates)
    p_j = u_j (Q - M lambda) / U        (free coordinates)

so the validation loss ``L(lambda) = -sum_j r_j log p_j`` is convex on each
segment and its minimiser is found by bisection on ``L'``.
"""
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .config import TOL
from .errors import InvalidInstance, OpenInfimum, ZeroProbability


@dataclass(frozen=True)
class ValidationCounts:
    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        if r.ndim != 1 or np.any(r < 0) or not np.all(np.isfinite(r)) or not r.sum() > 0:
            raise InvalidInstance("validation counts must be finite, nonnegative, not all zero")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)


class ModelOption(NamedTuple):
    support: int
    nu_star: float
    loss_star: float
    flagged: bool = False


class Segment(NamedTuple):
    """Path segment in lambda coordinates: ``lo < lambda <= hi``."""
    index: int
    lo: float
    hi: float
    s: np.ndarray
    M: float
    U: float
    Q: float


def _counts(r, n):
    r = ValidationCounts(r).r if not isinstance(r, ValidationCounts) else r.r
    if r.shape[0] != n:
        raise InvalidInstance(f"expected {n} counts, got {r.shape[0]}")
    return r


def path_segments(path):
    """All segments of ``path`` with their lambda ranges, sign vectors and sums."""
    s = np.zeros(path.n, dtype=np.int8)
    nus = [0.0] + [bp.nu for bp in path.breakpoints] + [math.inf]
    out = []
    for i, seg in enumerate(path.segments):
        if i:
            s = s.copy()
            for t in path.breakpoints[i - 1].transitions:
                s[t.coord] += t.delta
        lo = 1.0 / nus[i + 1] if nus[i + 1] > 0 else math.inf
        hi = 1.0 / nus[i] if nus[i] > 0 else math.inf
        out.append(Segment(i, lo, hi, s, seg.M, seg.U, seg.Q))
    return out


def _segment_p(inst, seg, lam):
    lam = np.asarray(lam, dtype=np.float64)
    p = inst.q + np.multiply.outer(lam, seg.s.astype(np.float64))
    if seg.U > 0:
        free = seg.s == 0
        scale = (seg.Q - seg.M * lam) / seg.U
        p[..., free] = np.multiply.outer(scale, inst.u[free])
    return p


def _loss_from_p(p, r):
    pos = r > 0
    pr = p[..., pos]
    if np.any(pr <= 0):
        raise ZeroProbability("a coordinate with positive count has zero probability")
    return -np.log(pr) @ r[pos]


def segment_loss(inst, seg, r, lam):
    return _loss_from_p(_segment_p(inst, seg, lam), _counts(r, inst.n))


def validation_loss(inst, path, r, lam):
    """Negative log-likelihood of counts ``r`` under ``p(1 / lam)``.

    ``lam`` may be a scalar or an array.
    """
    r = _counts(r, inst.n)
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam <= 0):
        raise ValueError("lambda must be positive")
    flat = np.atleast_1d(lam).ravel()
    idx = np.searchsorted(path.nus, 1.0 / flat, side="right")
    out = np.empty_like(flat)
    for seg in path_segments(path):
        sel = idx == seg.index
        if np.any(sel):
            out[sel] = segment_loss(inst, seg, r, flat[sel])
    return float(out[0]) if lam.ndim == 0 else out.reshape(lam.shape)


def loss_derivative(inst, seg, r, lam):
    """``dL/dlambda`` on one segment."""
    r = _counts(r, inst.n)
    up = seg.s > 0
    dn = seg.s < 0
    free = seg.s == 0
    d = -np.sum(r[up] / (inst.q[up] + lam)) + np.sum(r[dn] / (inst.q[dn] - lam))
    rf = float(np.sum(r[free]))
    if seg.U > 0 and rf > 0:
        den = seg.Q - seg.M * lam
        if not den > 0:
            raise ZeroProbability("free coordinates have zero probability on this segment")
        d += seg.M / den * rf
    return float(d)


class SegmentResult(NamedTuple):
    lam: float
    loss: float
    flagged: bool


def segment_minimize(inst, seg, r, lambda_min=TOL.lambda_min, tol=TOL):
    """Minimise the validation loss over ``seg`` intersected with ``(lambda_min, 1]``.

    Returns ``None`` for an empty intersection.  When the derivative is still
    positive at ``lambda_min`` on the last segment the infimum is only
    approached as ``lambda -> 0``; the result is clamped and flagged.
    """
    r = _counts(r, inst.n)
    lo = max(seg.lo, lambda_min)
    hi = min(seg.hi, 1.0)
    dn = (seg.s < 0) & (r > 0)
    if np.any(dn):
        # keep q_j - lambda > 0 on the lower-bound coordinates
        hi = min(hi, float(np.nextafter(np.min(inst.q[dn]), 0.0)))
    if not hi > lo:
        return None
    flagged = False
    if loss_derivative(inst, seg, r, lo) >= 0:
        lam = lo
        flagged = lo == lambda_min and seg.lo < lambda_min
        if flagged:
            warnings.warn(f"loss keeps decreasing as lambda -> 0 on segment {seg.index}; "
                          f"clamped at {lambda_min!r}", OpenInfimum, stacklevel=2)
    elif loss_derivative(inst, seg, r, hi) <= 0:
        lam = hi
    else:
        a, b = lo, hi
        for _ in range(tol.bisect_iters):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if loss_derivative(inst, seg, r, mid) > 0:
                b = mid
            else:
                a = mid
        lam = 0.5 * (a + b)
    return SegmentResult(lam, float(segment_loss(inst, seg, r, lam)), flagged)


def select_models(inst, path, r, lambda_min=TOL.lambda_min, tol=TOL):
    """Culled table of model options, one row per useful support size.

    Row 0 is the prior itself at ``nu* = min(1, nu_1)``.  Every segment is
    minimised and the best option per support size is kept.  Rows survive
    only while the loss strictly decreases (and ``nu*`` strictly increases).
    """
    r = _counts(r, inst.n)
    u_loss = float(_loss_from_p(inst.u, r))
    nu1 = path.breakpoints[0].nu if path.kappa else math.inf
    best = {0: ModelOption(0, min(1.0, nu1), u_loss, nu1 < 1.0)}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OpenInfimum)
        for seg in path_segments(path)[1:]:
            res = segment_minimize(inst, seg, r, lambda_min, tol)
            if res is None:
                continue
            support = int(np.count_nonzero(seg.s))
            opt = ModelOption(support, 1.0 / res.lam, res.loss, res.flagged)
            cur = best.get(support)
            if cur is None or opt.loss_star < cur.loss_star:
                best[support] = opt
    rows = []
    for k in sorted(best):
        opt = best[k]
        if not rows or (opt.loss_star < rows[-1].loss_star and opt.nu_star > rows[-1].nu_star):
            rows.append(opt)
    if any(row.flagged and row.support for row in rows):
        warnings.warn("the best model sits at lambda_min", OpenInfimum, stacklevel=2)
    return rows
