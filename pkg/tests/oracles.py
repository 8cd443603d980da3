"""Independent reference solvers and instance generators used by the tests.

Nothing here imports the path code: the oracles solve the optimisation
problems directly.
"""
import itertools
from fractions import Fraction

import numpy as np


# --------------------------------------------------------------------------
# instance families
# --------------------------------------------------------------------------

def dense_instance(rng, n, with_m=True):
    m = rng.uniform(0.5, 3.0, n) if with_m else np.ones(n)
    wu = rng.dirichlet(np.ones(n))
    wq = rng.dirichlet(np.ones(n))
    return wu / (m @ wu), wq / (m @ wq), m


def sparse_instance(rng, n, nnz=None, with_m=True):
    m = rng.uniform(0.5, 3.0, n) if with_m else np.ones(n)
    nnz = min(n, nnz or max(1, int(rng.integers(1, max(2, n // 4) + 1))))
    wu = rng.dirichlet(np.ones(n))
    wq = np.zeros(n)
    wq[rng.choice(n, nnz, replace=False)] = rng.dirichlet(np.ones(nnz))
    return wu / (m @ wu), wq / (m @ wq), m


def uniform_instance(rng, n, with_m=True):
    m = rng.uniform(0.5, 3.0, n) if with_m else np.ones(n)
    wq = rng.dirichlet(np.ones(n))
    return np.full(n, 1.0 / m.sum()), wq / (m @ wq), m


FAMILIES = {"dense": dense_instance, "sparse": sparse_instance, "uniform": uniform_instance}


# --------------------------------------------------------------------------
# entropy: direct solvers
# --------------------------------------------------------------------------

def entropy_oracle(u, q, m, nu, iters=400):
    """Minimiser of ``sum m p log(p/u)`` over the simplex and the box.

    Stationarity gives ``p_j = clip(u_j e^t, lo_j, hi_j)`` for one scalar
    ``t``; the mass is monotone in ``t`` so bisection finds it.
    """
    u, q, m = (np.asarray(x, dtype=np.float64) for x in (u, q, m))
    lo = np.maximum(q - 1.0 / nu, 0.0)
    hi = q + 1.0 / nu
    a, b = -800.0, 800.0
    for _ in range(iters):
        t = 0.5 * (a + b)
        mass = m @ np.clip(u * np.exp(t), lo, hi)
        if mass < 1.0:
            a = t
        else:
            b = t
    return np.clip(u * np.exp(0.5 * (a + b)), lo, hi)


def entropy_slsqp(u, q, m, nu):
    """General purpose NLP solve of the same problem (slow, small n only)."""
    from scipy.optimize import minimize

    u, q, m = (np.asarray(x, dtype=np.float64) for x in (u, q, m))
    lo = np.maximum(q - 1.0 / nu, 1e-300)
    hi = q + 1.0 / nu
    x0 = np.clip(u, lo, hi)
    x0 = x0 / (m @ x0)
    res = minimize(lambda p: float(m @ (p * np.log(np.maximum(p, 1e-300) / u))), x0,
                   jac=lambda p: m * (np.log(np.maximum(p, 1e-300) / u) + 1.0),
                   bounds=list(zip(lo, hi)), method="SLSQP",
                   constraints=[{"type": "eq", "fun": lambda p: m @ p - 1.0, "jac": lambda p: m}],
                   options={"ftol": 1e-15, "maxiter": 1000})
    return res.x


def sq_oracle(u, q, m, nu):
    """Exact weighted Euclidean projection: ``p = clip(u + t, box)`` where the
    piecewise linear mass ``m.p(t)`` is inverted between its sorted kinks."""
    u, q, m = (np.asarray(x, dtype=np.float64) for x in (u, q, m))
    lo, hi = q - 1.0 / nu, q + 1.0 / nu
    kinks = np.sort(np.concatenate([lo - u, hi - u]))
    mass = np.array([m @ np.clip(u + t, lo, hi) for t in kinks])
    i = int(np.searchsorted(mass, 1.0))
    i = min(max(i, 1), len(kinks) - 1)
    t0, t1 = kinks[i - 1], kinks[i]
    f0, f1 = mass[i - 1], mass[i]
    t = t0 if f1 == f0 else t0 + (1.0 - f0) * (t1 - t0) / (f1 - f0)
    return np.clip(u + t, lo, hi)


# --------------------------------------------------------------------------
# exact rational tracker
# --------------------------------------------------------------------------

def rational_track(u, q, m):
    """Breakpoints ``[(nu, mu, {signed line ids})]`` and ``(nu_inf, mu_inf)``
    in exact arithmetic.

    Follows the line ``mu U - nu Q + M = 0`` and, at each step, moves every
    coordinate whose capped value leaves the free range or becomes free again
    at the smallest such ``nu``.  Status changes are decided by evaluating the
    partition just after the candidate point, so no direction rules are used.
    """
    u = [Fraction(x) for x in u]
    q = [Fraction(x) for x in q]
    m = [Fraction(x) for x in m]
    n = len(u)
    s = [0] * n
    nu = Fraction(0)
    out = []

    def sums():
        M = sum(m[k] * s[k] for k in range(n))
        U = sum(m[k] * u[k] for k in range(n) if s[k] == 0)
        Q = sum(m[k] * q[k] for k in range(n) if s[k] == 0)
        return M, U, Q

    while True:
        M, U, Q = sums()
        if U == 0:
            return out, (out[-1][0], out[-1][1]) if out else (None, None)
        mu = (nu * Q - M) / U
        # nu values where some coordinate line is met
        cands = []
        for k in range(n):
            den = Q * u[k] - U * q[k]
            if den == 0:
                th = mu * u[k] - nu * q[k]
                if s[k] == 0 and abs(th) == 1:
                    cands.append(nu)
                continue
            for sig in (1, -1):
                x = (M * u[k] + U * sig) / den
                if x >= nu:
                    cands.append(x)
        # keep only candidates that actually change the partition
        changed = None
        for x in sorted(set(cands)):
            mu_x = (x * Q - M) / U
            new = _partition_after(u, q, m, x, mu_x, s)
            if new != s:
                changed = (x, mu_x, new)
                break
        if changed is None:
            return out, (None, None)
        x, mu_x, new = changed
        lines = set()
        for k in range(n):
            if new[k] != s[k]:
                side = new[k] if new[k] != 0 else s[k]
                lines.add(side * (k + 1))
        out.append((x, mu_x, lines))
        s = new
        nu = x


def _partition_after(u, q, m, nu, mu, s):
    """Partition valid just to the right of ``(nu, mu)``.

    Coordinates strictly inside keep the free status, strictly outside are
    bound.  Coordinates exactly on a cap are resolved by trying every
    assignment of the tied set and keeping the one whose segment stays
    consistent for a small step to the right.  A free coordinate that would
    sit exactly on its cap along the next segment is the same point as a
    bound one, so assignments with more bound coordinates are tried first.
    """
    n = len(u)
    th = [mu * u[k] - nu * q[k] for k in range(n)]
    base = [1 if t > 1 else -1 if t < -1 else 0 for t in th]
    tied = [k for k in range(n) if abs(th[k]) == 1]
    choices = sorted(itertools.product((0, 1), repeat=len(tied)), key=lambda c: -sum(c))
    for choice in choices:
        cand = list(base)
        for k, bound in zip(tied, choice):
            cand[k] = (1 if th[k] > 0 else -1) if bound else 0
        if _consistent_right(u, q, m, nu, cand):
            return cand
    raise AssertionError("no consistent partition")


def _consistent_right(u, q, m, nu, s):
    n = len(u)
    M = sum(m[k] * s[k] for k in range(n))
    U = sum(m[k] * u[k] for k in range(n) if s[k] == 0)
    Q = sum(m[k] * q[k] for k in range(n) if s[k] == 0)
    if U == 0:
        # everything bound: the capped sum vanishes only when M == 0
        return M == 0
    # check at nu + eps symbolically: value and first derivative of theta
    mu = (nu * Q - M) / U
    dmu = Q / U
    for k in range(n):
        th = mu * u[k] - nu * q[k]
        dth = dmu * u[k] - q[k]
        if s[k] == 0:
            if abs(th) > 1:
                return False
            if th == 1 and dth > 0 or th == -1 and dth < 0:
                return False
        else:
            if s[k] * th < 1:
                return False
            if s[k] * th == 1 and s[k] * dth < 0:
                return False
    return True

