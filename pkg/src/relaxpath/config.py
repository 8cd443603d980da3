"""Numerical tolerances, kept in one place."""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    simplex: float = 1e-9       # relative, on m.u and m.q
    geom: float = 1e-12         # scaled by max(1, |nu|)
    feas: float = 1e-9
    parallel: float = 1e-12     # relative size of an intersection denominator
    bisect_iters: int = 200
    refresh_every: int = 10     # recompute sums from scratch every refresh_every * n transitions
    lambda_min: float = 1e-9


TOL = Tolerances()

# an update that shrinks U below this fraction of its old value has lost its
# significant digits to cancellation; the sums are then recomputed
CANCEL = 1e-6


def geom_tol(nu, tol=TOL):
    return tol.geom * max(1.0, abs(nu))
