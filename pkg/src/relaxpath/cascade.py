"""Cascaded relaxed-maxent solves.

Each stage uses the previous stage's solution as its prior, so the final
distribution is ``u_j exp(sum_i alpha^(i)_j) / prod_i Z^(i)``.  Only the sparse
tilts and the normalisers need to be stored.
"""
from dataclasses import dataclass

import numpy as np

from .core import dual_from, primal_from, solve_mu_at, validate_instance
from .errors import InconsistentChain


@dataclass(frozen=True)
class CascadeStage:
    indices: tuple
    values: tuple
    Z: float
    nu: float

    @property
    def support(self):
        return len(self.indices)

    def dense_alpha(self, n):
        alpha = np.zeros(n)
        alpha[list(self.indices)] = self.values
        return alpha

    def to_dict(self):
        return {"alpha": {str(k): v for k, v in zip(self.indices, self.values)},
                "Z": self.Z, "nu": self.nu}

    @classmethod
    def from_dict(cls, d):
        items = sorted((int(k), float(v)) for k, v in d["alpha"].items())
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items),
                   float(d["Z"]), float(d["nu"]))


def cascade_step(prior, q, m, nu, tol=1e-10):
    """Solve the stage with prior ``prior`` at ``nu``; returns ``(p, stage)``."""
    inst = validate_instance(prior, q, m)
    mu, _ = solve_mu_at(inst, nu, tol)
    p = primal_from(inst, nu, mu)
    alpha, Z, _ = dual_from(inst, nu, mu)
    nz = np.flatnonzero(alpha)
    stage = CascadeStage(tuple(int(k) for k in nz), tuple(float(alpha[k]) for k in nz),
                         float(Z), float(nu))
    return p, stage


def cascade_eval(u, stages, m=None, tol=1e-9):
    """Rebuild the last stage's distribution from ``u`` and the stored stages."""
    u = np.asarray(u, dtype=np.float64)
    m = np.ones_like(u) if m is None else np.asarray(m, dtype=np.float64)
    total = np.zeros_like(u)
    log_z = 0.0
    for st in stages:
        if st.indices and max(st.indices) >= u.shape[0]:
            raise InconsistentChain("stage refers to a coordinate outside the prior")
        total[list(st.indices)] += st.values
        log_z += np.log(st.Z)
    p = u * np.exp(total - log_z)
    if abs(float(np.dot(m, p)) - 1.0) > tol:
        raise InconsistentChain(f"reconstruction has mass {float(np.dot(m, p))!r}")
    return p


def run_cascade(u, qs, m, nus):
    """Sequential chain; returns the list of primals and the stage records."""
    prior = np.asarray(u, dtype=np.float64)
    ps, stages = [], []
    for q, nu in zip(qs, nus):
        prior, st = cascade_step(prior, q, m, nu)
        ps.append(prior)
        stages.append(st)
    return ps, stages
