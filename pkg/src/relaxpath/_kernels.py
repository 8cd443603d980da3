"""Hot inner loops with two interchangeable backends.

Each kernel has a numba ``@njit`` version and a pure-numpy version with the
same signature and results.  The numba path is used when numba imports and the
environment variable ``RELAXPATH_NUMBA`` is not set to ``0``; call
:func:`set_backend` to switch at runtime (tests and the benchmark do).

Lines are written generically as ``a_k * mu - b_k * nu = sigma`` with the
current segment ``mu * U - nu * Q + M = 0``.  The entropy path uses
``a = u, b = q``; the squared-loss path uses ``a = 1, b = q - u``.
"""
import os

import numpy as np

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


# --------------------------------------------------------------------------
# numpy backend
# --------------------------------------------------------------------------

def scan_lines_numpy(a, b, s, idx, M, U, Q, nu_c, mu_c, tol_geom, tol_par):
    """Smallest admissible intersection of the current segment with a line.

    Returns ``(nu, k, sigma, direction)``; ``k == -1`` when there is none.
    ``sigma`` is the side of the hit line (+1 upper, -1 lower) and
    ``direction`` the resulting change of ``s[k]``.
    """
    if idx.size == 0:
        return np.inf, -1, 0, 0
    ak = a[idx]
    bk = b[idx]
    sk = s[idx].astype(np.int64)
    den = Q * ak - U * bk
    scale = np.abs(Q * ak) + np.abs(U * bk)
    parallel = np.abs(den) <= tol_par * scale
    direction = np.sign(den).astype(np.int64)

    ok = ~parallel & ((sk == 0) | (direction == -sk))
    sigma = np.where(sk != 0, sk, direction)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        nu = (M * ak + U * sigma) / den
    floor = nu_c - tol_geom * max(1.0, abs(nu_c))
    ok &= nu >= floor

    # a free coordinate whose line coincides with the segment is pinned at a bound
    theta = mu_c * ak - nu_c * bk
    pin_tol = tol_geom * np.maximum(1.0, np.abs(mu_c * ak) + np.abs(nu_c * bk))
    pinned = parallel & (sk == 0) & (np.abs(theta) >= 1.0 - pin_tol)
    nu = np.where(pinned, nu_c, nu)
    sig_theta = np.where(theta >= 0, 1, -1)
    sigma = np.where(pinned, sig_theta, sigma)
    direction = np.where(pinned, sig_theta, direction)
    ok |= pinned

    if not ok.any():
        return np.inf, -1, 0, 0
    cand = np.flatnonzero(ok)
    nus = nu[cand]
    best = nus.min()
    ties = cand[nus <= best + tol_geom * max(1.0, abs(best))]
    # smallest coordinate index among ties; idx may be any ordering
    pick = ties[np.argmin(idx[ties])]
    return float(nu[pick]), int(idx[pick]), int(sigma[pick]), int(direction[pick])


def capped_sum_numpy(a, b, m, nu, mu):
    return float(np.dot(m, np.clip(mu * a - nu * b, -1.0, 1.0)))


# --------------------------------------------------------------------------
# numba backend
# --------------------------------------------------------------------------

if HAVE_NUMBA:
    @numba.njit(cache=True)
    def scan_lines_numba(a, b, s, idx, M, U, Q, nu_c, mu_c, tol_geom, tol_par):
        best_nu = np.inf
        best_k = -1
        best_sigma = 0
        best_dir = 0
        floor = nu_c - tol_geom * max(1.0, abs(nu_c))
        for t in range(idx.shape[0]):
            k = idx[t]
            ak = a[k]
            bk = b[k]
            sk = s[k]
            den = Q * ak - U * bk
            scale = abs(Q * ak) + abs(U * bk)
            if abs(den) <= tol_par * scale:
                if sk != 0:
                    continue
                theta = mu_c * ak - nu_c * bk
                pin_tol = tol_geom * max(1.0, abs(mu_c * ak) + abs(nu_c * bk))
                if abs(theta) < 1.0 - pin_tol:
                    continue
                nu = nu_c
                sigma = 1 if theta >= 0 else -1
                direction = sigma
            else:
                direction = 1 if den > 0 else -1
                if sk != 0:
                    if direction != -sk:
                        continue
                    sigma = sk
                else:
                    sigma = direction
                nu = (M * ak + U * sigma) / den
                if nu < floor:
                    continue
            if best_k < 0:
                take = True
            else:
                tie = tol_geom * max(1.0, abs(min(nu, best_nu)))
                if nu < best_nu - tie:
                    take = True
                elif nu <= best_nu + tie:
                    take = k < best_k
                else:
                    take = False
            if take:
                best_nu = nu
                best_k = k
                best_sigma = sigma
                best_dir = direction
        return best_nu, best_k, best_sigma, best_dir

    @numba.njit(cache=True)
    def capped_sum_numba(a, b, m, nu, mu):
        total = 0.0
        for j in range(a.shape[0]):
            x = mu * a[j] - nu * b[j]
            if x > 1.0:
                x = 1.0
            elif x < -1.0:
                x = -1.0
            total += m[j] * x
        return total


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

_BACKENDS = {"numpy": (scan_lines_numpy, capped_sum_numpy)}
if HAVE_NUMBA:
    _BACKENDS["numba"] = (scan_lines_numba, capped_sum_numba)

_state = {"name": None, "scan_lines": None, "capped_sum": None}


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"``; returns the previous backend name."""
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}")
    prev = _state["name"]
    _state["name"] = name
    _state["scan_lines"], _state["capped_sum"] = _BACKENDS[name]
    return prev


def backend():
    return _state["name"]


def available_backends():
    return tuple(_BACKENDS)


def scan_lines(a, b, s, idx, M, U, Q, nu_c, mu_c, tol_geom, tol_par):
    return _state["scan_lines"](a, b, s, idx, M, U, Q, nu_c, mu_c, tol_geom, tol_par)


def capped_sum(a, b, m, nu, mu):
    return _state["capped_sum"](a, b, m, nu, mu)


def _default_backend():
    flag = os.environ.get("RELAXPATH_NUMBA", "1").strip().lower()
    if HAVE_NUMBA and flag not in ("0", "false", "no", "off"):
        return "numba"
    return "numpy"


set_backend(_default_backend())
