"""Array-only event loop of the global sweep.

The functions are written once and built twice by :func:`build`: as plain
Python (the numpy backend) and under ``numba.njit``.  All state lives in
arrays so a sweep can be paused after any number of events and resumed, which
is how logs grow and how tests inspect intermediate queues.

Lines have ids ``-n..n``; id ``x`` is stored at ``x + n`` in ``pos``.  The
queue is an indexed binary heap over slots ``1..2n`` keyed by ``(nu, slot)``
with ``where[slot]`` pointing back into the heap (``-1`` when absent).
"""
import math

import numpy as np

from .config import CANCEL

# float state
F_M, F_U, F_Q, F_NU = 0, 1, 2, 3
# integer state
(I_NFREE, I_NFREE_B, I_DONE, I_HSIZE, I_EVENTS, I_NTR, I_NPOP, I_SINCE,
 I_PUSHES, I_POPS, I_REMOVES, I_SWAPS, I_L0) = range(13)
N_INTS = 13

# status codes returned by run()
DONE, PAUSED, TR_FULL, POP_FULL, CAP_EXCEEDED, ILLEGAL = range(6)


def build(jit):
    @jit
    def less(hkey, hslot, i, j):
        return hkey[i] < hkey[j] or (hkey[i] == hkey[j] and hslot[i] < hslot[j])

    @jit
    def hswap(hkey, hslot, where, i, j):
        hkey[i], hkey[j] = hkey[j], hkey[i]
        hslot[i], hslot[j] = hslot[j], hslot[i]
        where[hslot[i]] = i
        where[hslot[j]] = j

    @jit
    def sift_up(hkey, hslot, where, i):
        while i > 0:
            p = (i - 1) // 2
            if less(hkey, hslot, i, p):
                hswap(hkey, hslot, where, i, p)
                i = p
            else:
                break

    @jit
    def sift_down(hkey, hslot, where, size, i):
        while True:
            c = 2 * i + 1
            if c >= size:
                break
            if c + 1 < size and less(hkey, hslot, c + 1, c):
                c += 1
            if less(hkey, hslot, c, i):
                hswap(hkey, hslot, where, i, c)
                i = c
            else:
                break

    @jit
    def heap_remove(hkey, hslot, where, ints, slot):
        i = where[slot]
        if i < 0:
            return
        last = ints[I_HSIZE] - 1
        where[slot] = -1
        if i != last:
            hkey[i] = hkey[last]
            hslot[i] = hslot[last]
            where[hslot[i]] = i
            sift_down(hkey, hslot, where, last, i)
            sift_up(hkey, hslot, where, i)
        ints[I_HSIZE] = last
        ints[I_REMOVES] += 1

    @jit
    def heap_push(hkey, hslot, where, ints, nu, slot):
        i = ints[I_HSIZE]
        hkey[i] = nu
        hslot[i] = slot
        where[slot] = i
        ints[I_HSIZE] = i + 1
        sift_up(hkey, hslot, where, i)
        ints[I_PUSHES] += 1

    @jit
    def heap_pop(hkey, hslot, where, ints):
        nu = hkey[0]
        slot = hslot[0]
        heap_remove(hkey, hslot, where, ints, slot)
        ints[I_REMOVES] -= 1
        ints[I_POPS] += 1
        return nu, slot

    @jit
    def line(x, a, b, f, n):
        if x == 0:
            return f[F_U], f[F_Q], -f[F_M]
        k = abs(x) - 1
        return a[k], b[k], (1.0 if x > 0 else -1.0)

    @jit
    def pair_event(lo, hi, a, b, f, n, tol_geom, tol_par):
        A1, B1, C1 = line(lo, a, b, f, n)
        A2, B2, C2 = line(hi, a, b, f, n)
        den = B1 * A2 - B2 * A1
        if not den > tol_par * (abs(B1 * A2) + abs(B2 * A1)):
            return math.nan
        nu = (C2 * A1 - C1 * A2) / den
        nu_c = f[F_NU]
        if nu < nu_c - tol_geom * max(1.0, abs(nu_c)):
            return math.nan
        return max(nu, nu_c)

    @jit
    def refresh_slot(slot, chi, a, b, f, n, hkey, hslot, where, ints, tol_geom, tol_par):
        if slot < 1 or slot > 2 * n:
            return
        heap_remove(hkey, hslot, where, ints, slot)
        nu = pair_event(chi[slot - 1], chi[slot], a, b, f, n, tol_geom, tol_par)
        if not math.isnan(nu):
            heap_push(hkey, hslot, where, ints, nu, slot)

    @jit
    def swap(slot, chi, pos, n, ints):
        lo = chi[slot - 1]
        hi = chi[slot]
        chi[slot - 1] = hi
        chi[slot] = lo
        pos[hi + n] = slot - 1
        pos[lo + n] = slot
        ints[I_SWAPS] += 1

    @jit
    def refresh_sums(a, b, m, s, f):
        M = 0.0
        U = 0.0
        Q = 0.0
        for k in range(s.shape[0]):
            if s[k] == 0:
                U += m[k] * a[k]
                Q += m[k] * b[k]
            else:
                M += s[k] * m[k]
        f[F_M] = M
        f[F_U] = U
        f[F_Q] = Q

    @jit
    def transition(k, d, a, b, m, s, f, ints):
        old = s[k]
        mk = m[k]
        f[F_M] += d * mk
        if old == 0:
            u_before = f[F_U]
            f[F_U] -= mk * a[k]
            f[F_Q] -= mk * b[k]
            ints[I_NFREE] -= 1
            if b[k] != 0.0:
                ints[I_NFREE_B] -= 1
            if ints[I_NFREE] > 0 and f[F_U] <= CANCEL * u_before:
                s[k] = old + d
                refresh_sums(a, b, m, s, f)
        else:
            f[F_U] += mk * a[k]
            f[F_Q] += mk * b[k]
            ints[I_NFREE] += 1
            if b[k] != 0.0:
                ints[I_NFREE_B] += 1
        s[k] = old + d
        if ints[I_NFREE] == 0:
            f[F_U] = 0.0
            f[F_Q] = 0.0
        elif ints[I_NFREE_B] == 0:
            f[F_Q] = 0.0
        return old

    @jit
    def log_tr(ints, tr_f, tr_i, nu, mu, x, old, d, f):
        t = ints[I_NTR]
        tr_f[t, 0] = nu
        tr_f[t, 1] = mu
        tr_f[t, 2] = f[F_M]
        tr_f[t, 3] = f[F_U]
        tr_f[t, 4] = f[F_Q]
        tr_i[t, 0] = x
        tr_i[t, 1] = old
        tr_i[t, 2] = d
        ints[I_NTR] = t + 1

    @jit
    def collapse(mu, a, b, m, s, chi, pos, f, ints, n, hkey, hslot, where,
                 tr_f, tr_i, tol_geom, tol_par):
        while ints[I_NFREE] > 0:
            p0 = pos[n]
            hit = 0
            for step in (1, -1):
                i = p0 + step
                while 0 <= i < 2 * n + 1:
                    x = chi[i]
                    A, B, C = line(x, a, b, f, n)
                    if abs((C + B * f[F_NU]) / A - mu) > tol_geom * max(1.0, abs(mu) + 1.0):
                        break
                    k = abs(x) - 1
                    if s[k] == 0:
                        den = f[F_Q] * A - f[F_U] * B
                        if abs(den) <= tol_par * (abs(f[F_Q] * A) + abs(f[F_U] * B)):
                            if hit == 0 or k < abs(hit) - 1:
                                hit = x
                    i += step
            if hit == 0:
                return
            k = abs(hit) - 1
            sigma = 1 if hit > 0 else -1
            transition(k, sigma, a, b, m, s, f, ints)
            log_tr(ints, tr_f, tr_i, f[F_NU], mu, hit, 0, sigma, f)
            if ints[I_NFREE] == 0:
                return
            # move l_0 to the bound side of the pinned line
            while (pos[n] < pos[hit + n]) == (sigma > 0):
                p = pos[n]
                swap(p + 1 if sigma > 0 else p, chi, pos, n, ints)
            lo = min(pos[n], pos[hit + n])
            hi = max(pos[n], pos[hit + n])
            for sl in range(lo, hi + 2):
                refresh_slot(sl, chi, a, b, f, n, hkey, hslot, where, ints, tol_geom, tol_par)

    @jit
    def run(a, b, m, s, chi, pos, f, ints, hkey, hslot, where, tr_f, tr_i,
            pop_f, pop_i, record_pops, max_events, cap, refresh_every, tol_geom, tol_par):
        n = a.shape[0]
        processed = 0
        while ints[I_DONE] == 0:
            if ints[I_HSIZE] == 0:
                ints[I_DONE] = 1
                break
            if processed >= max_events:
                return PAUSED
            if ints[I_NTR] + n + 2 > tr_f.shape[0]:
                return TR_FULL
            if record_pops and ints[I_NPOP] >= pop_f.shape[0]:
                return POP_FULL
            if ints[I_EVENTS] >= cap:
                return CAP_EXCEEDED
            nu, slot = heap_pop(hkey, hslot, where, ints)
            ints[I_EVENTS] += 1
            processed += 1
            f[F_NU] = max(f[F_NU], nu)
            lo = chi[slot - 1]
            hi = chi[slot]
            if record_pops:
                t = ints[I_NPOP]
                pop_f[t] = nu
                pop_i[t, 0] = slot
                pop_i[t, 1] = lo
                pop_i[t, 2] = hi
                ints[I_NPOP] = t + 1
            if lo != 0 and hi != 0:
                swap(slot, chi, pos, n, ints)
                refresh_slot(slot - 1, chi, a, b, f, n, hkey, hslot, where, ints,
                             tol_geom, tol_par)
                refresh_slot(slot + 1, chi, a, b, f, n, hkey, hslot, where, ints,
                             tol_geom, tol_par)
                continue
            x = hi if lo == 0 else lo
            k = abs(x) - 1
            sigma = 1 if x > 0 else -1
            if s[k] == 0:
                d = sigma
            elif s[k] == sigma:
                d = -sigma
            else:
                return ILLEGAL
            nu_c = f[F_NU]
            mu = (nu_c * f[F_Q] - f[F_M]) / f[F_U]
            old = transition(k, d, a, b, m, s, f, ints)
            ints[I_L0] += 1
            swap(slot, chi, pos, n, ints)
            ints[I_SINCE] += 1
            if ints[I_SINCE] >= refresh_every and ints[I_NFREE] > 0:
                refresh_sums(a, b, m, s, f)
                if ints[I_NFREE_B] == 0:
                    f[F_Q] = 0.0
                ints[I_SINCE] = 0
            log_tr(ints, tr_f, tr_i, nu_c, mu, x, old, d, f)
            if ints[I_NFREE] > 0:
                for sl in (slot - 1, slot, slot + 1):
                    refresh_slot(sl, chi, a, b, f, n, hkey, hslot, where, ints,
                                 tol_geom, tol_par)
                collapse(mu, a, b, m, s, chi, pos, f, ints, n, hkey, hslot, where,
                         tr_f, tr_i, tol_geom, tol_par)
            if ints[I_NFREE] == 0:
                # the path has ended; the remaining crossings are irrelevant
                while ints[I_HSIZE] > 0:
                    heap_remove(hkey, hslot, where, ints, hslot[0])
                ints[I_DONE] = 1
        return DONE

    @jit
    def init_queue(a, b, f, chi, n, hkey, hslot, where, ints, tol_geom, tol_par):
        for slot in range(1, 2 * n + 1):
            refresh_slot(slot, chi, a, b, f, n, hkey, hslot, where, ints, tol_geom, tol_par)

    return {"run": run, "init_queue": init_queue, "pair_event": pair_event}


def _identity(fn):
    return fn


CORES = {"numpy": build(_identity)}
try:
    import numba
    CORES["numba"] = build(lambda fn: numba.njit(cache=True)(fn))
except ImportError:  # pragma: no cover
    pass


def new_arrays(n, record_pops):
    """Fresh state arrays for a sweep over ``2n + 1`` lines."""
    L = 2 * n + 1
    tr_cap = 4 * n + 16
    pop_cap = 8 * L if record_pops else 0
    return dict(
        f=np.zeros(4),
        ints=np.zeros(N_INTS, dtype=np.int64),
        chi=np.zeros(L, dtype=np.int64),
        pos=np.zeros(L, dtype=np.int64),
        hkey=np.zeros(L),
        hslot=np.zeros(L, dtype=np.int64),
        where=np.full(L, -1, dtype=np.int64),
        tr_f=np.zeros((tr_cap, 5)),
        tr_i=np.zeros((tr_cap, 3), dtype=np.int64),
        pop_f=np.zeros(pop_cap),
        pop_i=np.zeros((pop_cap, 3), dtype=np.int64),
    )
