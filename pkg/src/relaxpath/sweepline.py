"""Global sweep-line tracker.

All ``2n + 1`` lines (the coordinate lines ``l_{+-j}`` and the solution line
``l_0``) are swept left to right.  ``chi`` holds their vertical order on the
current scan line and a priority queue holds the future crossings of adjacent
pairs.  Slot ``i`` (``1 <= i <= 2n``) is the pair ``(chi[i-1], chi[i])``.

A crossing of two coordinate lines only swaps them.  A crossing involving
``l_0`` is a breakpoint: the partition and sums change exactly as in the local
tracker and the crossings next to ``l_0`` are recomputed.

The event loop lives in :mod:`relaxpath._sweepcore` and runs under numba or
plain Python depending on the selected backend.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels, _sweepcore as core
from .config import TOL
from .errors import IllegalTransition, IterationCapExceeded
from .path import _DIRECTION, _PathBuilder


@dataclass(frozen=True)
class OpCounters:
    pushes: int
    pops: int
    removes: int
    swaps: int
    l0_events: int
    events: int

    @property
    def queue_ops(self):
        return self.pushes + self.pops + self.removes


class SweepState:
    """Resumable sweep over one instance.

    ``step(k)`` processes up to ``k`` queue events; ``run()`` finishes the
    sweep.  ``queue``, ``chi`` and ``sums`` expose the current state.
    """

    def __init__(self, inst, a=None, b=None, tol=TOL, record_pops=True, backend=None):
        self.inst = inst
        self.a = np.ascontiguousarray(inst.u if a is None else a, dtype=np.float64)
        self.b = np.ascontiguousarray(inst.q if b is None else b, dtype=np.float64)
        self.m = np.ascontiguousarray(inst.m, dtype=np.float64)
        self.tol = tol
        self.record_pops = record_pops
        self._core = core.CORES[backend or _kernels.backend()]
        n = self.n
        self.s = np.zeros(n, dtype=np.int8)
        self._arr = core.new_arrays(n, record_pops)
        A = self._arr
        A["f"][core.F_U] = 1.0
        A["f"][core.F_Q] = 1.0
        A["ints"][core.I_NFREE] = n
        A["ints"][core.I_NFREE_B] = int(np.count_nonzero(self.b))
        # order at nu = 0+: by intercept, then slope, then line id
        ids = np.arange(-n, n + 1)
        k = np.abs(ids) - 1
        sigma = np.sign(ids).astype(np.float64)
        with np.errstate(over="ignore"):
            inter = np.where(ids == 0, 0.0, sigma / self.a[k])
            slope = np.where(ids == 0, 1.0, self.b[k] / self.a[k])
        chi = ids[np.lexsort((ids, slope, inter))]
        A["chi"][:] = chi
        A["pos"][chi + n] = np.arange(2 * n + 1)
        self._cap = 8 * (2 * n + 1) ** 2 + 64
        with np.errstate(over="ignore"):
            self._core["init_queue"](self.a, self.b, A["f"], A["chi"], n, A["hkey"],
                                     A["hslot"], A["where"], A["ints"], tol.geom, tol.parallel)

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def chi(self):
        return tuple(int(x) for x in self._arr["chi"])

    @property
    def nu_scan(self):
        return float(self._arr["f"][core.F_NU])

    @property
    def sums(self):
        f = self._arr["f"]
        return float(f[core.F_M]), float(f[core.F_U]), float(f[core.F_Q])

    @property
    def done(self):
        return bool(self._arr["ints"][core.I_DONE])

    @property
    def queue(self):
        """Live queue entries as sorted ``(nu, slot)`` pairs."""
        A = self._arr
        size = A["ints"][core.I_HSIZE]
        return sorted((float(A["hkey"][i]), int(A["hslot"][i])) for i in range(size))

    @property
    def back_pointers(self):
        """Heap position of every slot's entry (``-1`` if not queued)."""
        return self._arr["where"].copy()

    @property
    def pop_log(self):
        """``(nu, slot, lower line, upper line)`` for every popped event."""
        A = self._arr
        k = A["ints"][core.I_NPOP]
        return [(float(A["pop_f"][t]), int(A["pop_i"][t, 0]), int(A["pop_i"][t, 1]),
                 int(A["pop_i"][t, 2])) for t in range(k)]

    @property
    def counters(self):
        i = self._arr["ints"]
        return OpCounters(int(i[core.I_PUSHES]), int(i[core.I_POPS]), int(i[core.I_REMOVES]),
                          int(i[core.I_SWAPS]), int(i[core.I_L0]), int(i[core.I_EVENTS]))

    def pair_event(self, lower, upper):
        with np.errstate(over="ignore"):
            nu = self._core["pair_event"](lower, upper, self.a, self.b, self._arr["f"], self.n,
                                          self.tol.geom, self.tol.parallel)
        return None if np.isnan(nu) else float(nu)

    def _grow(self, key_f, key_i):
        A = self._arr
        size = max(2 * A[key_f].shape[0], 64)
        for key in (key_f, key_i):
            old = A[key]
            new = np.zeros((size,) + old.shape[1:], dtype=old.dtype)
            new[:old.shape[0]] = old
            A[key] = new

    def step(self, max_events=1):
        """Process up to ``max_events`` events; returns True once finished."""
        A = self._arr
        start = int(A["ints"][core.I_EVENTS])
        while True:
            left = max_events - (int(A["ints"][core.I_EVENTS]) - start)
            # crossings far beyond any float range overflow to inf, which is harmless
            with np.errstate(over="ignore"):
                status = self._core["run"](
                    self.a, self.b, self.m, self.s, A["chi"], A["pos"], A["f"], A["ints"],
                    A["hkey"], A["hslot"], A["where"], A["tr_f"], A["tr_i"], A["pop_f"],
                    A["pop_i"], self.record_pops, left, self._cap,
                    self.tol.refresh_every * self.n, self.tol.geom, self.tol.parallel)
            if status == core.TR_FULL:
                self._grow("tr_f", "tr_i")
            elif status == core.POP_FULL:
                self._grow("pop_f", "pop_i")
            elif status == core.CAP_EXCEEDED:
                raise IterationCapExceeded(
                    f"more than {self._cap} sweep events for n={self.n}")
            elif status == core.ILLEGAL:
                raise IllegalTransition("l_0 crossed a line on the wrong side")
            else:
                return status == core.DONE

    def run(self):
        while not self.step(self._cap + 1):
            pass
        return self

    def path(self, objective="entropy"):
        """Breakpoints recorded so far as a :class:`RelaxationPath`."""
        A = self._arr
        builder = _PathBuilder(self.n, (0.0, 1.0, 1.0), objective, self.tol)
        for t in range(int(A["ints"][core.I_NTR])):
            nu, mu, M, U, Q = A["tr_f"][t]
            x, old, d = (int(v) for v in A["tr_i"][t])
            builder.add(nu, mu, x, _DIRECTION[(old, d)], (M, U, Q))
        return builder.finish(emptied=int(A["ints"][core.I_NFREE]) == 0)


def track_global(inst, tol=TOL, return_state=False, record_pops=False):
    """Global sweep over all lines; returns the same path as the local tracker."""
    st = SweepState(inst, tol=tol, record_pops=record_pops).run()
    path = st.path()
    return (path, st) if return_state else path


def queue_audit(state, inst=None):
    """Recompute adjacent-pair crossings from ``chi`` and compare with the queue.

    Returns a dict with ``ok``, the ``expected`` and ``actual`` entries, the
    ``missing`` / ``extra`` differences and checks of the permutation and the
    back-pointer table.
    """
    n = state.n
    chi = state.chi
    expected = []
    if not state.done:
        for slot in range(1, 2 * n + 1):
            nu = state.pair_event(chi[slot - 1], chi[slot])
            if nu is not None:
                expected.append((nu, slot))
    expected.sort()
    actual = state.queue

    def close(x, y):
        return x[1] == y[1] and abs(x[0] - y[0]) <= 1e-12 * max(1.0, abs(x[0]))

    missing = [e for e in expected if not any(close(e, a) for a in actual)]
    extra = [a for a in actual if not any(close(a, e) for e in expected)]
    chi_ok = sorted(chi) == list(range(-n, n + 1))
    A = state._arr
    size = int(A["ints"][core.I_HSIZE])
    where = A["where"]
    ptr_ok = all(where[A["hslot"][i]] == i for i in range(size)) and \
        int(np.count_nonzero(where >= 0)) == size
    slots = [s for _, s in actual]
    unique = len(slots) == len(set(slots))
    return {"ok": not missing and not extra and chi_ok and ptr_ok and unique,
            "expected": expected, "actual": actual, "missing": missing, "extra": extra,
            "chi_ok": chi_ok, "pointers_ok": ptr_ok, "unique_slots": unique}
