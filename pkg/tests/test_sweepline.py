import numpy as np
import pytest
from hypothesis import given

from relaxpath import track_local, validate_instance
from relaxpath.sweepline import SweepState, queue_audit, track_global

from conftest import instances, make_instance, same_path


def _queue(st):
    return [(pytest.approx(nu, rel=1e-12), slot) for nu, slot in st.queue]


def test_initial_order_and_queue(toy, backend):
    st = SweepState(toy)
    assert st.chi == (-3, -2, -1, 0, 1, 2, 3)
    assert st.queue == [(pytest.approx(12 / 7), 6), (pytest.approx(36 / 13), 2),
                        (pytest.approx(4.0), 4)]
    assert queue_audit(st)["ok"]


def test_first_pops_replay(toy, backend):
    st = SweepState(toy)
    st.step(1)
    assert st.pop_log[-1] == (pytest.approx(12 / 7), 6, 2, 3)
    assert st.queue == [(pytest.approx(36 / 13), 2), (pytest.approx(4.0), 4),
                        (pytest.approx(60.0), 5)]
    st.step(1)
    assert st.pop_log[-1] == (pytest.approx(36 / 13), 2, -2, -1)
    assert st.queue == [(pytest.approx(4.0), 4), (pytest.approx(24 / 5), 3),
                        (pytest.approx(60.0), 5)]
    assert st.sums == (0.0, 1.0, 1.0)
    st.step(1)
    assert st.pop_log[-1] == (pytest.approx(4.0), 4, 0, 1)
    assert st.sums == pytest.approx((1.0, 0.5, 0.75), abs=1e-15)
    # the l_0 event drops the stale (60, 5) entry and reschedules both neighbours
    assert st.queue == [(pytest.approx(60 / 13), 3), (pytest.approx(12.0), 5)]
    assert queue_audit(st)["ok"]


def test_full_sweep_toy(toy, backend):
    path, st = track_global(toy, return_state=True)
    assert same_path(path, track_local(toy))
    assert st.done and st.queue == []
    audit = queue_audit(st)
    assert audit["ok"] and audit["expected"] == []
    c = st.counters
    assert c.l0_events == 4 and c.pops == c.events
    assert c.pushes == c.pops + c.removes


def test_u_equals_q_drains_without_breakpoints(backend):
    inst = validate_instance([0.1, 0.2, 0.3, 0.4], [0.1, 0.2, 0.3, 0.4])
    path, st = track_global(inst, return_state=True)
    assert path.kappa == 0 and np.isinf(path.nu_inf)
    assert st.counters.l0_events == 0 and st.queue == []


def test_pair_event_parallel_lines_have_no_crossing(toy):
    st = SweepState(validate_instance([0.5, 0.5], [0.5, 0.5]))
    assert st.pair_event(1, 2) is None


def test_audit_every_event_and_pops_are_true_crossings(backend):
    for seed in range(20):
        inst = make_instance("dense", seed, 9)
        st = SweepState(inst)
        path_nus = []
        while not st.step(1):
            audit = queue_audit(st)
            assert audit["ok"], audit
        for nu, slot, lo, hi in st.pop_log:
            if lo and hi:
                k1, k2 = abs(lo) - 1, abs(hi) - 1
                mu1 = (np.sign(lo) + inst.q[k1] * nu) / inst.u[k1]
                mu2 = (np.sign(hi) + inst.q[k2] * nu) / inst.u[k2]
                assert mu1 == pytest.approx(mu2, rel=1e-10, abs=1e-10)
            else:
                path_nus.append(nu)
        path = st.path()
        for nu in path.nus:
            assert min(abs(nu - x) for x in path_nus) <= 1e-10 * max(1, nu)


@given(instances("dense", n_min=2, n_max=24))
def test_operation_count_is_quadratic(inst):
    _, st = track_global(inst, return_state=True)
    n = inst.n
    assert st.counters.queue_ops <= 12 * n * n + 24
    assert st.counters.swaps <= n * (2 * n + 1)


@given(instances("dense", n_min=2, n_max=24))
def test_chi_is_permutation_after_run(inst):
    _, st = track_global(inst, return_state=True)
    assert sorted(st.chi) == list(range(-inst.n, inst.n + 1))
    assert st.done and queue_audit(st)["ok"]


def test_step_is_resumable(backend):
    inst = make_instance("dense", 3, 16)
    whole = track_global(inst)
    st = SweepState(inst, record_pops=False)
    while not st.step(7):
        pass
    assert same_path(whole, st.path())
