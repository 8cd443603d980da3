import numpy as np
import pytest
from hypothesis import given, strategies as st

from relaxpath import InconsistentChain, kkt_check, point_at, solve_mu_at, validate_instance
from relaxpath.cascade import CascadeStage, cascade_eval, cascade_step, run_cascade

from oracles import dense_instance


def test_toy_stage(toy):
    p, stage = cascade_step(toy.u, toy.q, toy.m, 8.0)
    assert p == pytest.approx([3 / 8, 5 / 24, 5 / 72], abs=1e-12)
    assert stage.indices == (0, 1) and stage.support == 2
    assert stage.Z == pytest.approx(6 / 5, rel=1e-12)
    assert cascade_eval(toy.u, [stage], toy.m) == pytest.approx(p, abs=1e-12)


def test_stage_below_first_breakpoint(toy):
    p, stage = cascade_step(toy.u, toy.q, toy.m, 2.0)
    assert p == pytest.approx(toy.u)
    assert stage.indices == () and stage.Z == pytest.approx(1.0)


def test_empty_chain_is_prior(toy):
    assert cascade_eval(toy.u, [], toy.m) == pytest.approx(toy.u)


def test_two_stage_closed_form(toy):
    q2 = np.array([0.2, 0.2, 0.4 / 3])
    ps, stages = run_cascade(toy.u, [toy.q, q2], toy.m, [8.0, 20.0])
    a = stages[0].dense_alpha(3) + stages[1].dense_alpha(3)
    direct = toy.u * np.exp(a) / (stages[0].Z * stages[1].Z)
    assert direct == pytest.approx(ps[-1], abs=1e-12)


def test_stage_dict_round_trip(toy):
    _, stage = cascade_step(toy.u, toy.q, toy.m, 8.0)
    back = CascadeStage.from_dict(stage.to_dict())
    assert back == stage


def test_inconsistent_chains(toy):
    _, stage = cascade_step(toy.u, toy.q, toy.m, 8.0)
    with pytest.raises(InconsistentChain):
        cascade_eval(toy.u[:1], [stage])
    bad = CascadeStage(stage.indices, stage.values, 2 * stage.Z, stage.nu)
    with pytest.raises(InconsistentChain):
        cascade_eval(toy.u, [bad], toy.m)


def _chain(seed, n, k):
    rng = np.random.default_rng(seed)
    u, _, m = dense_instance(rng, n)
    qs = [q / (m @ q) for q in (rng.dirichlet(np.ones(n)) for _ in range(k))]
    nus = [float(x) for x in rng.uniform(0.5, 40, k)]
    return u, qs, m, nus


@given(st.integers(0, 10_000), st.integers(2, 12), st.integers(1, 5))
def test_chain_reconstruction(seed, n, k):
    u, qs, m, nus = _chain(seed, n, k)
    ps, stages = run_cascade(u, qs, m, nus)
    assert cascade_eval(u, stages, m) == pytest.approx(ps[-1], abs=1e-9)
    prior = u
    for q, nu, p, stage in zip(qs, nus, ps, stages):
        inst = validate_instance(prior, q, m)
        mu, s = solve_mu_at(inst, nu)
        assert stage.support == int(np.count_nonzero(s))
        assert kkt_check(inst, point_at(inst, nu, mu)).ok
        prior = p
