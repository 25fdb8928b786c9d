#!/usr/bin/env python3
"""
Observation Tests - Morphism laws, registry, algebras and operation lifting
"""

import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from core.effects import Call, Ite, Ret, nd_sig, run_nd, run_state, st_sig
from core.errors import AlgebraLawViolation, UnknownObservation, UnhandledOp
from core.logic import (
    BOOL, INT, TOP, TRUE_LIT, UNIT, UNIT_LIT, Atom, Cmp, Env, Eq, ListOp, PredLam,
    Var, beta, eval_formula, int_lit, normalize,
)
from core.observations import (
    REGISTRY_KEYS, AlgebraRule, alpha_exists, alpha_forall, alpha_state, build_observation,
    check_morphism_laws, from_algebra, lift_op_direct, lift_op_to_spec, recover_algebra,
    theta_angelic, theta_demonic, theta_exc, theta_fr, theta_st,
)
from prover.decide import CounterExample, Valid, decide
from utils.config import DomainConfig


DOM = DomainConfig(int_lo=0, int_hi=1, list_bound=1)
# History postconditions quantify over lists of events; keep them to one event of value 0
IO_DOM = DomainConfig(int_lo=0, int_hi=0, list_bound=1, pred_cap=12)


# =============================================================================
# Morphism laws
# =============================================================================

@pytest.mark.parametrize('key', REGISTRY_KEYS)
def test_registered_observations_are_monad_morphisms(key):
    dom = IO_DOM if key.startswith('io') else DOM
    report = check_morphism_laws(build_observation(key), dom, depth=2)
    print(f"\n  {report.summary()}")
    assert report.passed, report.summary()
    assert report.checked > 0


def test_state_observation_laws_at_depth_three():
    report = check_morphism_laws(theta_st(), DomainConfig(int_lo=0, int_hi=0, list_bound=1),
                                 depth=3, limit=60)
    print(f"\n  {report.summary()}")
    assert report.passed, report.summary()


def test_put_ignoring_its_argument_is_caught():
    """An observation that drops put's argument separates runner-equal trees"""
    s0 = Var('s0', INT)
    broken = AlgebraRule('state', {
        'get': lambda i, k: beta(k, (s0, s0)),
        'put': lambda i, k: beta(k, (UNIT_LIT, s0)),
    })
    obs = from_algebra(st_sig(INT), broken, 'st-broken', oracle=theta_st().oracle)
    report = check_morphism_laws(obs, DOM, depth=2)
    print(f"\n  {report.summary()}")
    assert not report.passed
    assert report.law == 'well-defined'
    first, second = report.witness
    assert all(run_state(first, s) == run_state(second, s) for s in (0, 1))


def test_every_registry_key_builds():
    for key in REGISTRY_KEYS:
        obs = build_observation(key)
        assert obs.name == key
        assert set(obs.rules) == set(obs.sig.op_names)


def test_unknown_observation_key():
    with pytest.raises(UnknownObservation):
        build_observation('nd-random')


def test_observation_requires_every_operation():
    obs = theta_st()
    with pytest.raises(UnhandledOp):
        obs.call('read', UNIT_LIT, Var('x', INT), obs.ret(int_lit(0)))


# =============================================================================
# Nondeterminism
# =============================================================================

def _coin():
    """choice, then ret 1 on true and ret 0 on false"""
    b = Var('b', BOOL)
    return Call('choice', UNIT_LIT, b, Ite(b, Ret(int_lit(1)), Ret(int_lit(0))))


def _post(body):
    v = Var('v', INT)
    return PredLam((v,), body(v))


def test_demonic_requires_every_outcome():
    spec = theta_demonic().theta(_coin())
    at_least_zero = _post(lambda v: Atom(Cmp('<=', int_lit(0), v)))
    is_one = _post(lambda v: Eq(v, int_lit(1)))
    assert eval_formula(spec.instantiate((at_least_zero,)), Env(), DOM)
    assert not eval_formula(spec.instantiate((is_one,)), Env(), DOM)


def test_angelic_requires_some_outcome():
    spec = theta_angelic().theta(_coin())
    is_one = _post(lambda v: Eq(v, int_lit(1)))
    is_two = _post(lambda v: Eq(v, int_lit(2)))
    assert eval_formula(spec.instantiate((is_one,)), Env(), DOM)
    assert not eval_formula(spec.instantiate((is_two,)), Env(), DOM)


# =============================================================================
# Algebras
# =============================================================================

@pytest.mark.parametrize('alg, obs', [(alpha_forall, theta_demonic), (alpha_exists, theta_angelic)])
def test_algebra_induces_registered_observation(alg, obs):
    induced = from_algebra(nd_sig(), alg(), oracle=lambda m, dom: run_nd(m), check_dom=DOM)
    reference = obs()
    for op in ('choice', 'fail'):
        mine, theirs = induced.gen_spec(op, UNIT_LIT), reference.gen_spec(op, UNIT_LIT)
        assert isinstance(decide(reference.target.equiv(mine, theirs), DOM), Valid)


def test_state_algebra_matches_state_observation():
    induced = from_algebra(st_sig(INT), alpha_state(INT))
    reference = theta_st()
    for op, arg in (('get', UNIT_LIT), ('put', int_lit(1))):
        mine, theirs = induced.gen_spec(op, arg), reference.gen_spec(op, arg)
        assert isinstance(decide(reference.target.equiv(mine, theirs), DOM), Valid)


def test_biased_algebra_is_rejected():
    biased = AlgebraRule('prop', {
        'choice': lambda i, k: beta(k, (TRUE_LIT,)),
        'fail': lambda i, k: TOP,
    })
    with pytest.raises(AlgebraLawViolation):
        from_algebra(nd_sig(), biased, 'biased', oracle=lambda m, dom: run_nd(m), check_dom=DOM)


def test_recover_algebra_round_trips():
    alpha = recover_algebra(theta_demonic(), 'choice')
    b = Var('b', BOOL)
    k = PredLam((b,), Atom(b))
    assert isinstance(decide(alpha(UNIT_LIT, k), DOM), CounterExample)
    k_any = PredLam((b,), Eq(b, b))
    assert isinstance(decide(alpha(UNIT_LIT, k_any), DOM), Valid)


# =============================================================================
# Operation lifting
# =============================================================================

@pytest.mark.parametrize('obs_factory, op, arg', [
    (theta_st, 'get', UNIT_LIT),
    (theta_st, 'put', int_lit(1)),
    (lambda: theta_exc(INT), 'throw', int_lit(1)),
    (theta_demonic, 'choice', UNIT_LIT),
])
def test_lifted_operation_agrees_with_template(obs_factory, op, arg):
    obs = obs_factory()
    decl = obs.sig.op(op)
    binder = Var('o', decl.out)
    family = obs.ret(int_lit(0))
    if decl.out == INT:
        family = obs.ret(binder)
    lifted = lift_op_to_spec(obs, op, arg, binder, family)
    direct = lift_op_direct(obs, op, arg, binder, family)
    assert isinstance(decide(obs.target.equiv(lifted, direct), DOM), Valid)


# =============================================================================
# Input/output
# =============================================================================

def test_free_io_observation_counts_events():
    """read, then write the input twice: every trace has three events"""
    x, u = Var('x', INT), Var('u', UNIT)
    tree = Call('read', UNIT_LIT, x, Call('write', x, u, Call('write', x, Var('u2', UNIT), Ret(UNIT_LIT))))
    spec = theta_fr().theta(tree)
    log = Var('l', spec.shape.posts[0].arg_tys[1])
    three = PredLam((Var('r', UNIT), log), Eq(ListOp('length', log), int_lit(3)))
    two = PredLam((Var('r', UNIT), log), Eq(ListOp('length', log), int_lit(2)))
    assert isinstance(decide(normalize(spec.instantiate((three,))), DOM), Valid)
    assert isinstance(decide(normalize(spec.instantiate((two,))), DOM), CounterExample)
