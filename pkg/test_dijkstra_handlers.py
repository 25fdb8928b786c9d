#!/usr/bin/env python3
"""
Dijkstra Layer Tests - Combinators, loops, exception handlers, upfront contracts and recursion
"""

import sys
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from core.dijkstra import (
    DComp, ObligationStatus, annotate, d_bind, d_absurd, d_ite, d_op, d_ret, d_weaken, for_in, obligations_of,
)
from core.effects import Call, OpDecl, Ret, enumerate_trees, free_sig, run_exc, run_pure, run_state
from core.errors import ObservationMismatch, ShapeMismatch
from core.handlers import (
    Measure, OpClause, OpContract, ReturnClause, alpha_star, fix, handle_upfront, recursive_observation,
    reify, try_catch, unfold,
)
from core.logic import (
    BOOL, FALSE_LIT, INT, TRUE_LIT, UNIT, UNIT_LIT, Apply, Arith, Atom, Cmp, Eq, Forall, FunSym, Implies,
    PApply, PredLam, SumTy, SumVal, Inj, Var, eval_term, int_lit, normalize,
)
from core.observations import small_values, theta_demonic, theta_exc, theta_pure, theta_st
from core.specmonads import NestedSpec, SpecExpr, wpure
from core.vcgen import wp
from prover.decide import CounterExample, Valid, decide, discharge
from utils.config import DomainConfig


DOM = DomainConfig(int_lo=0, int_hi=3)
x = Var('x', INT)


def valid(formula, dom=DOM, definitions=None):
    return isinstance(decide(formula, dom, definitions), Valid)


def all_valid(obligations, dom=DOM):
    outcomes = [discharge(ob, dom) for ob in obligations]
    for ob in outcomes:
        print(f"  {ob.name} [{ob.kind}] {ob.status.value}")
    return all(ob.status is ObligationStatus.VALID for ob in outcomes)


# =============================================================================
# Combinators
# =============================================================================

def test_stmod_declared_spec_and_root_obligation():
    obs = theta_st(INT)
    prog = d_bind(d_op(obs, 'get', UNIT_LIT), x, d_op(obs, 'put', Arith('+', x, int_lit(1))))
    print(f"\n  declared: {prog.declared.normalized().pretty()}")
    assert run_state(prog.comp, 2) == (None, 3)
    obligations = obligations_of(prog, 'stmod')
    assert [ob.name for ob in obligations] == ['stmod.1']
    assert obligations[-1].kind == 'root'
    assert all_valid(obligations)


def test_weakening_to_a_looser_spec():
    obs = theta_st(INT)
    get = d_op(obs, 'get', UNIT_LIT)
    shape = get.declared.shape
    p, s0 = shape.posts[0], shape.ctx[0]
    v = Var('v', INT)
    any_result = SpecExpr(shape, Forall(v, PApply(p, (v, s0))))
    weakened, ob = d_weaken(get, any_result)
    assert weakened.declared == any_result
    assert ob in weakened.pending
    assert valid(ob.formula)

    zero = SpecExpr(shape, PApply(p, (int_lit(0), s0)))
    _, bad = d_weaken(get, zero)
    assert isinstance(decide(bad.formula, DOM), CounterExample)


def test_weakening_rejects_other_shapes():
    obs = theta_st(INT)
    with pytest.raises(ShapeMismatch):
        d_weaken(d_op(obs, 'get', UNIT_LIT), obs.ret(UNIT_LIT))


def test_bind_rejects_mixed_observations():
    with pytest.raises(ObservationMismatch):
        d_bind(d_ret(int_lit(0), theta_st(INT)), x, d_ret(x, theta_demonic()))


def test_ite_guards_branch_obligations():
    obs = theta_st(INT)
    get = d_op(obs, 'get', UNIT_LIT)
    v = Var('v', INT)
    loose = SpecExpr(get.declared.shape, Forall(v, PApply(get.declared.shape.posts[0], (v, get.declared.shape.ctx[0]))))
    weakened, _ = d_weaken(get, loose)
    branch = d_ite(Cmp('<', x, int_lit(2)), weakened, DComp(Ret(int_lit(0)), loose, obs))
    assert len(branch.pending) == 1
    assert isinstance(branch.pending[0].formula, Implies)


SMALL = DomainConfig(int_lo=0, int_hi=1, list_bound=1)
ST_OPS = [('get', UNIT_LIT, Var('o', INT)), ('put', int_lit(0), Var('o', UNIT)), ('put', int_lit(1), Var('o', UNIT))]


def _st_dcomp(obs, tree, annotation=None):
    """tree declared with its own wp, or with a fixed ``p⟨value, s0⟩`` annotation"""
    d = DComp(tree, wp(tree, obs).spec, obs)
    if annotation is None:
        return d
    shape = d.declared.shape
    return annotate(d, SpecExpr(shape, PApply(shape.posts[0], (int_lit(annotation), shape.ctx[0]))))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ST_OPS), st.data(), st.sampled_from([None, 0, 1]))
def test_bind_after_an_operation_reassociates(op_case, data, annotation):
    """bind (op⟨i, c⟩) f and op⟨i, λo. bind (c o) f⟩ agree on specs, obligations and runs"""
    obs = theta_st(INT)
    op, arg, o = op_case
    c_tree = data.draw(st.sampled_from(list(enumerate_trees(obs.sig, INT, small_values(SMALL), 1, (o,)))))
    f_tree = data.draw(st.sampled_from(list(enumerate_trees(obs.sig, INT, small_values(SMALL), 1, (x,)))))
    c, f = _st_dcomp(obs, c_tree, annotation), _st_dcomp(obs, f_tree)

    lhs = d_bind(d_bind(d_op(obs, op, arg), o, c), x, f)
    rhs = d_bind(d_op(obs, op, arg), o, d_bind(c, x, f))
    for s in (0, 1):
        assert run_state(lhs.comp, s) == run_state(rhs.comp, s)
    assert valid(obs.target.equiv(lhs.declared, rhs.declared), SMALL)
    statuses = [[discharge(ob, SMALL).status for ob in obligations_of(d, 'coherence')] for d in (lhs, rhs)]
    assert statuses[0] == statuses[1]


# =============================================================================
# Loops
# =============================================================================

def _put_body(obs):
    item = Var('item', INT)
    return item, d_op(obs, 'put', item)


def test_for_in_with_havoc_invariant():
    obs = theta_st(INT)
    item, body = _put_body(obs)
    shape = obs.target.shape(UNIT)
    s = Var('s', INT)
    inv = SpecExpr(shape, Forall(s, PApply(shape.posts[0], (UNIT_LIT, s))))
    loop = for_in([int_lit(1), int_lit(2)], item, body, inv)
    assert run_state(loop.comp, 0) == (None, 2)
    obligations = obligations_of(loop, 'loop')
    assert [ob.kind for ob in obligations] == ['invariant', 'invariant', 'invariant', 'root']
    assert all_valid(obligations)


def test_for_in_with_wrong_invariant():
    obs = theta_st(INT)
    item, body = _put_body(obs)
    shape = obs.target.shape(UNIT)
    unchanged = SpecExpr(shape, PApply(shape.posts[0], (UNIT_LIT, shape.ctx[0])))
    loop = for_in([int_lit(1)], item, body, unchanged)
    statuses = [discharge(ob, DOM).status for ob in obligations_of(loop, 'loop')]
    assert statuses[0] is ObligationStatus.COUNTEREXAMPLE


# =============================================================================
# Exceptions
# =============================================================================

def _throw(obs, code):
    return d_absurd(d_op(obs, 'throw', int_lit(code)), INT)


def test_try_catch_recovers_thrown_value():
    obs = theta_exc(INT)
    e = Var('e', INT)
    h_impl = d_ret(Arith('+', e, int_lit(1)), obs)
    k = d_ret(Arith('*', x, int_lit(2)), obs)
    handled = try_catch(_throw(obs, 3), e, h_impl.declared, h_impl, x, k)
    assert run_exc(handled.comp) == SumVal('l', 4)
    assert valid(obs.target.equiv(handled.declared, obs.ret(int_lit(4))))
    assert all_valid(obligations_of(handled, 'try'))

    normal = try_catch(d_ret(int_lit(5), obs), e, h_impl.declared, h_impl, x, k)
    assert run_exc(normal.comp) == SumVal('l', 10)


def test_try_catch_needs_exception_observation():
    obs = theta_st(INT)
    e = Var('e', INT)
    with pytest.raises(ShapeMismatch):
        try_catch(d_ret(int_lit(0), obs), e, obs.ret(e), d_ret(e, obs), x, d_ret(x, obs))


def test_reify_turns_exceptions_into_values():
    obs = theta_exc(INT)
    reified = reify(_throw(obs, 3))
    sty = SumTy(INT, INT)
    assert run_pure(reified.comp) == SumVal('r', 3)
    dom = DomainConfig(int_lo=0, int_hi=3, pred_cap=8)
    assert valid(wpure().equiv(reified.declared, wpure().ret(Inj('r', int_lit(3), sty))), dom)


def test_alpha_star_sends_exceptions_through_the_algebra():
    obs = theta_exc(INT)
    e = Var('e', INT)
    outer = obs.gen_spec('throw', int_lit(3))
    void = Var('v', outer.shape.result_ty)
    extended = alpha_star(e, obs.ret(Arith('+', e, int_lit(1))))(NestedSpec(outer, void, obs.ret(int_lit(0))))
    assert valid(obs.target.equiv(extended, obs.ret(int_lit(4))))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_try_catch_matches_alpha_star_on_generated_programs(data):
    obs = theta_exc(INT)
    e = Var('e', INT)
    values = small_values(SMALL)

    def draw(depth, scope=()):
        tree = data.draw(st.sampled_from(list(enumerate_trees(obs.sig, INT, values, depth, scope))))
        return DComp(tree, wp(tree, obs).spec, obs)

    m, h, k = draw(2), draw(1, (e,)), draw(1, (x,))
    handled = try_catch(m, e, h.declared, h, x, k)
    via_algebra = alpha_star(e, h.declared)(NestedSpec(m.declared, x, k.declared))
    assert valid(obs.target.equiv(handled.declared, via_algebra), SMALL)
    assert valid(obs.target.equiv(handled.declared, wp(handled.comp, obs).spec), SMALL)
    assert not handled.pending


# =============================================================================
# Upfront contracts
# =============================================================================

CHOOSE = free_sig('Choose', [OpDecl('choice', UNIT, BOOL)])


def _handle_choice(resume_with):
    b, y = Var('b', BOOL), Var('y', BOOL)
    contract = OpContract(CHOOSE.op('choice'), Var('u', UNIT), b, post=Eq(b, TRUE_LIT))
    k = FunSym('k', BOOL, BOOL)
    clause = OpClause('choice', Var('u', UNIT), k, Apply(k, resume_with))
    m = Call('choice', UNIT_LIT, b, Ret(b))
    is_true = PredLam((y,), Eq(y, TRUE_LIT))
    retc = ReturnClause(Var('r', BOOL), Var('r', BOOL))
    return handle_upfront(m, CHOOSE, {'choice': contract}, is_true, is_true, retc, {'choice': clause})


def test_handle_choice_with_contract():
    term, obligations = _handle_choice(TRUE_LIT)
    assert eval_term(term) is True
    assert [ob.kind for ob in obligations] == ['contract', 'clause', 'return']
    assert all(valid(normalize(ob.formula)) for ob in obligations)


def test_handle_choice_resuming_with_false_breaks_clause():
    _, obligations = _handle_choice(FALSE_LIT)
    outcomes = {ob.kind: decide(normalize(ob.formula), DOM) for ob in obligations}
    assert isinstance(outcomes['clause'], CounterExample)
    assert isinstance(outcomes['contract'], Valid)


# =============================================================================
# General recursion
# =============================================================================

FIB_DOM = DomainConfig(int_lo=0, int_hi=7)
n = Var('n', INT)


def _fib(measure=None):
    r = Var('r', INT)
    shape = wpure().shape(INT)
    inv = SpecExpr(shape, Forall(r, Implies(Atom(Cmp('<=', int_lit(0), r)), PApply(shape.posts[0], (r,)))))
    measure = measure or Measure.default_for(n)
    obs = recursive_observation(theta_pure(), n, inv, measure)
    r1, r2 = Var('r1', INT), Var('r2', INT)
    recurse = d_bind(d_op(obs, 'call', Arith('-', n, int_lit(1))), r1,
                     d_bind(d_op(obs, 'call', Arith('-', n, int_lit(2))), r2,
                            d_ret(Arith('+', r1, r2), obs)))
    body = d_ite(Cmp('<=', n, int_lit(1)), d_ret(n, obs), recurse)
    return fix(n, body, inv, measure, 'fib', dom=FIB_DOM), body


def fib_oracle(k):
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def test_fix_obligations_hold():
    result, _ = _fib()
    kinds = [ob.kind for ob in result.obligations]
    assert kinds[0] == 'measure' and kinds[-1] == 'root'
    assert all_valid(result.obligations, FIB_DOM)


def test_constant_measure_is_rejected():
    result, _ = _fib(Measure(n, int_lit(5)))
    root = discharge(result.obligations[-1], FIB_DOM)
    assert root.status is ObligationStatus.COUNTEREXAMPLE


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 7))
def test_fixed_point_agrees_with_iteration(k):
    result, _ = _fib()
    assert result.function is not None
    assert result.function(k) == fib_oracle(k)


def test_unfold_removes_recursive_calls():
    _, body = _fib()
    unfolded = unfold(n, body.comp, int_lit(5), depth=10, dom=FIB_DOM)
    assert run_pure(unfolded) == 5


def test_default_measure_needs_int_or_list():
    with pytest.raises(ShapeMismatch):
        Measure.default_for(Var('b', BOOL))
