#!/usr/bin/env python3
"""
VC Generation and Prover Tests - wp against the runners, both VC routes, and the finite decider
"""

import itertools
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from core.dijkstra import DComp
from core.effects import (
    Call, Ret, enumerate_trees, exc_sig, io_sig, iost_sig, nd_sig, run_exc, run_io, run_iost, run_nd, run_state,
    st_sig,
)
from core.errors import ShapeMismatch
from core.logic import (
    BOOL, INT, UNIT, UNIT_LIT, Apply, Arith, Atom, Cmp, Conj, Env, Eq, Forall, ForallFun, ForallPred, FunSym,
    Implies, ListLit, Neg, PApply, PredLam, PredVar, Var, conj, disj, eval_formula, event_type, int_lit, normalize,
    value_term,
)
from core.observations import build_observation, small_values, theta_angelic, theta_demonic, theta_exc, theta_st
from core.specmonads import SpecExpr, wiost
from core.vcgen import close_formula, history_context, root_vc, vc_leq, wp
from prover.decide import CounterExample, ResourceExceeded, Valid, decide
from utils.config import DomainConfig


DOM = DomainConfig(int_lo=0, int_hi=1, list_bound=1)
ST_TREES = list(enumerate_trees(st_sig(INT), INT, small_values(DOM), 2))
ND_TREES = list(enumerate_trees(nd_sig(), BOOL, small_values(DOM), 2))


# =============================================================================
# wp against the runners
# =============================================================================

@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ST_TREES), st.integers(0, 1))
def test_state_wp_characterizes_the_run(m, s0):
    value, state = run_state(m, s0)
    spec = wp(m, theta_st()).spec
    v, s = Var('v', INT), Var('s', INT)
    outcome = Conj((Eq(v, int_lit(value)), Eq(s, int_lit(state))))
    exact = PredLam((v, s), outcome)
    other = PredLam((v, s), Neg(outcome))
    assert eval_formula(spec.instantiate((exact,), (int_lit(s0),)), Env(), DOM)
    assert not eval_formula(spec.instantiate((other,), (int_lit(s0),)), Env(), DOM)


def _one_of(values):
    b = Var('b', BOOL)
    return PredLam((b,), disj(*(Eq(b, value_term(o, BOOL)) for o in sorted(values))))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ND_TREES))
def test_demonic_wp_is_every_outcome(m):
    outcomes = run_nd(m)
    spec = wp(m, theta_demonic()).spec
    assert eval_formula(spec.instantiate((_one_of(outcomes),)), Env(), DOM)
    for dropped in outcomes:
        assert not eval_formula(spec.instantiate((_one_of(outcomes - {dropped}),)), Env(), DOM)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ND_TREES))
def test_angelic_wp_is_some_outcome(m):
    outcomes = run_nd(m)
    spec = wp(m, theta_angelic()).spec
    for value in (True, False):
        assert eval_formula(spec.instantiate((_one_of({value}),)), Env(), DOM) == (value in outcomes)


# =============================================================================
# Routes
# =============================================================================

def _stmod():
    x, u = Var('x', INT), Var('u', UNIT)
    return Call('get', UNIT_LIT, x, Call('put', Arith('+', x, int_lit(1)), u, Ret(UNIT_LIT)))


def _declared(shift):
    obs = theta_st()
    shape = obs.target.shape(UNIT)
    p, s0 = shape.posts[0], shape.ctx[0]
    return obs, SpecExpr(shape, PApply(p, (UNIT_LIT, Arith('+', s0, int_lit(shift)))))


@pytest.mark.parametrize('shift, expected', [(1, Valid), (0, CounterExample)])
def test_routes_agree(shift, expected):
    obs, declared = _declared(shift)
    inferred = wp(_stmod(), obs).spec
    for route in ('first-order', 'second-order', 'auto'):
        formula = normalize(vc_leq(obs.target, inferred, declared, route))
        outcome = decide(formula, DomainConfig(int_lo=0, int_hi=3))
        print(f"\n  {route}: {outcome}")
        assert isinstance(outcome, expected)


def test_first_order_route_needs_prepost_shape():
    obs = theta_st()
    shape = obs.target.shape(UNIT)
    p, s0 = shape.posts[0], shape.ctx[0]
    weird = SpecExpr(shape, Implies(PApply(p, (UNIT_LIT, s0)), PApply(p, (UNIT_LIT, s0))))
    inferred = wp(_stmod(), obs).spec
    with pytest.raises(ShapeMismatch):
        vc_leq(obs.target, inferred, weird, 'first-order')
    assert isinstance(vc_leq(obs.target, inferred, weird, 'second-order'), ForallPred)


def test_division_side_condition():
    x = Var('x', INT)
    m = Call('get', UNIT_LIT, x, Ret(Arith('div', int_lit(6), x)))
    result = wp(m, theta_st())
    assert len(result.side_conditions) == 1
    outcome = decide(result.side_conditions[0], DOM)
    assert isinstance(outcome, CounterExample)
    assert outcome.assignment == {'x': '0'}


def test_history_modes():
    target = wiost()
    shape = target.shape(UNIT)
    assert history_context(target, shape.ctx, 'universal') == {}
    empty = history_context(target, shape.ctx, 'empty')
    assert set(empty) == {'h'}
    assert isinstance(empty['h'], ListLit) and empty['h'].items == ()
    with pytest.raises(ValueError):
        history_context(target, shape.ctx, 'recent')


def test_close_formula_binds_free_symbols():
    x = Var('x', INT)
    f = FunSym('f', INT, INT)
    closed = close_formula(Eq(Apply(f, x), Apply(f, x)))
    assert isinstance(closed, ForallFun)
    assert closed.fv == frozenset()
    assert isinstance(close_formula(Eq(Apply(f, x), x), bound_funs=('f',)), Forall)


# =============================================================================
# Decider
# =============================================================================

def test_decide_valid():
    x = Var('x', INT)
    assert isinstance(decide(Forall(x, Atom(Cmp('<=', int_lit(0), x))), DomainConfig(int_lo=0, int_hi=3)), Valid)


def test_decide_counterexample_names_the_witness():
    x = Var('x#4', INT)
    outcome = decide(Forall(x, Atom(Cmp('<', x, int_lit(2)))), DomainConfig(int_lo=0, int_hi=3))
    assert isinstance(outcome, CounterExample)
    assert outcome.assignment == {'x': '2'}
    print(f"\n  {outcome}")


def test_decide_reports_resource_exceeded():
    p = PredVar('p', (INT,))
    x = Var('x', INT)
    f = ForallPred(p, Forall(x, Implies(PApply(p, (x,)), PApply(p, (x,)))))
    outcome = decide(f, DomainConfig(int_lo=0, int_hi=9, pred_cap=6))
    assert isinstance(outcome, ResourceExceeded)
    assert outcome.detail


def test_decide_enumerates_function_tables():
    b = Var('b', BOOL)
    k = FunSym('k', BOOL, BOOL)
    idempotent = Forall(b, Eq(Apply(k, Apply(k, b)), Apply(k, b)))
    assert isinstance(decide(ForallFun(k, idempotent), DOM), CounterExample)


# =============================================================================
# wp against the runners: exceptions and IO
# =============================================================================

EXC_TREES = list(enumerate_trees(exc_sig(INT), INT, small_values(DOM), 2))
IO_TREES = list(enumerate_trees(io_sig(), INT, small_values(DOM), 2))
IOST_TREES = list(enumerate_trees(iost_sig(), INT, small_values(DOM), 2))
NIL = ListLit((), event_type())


def _exactly(post, outcomes):
    """λr. r is one of outcomes, for a post binder of any arity"""
    params = tuple(Var(f'r{n}', ty) for n, ty in enumerate(post.arg_tys))
    cases = [conj(*(Eq(p, value_term(v, p.ty)) for p, v in zip(params, outcome)))
             for outcome in sorted(outcomes, key=repr)]
    return PredLam(params, disj(*cases))


def _streams(m):
    return list(itertools.product((0, 1), repeat=m.depth))


def _assert_exact(spec, outcomes, ctx=()):
    post = spec.shape.posts[0]
    assert eval_formula(spec.instantiate((_exactly(post, outcomes),), ctx), Env(), DOM)
    if len(outcomes) > 1:
        for dropped in outcomes:
            assert not eval_formula(spec.instantiate((_exactly(post, outcomes - {dropped}),), ctx), Env(), DOM)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(EXC_TREES))
def test_exception_wp_characterizes_the_run(m):
    outcome = run_exc(m)
    spec = wp(m, theta_exc(INT)).spec
    p, q = spec.shape.posts
    normal = {(outcome.value,)} if outcome.side == 'l' else set()
    raised = {(outcome.value,)} if outcome.side == 'r' else set()
    assert eval_formula(spec.instantiate((_exactly(p, normal), _exactly(q, raised))), Env(), DOM)
    swapped = (_exactly(p, raised), _exactly(q, normal))
    assert not eval_formula(spec.instantiate(swapped), Env(), DOM)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(IO_TREES))
def test_free_io_wp_covers_every_input_stream(m):
    outcomes = {run_io(m, stream) for stream in _streams(m)}
    _assert_exact(wp(m, build_observation('io-free')).spec, outcomes)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(IO_TREES))
def test_history_io_wp_covers_every_input_stream(m):
    outcomes = {run_io(m, stream) for stream in _streams(m)}
    _assert_exact(wp(m, build_observation('io-hist')).spec, outcomes, (NIL,))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(IO_TREES))
def test_threaded_history_wp_lists_events_newest_first(m):
    outcomes = {(v, tuple(reversed(events))) for v, events in
                (run_io(m, stream) for stream in _streams(m))}
    _assert_exact(wp(m, build_observation('io-histst')).spec, outcomes, (NIL,))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(IOST_TREES), st.integers(0, 1))
def test_io_state_wp_covers_every_input_stream(m, s0):
    outcomes = {run_iost(m, s0, stream) for stream in _streams(m)}
    spec = wp(m, build_observation('iost')).spec
    ctx = {'s': int_lit(s0), 'h': NIL}
    _assert_exact(spec, outcomes, tuple(ctx[v.name] for v in spec.shape.ctx))


# =============================================================================
# Routes on generated programs
# =============================================================================

def _prepost_spec(shape, pre, result, state):
    """pre(s0) ⇒ p⟨result, state⟩ with result None meaning any value"""
    p, s0 = shape.posts[0], shape.ctx[0]
    terms = {'0': int_lit(0), '1': int_lit(1), 's0': s0}
    guards = {'true': None, 's0<1': Atom(Cmp('<', s0, int_lit(1))), 's0=1': Eq(s0, int_lit(1))}
    if result is None:
        v = Var('v', INT)
        concl = Forall(v, PApply(p, (v, terms[state])))
    else:
        concl = PApply(p, (terms[result], terms[state]))
    return SpecExpr(shape, concl if guards[pre] is None else Implies(guards[pre], concl))


SPEC_CHOICES = (st.sampled_from(['true', 's0<1', 's0=1']),
                st.sampled_from([None, '0', '1', 's0']),
                st.sampled_from(['0', '1', 's0']))


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(ST_TREES), *SPEC_CHOICES)
def test_routes_are_equivalid_on_generated_programs(m, pre, result, state):
    obs = theta_st()
    declared = _prepost_spec(obs.target.shape(INT), pre, result, state)
    d = DComp(m, declared, obs)
    first = decide(root_vc(d, 'first-order'), DOM)
    second = decide(root_vc(d, 'second-order'), DOM)
    assert type(first) is type(second), (first, second)
    assert not isinstance(first, ResourceExceeded)


# =============================================================================
# Decider against direct evaluation
# =============================================================================

X, Y = Var('x', INT), Var('y', INT)
NARROW = DomainConfig(int_lo=0, int_hi=1, list_bound=1)
WIDE = DomainConfig(int_lo=-2, int_hi=3, list_bound=1)


@st.composite
def int_terms(draw, depth=1):
    if depth == 0 or draw(st.booleans()):
        return draw(st.sampled_from([X, Y, int_lit(draw(st.integers(-2, 2)))]))
    op = draw(st.sampled_from(['+', '-', '*', 'div', 'mod']))
    return Arith(op, draw(int_terms(depth - 1)), draw(int_terms(depth - 1)))


@st.composite
def open_formulas(draw, depth=2, quantifiers=True):
    """Formulas over x and y; inner quantifiers rebind y"""
    if depth == 0 or draw(st.booleans()):
        left, right = draw(int_terms()), draw(int_terms())
        if draw(st.booleans()):
            return Eq(left, right)
        return Atom(Cmp(draw(st.sampled_from(['<', '<=', '<>'])), left, right))
    kinds = ['and', 'or', 'implies', 'not'] + (['forall'] if quantifiers else [])
    kind = draw(st.sampled_from(kinds))

    def sub():
        return draw(open_formulas(depth - 1, quantifiers))

    if kind == 'and':
        return Conj((sub(), sub()))
    if kind == 'or':
        return disj(sub(), sub())
    if kind == 'implies':
        return Implies(sub(), sub())
    if kind == 'not':
        return Neg(sub())
    return Forall(Y, sub())


def _every_assignment(body, dom):
    values = range(dom.int_lo, dom.int_hi + 1)
    return all(eval_formula(body, Env(vars={'x': xv, 'y': yv}), dom)
               for xv, yv in itertools.product(values, repeat=2))


@settings(max_examples=200, deadline=None)
@given(open_formulas())
def test_decide_agrees_with_evaluation(body):
    closed = Forall(X, Forall(Y, body))
    outcome = decide(closed, NARROW)
    assert isinstance(outcome, (Valid, CounterExample))
    assert isinstance(outcome, Valid) == _every_assignment(body, NARROW)
    assert isinstance(outcome, Valid) == eval_formula(closed, Env(), NARROW)


@settings(max_examples=150, deadline=None)
@given(open_formulas(quantifiers=False))
def test_counterexample_survives_a_wider_interval(body):
    closed = Forall(X, Forall(Y, body))
    outcome = decide(closed, NARROW)
    if not isinstance(outcome, CounterExample):
        return
    env = Env(vars={name: int(value) for name, value in outcome.assignment.items()})
    assert set(outcome.assignment) == {'x', 'y'}
    assert not eval_formula(body, env, WIDE)
    assert isinstance(decide(closed, WIDE), CounterExample)
