#!/usr/bin/env python3
"""
Effects Tests - Computation trees, bind, typing and the concrete runners
"""

import sys
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from core.effects import (
    Call, Ite, LetPure, Ret, absurd, comp_bind, comp_ops, comp_ret, comp_type, enumerate_trees, gen_of_op,
    io_sig, iost_sig, nd_sig, op_of_gen, run_exc, run_genrec, run_io, run_iost, run_nd, run_pure,
    run_state, st_sig, exc_sig,
)
from core.errors import InputExhausted, NonTermination, TypingError, UnhandledOp
from core.logic import (
    BOOL, INT, UNIT, UNIT_LIT, VOID, Arith, CtorVal, SumVal, Var, int_lit, value_term,
)
from core.observations import small_values
from utils.config import DomainConfig


u = Var('u', UNIT)


def stmod_tree():
    """let s = get () in put (s + 1)"""
    s = Var('s', INT)
    return Call('get', UNIT_LIT, s, Call('put', Arith('+', s, int_lit(1)), u, Ret(UNIT_LIT)))


def duplicate_tree():
    x = Var('x', INT)
    return Call('read', UNIT_LIT, x,
                Call('write', x, u, Call('write', x, Var('u2', UNIT), Ret(UNIT_LIT))))


def rollback_tree():
    """get, read, put (x + y), get, write (z + 1), put x"""
    x, y, z = Var('x', INT), Var('y', INT), Var('z', INT)
    return Call('get', UNIT_LIT, x,
           Call('read', UNIT_LIT, y,
           Call('put', Arith('+', x, y), u,
           Call('get', UNIT_LIT, z,
           Call('write', Arith('+', z, int_lit(1)), Var('u2', UNIT),
           Call('put', x, Var('u3', UNIT), Ret(UNIT_LIT)))))))


# =============================================================================
# Runners
# =============================================================================

def test_ret_leaves_effects_untouched():
    m = comp_ret(int_lit(5))
    assert m == Ret(int_lit(5))
    assert run_state(m, 2) == (5, 2)
    assert run_nd(m) == {5}


def test_run_state_stmod():
    result = run_state(stmod_tree(), 4)
    print(f"\n  stmod from 4: {result}")
    assert result == (None, 5)


def test_run_io_duplicate():
    value, events = run_io(duplicate_tree(), [7])
    assert value is None
    assert events == (CtorVal('In', (7,)), CtorVal('Out', (7,)), CtorVal('Out', (7,)))


def test_run_io_exhausted_input():
    with pytest.raises(InputExhausted):
        run_io(duplicate_tree(), [])


def test_run_iost_rollback():
    result = run_iost(rollback_tree(), 3, [4])
    assert result == (None, 3, (CtorVal('In', (4,)), CtorVal('Out', (8,))))


def test_run_nd_collects_non_failing_outcomes():
    b, c = Var('b', BOOL), Var('c', BOOL)
    v = Var('v', VOID)
    tree = Call('choice', UNIT_LIT, b,
                Ite(b, Ret(int_lit(1)),
                    Call('choice', UNIT_LIT, c,
                         Ite(c, Ret(int_lit(2)), Call('fail', UNIT_LIT, v, Ret(int_lit(0)))))))
    assert run_nd(tree) == frozenset({1, 2})


def test_run_exc_stops_at_first_throw():
    v = Var('v', VOID)
    tree = Call('throw', int_lit(3), v, Call('throw', int_lit(4), Var('w', VOID), Ret(int_lit(0))))
    assert run_exc(tree) == SumVal('r', 3)
    assert run_exc(Ret(int_lit(9))) == SumVal('l', 9)


def test_run_pure_rejects_operations():
    with pytest.raises(UnhandledOp):
        run_pure(stmod_tree())


def test_run_genrec_answers_calls():
    n = Var('n', INT)
    r = Var('r', INT)
    body = Call('call', n, r, Ret(Arith('+', r, int_lit(1))))
    assert run_genrec(body, lambda v: v * 2, {'n': 3}) == 7
    with pytest.raises(NonTermination):
        run_genrec(body, lambda v: v, {'n': 3}, max_depth=0)


# =============================================================================
# Typing
# =============================================================================

def test_comp_type_and_ops():
    assert comp_type(stmod_tree(), st_sig(INT)) == UNIT
    assert comp_ops(rollback_tree()) == frozenset({'get', 'put', 'read', 'write'})
    assert comp_type(rollback_tree(), iost_sig()) == UNIT


def test_comp_type_rejects_unknown_operation():
    with pytest.raises(UnhandledOp):
        comp_type(stmod_tree(), io_sig())


def test_comp_type_rejects_bad_argument():
    bad = Call('put', UNIT_LIT, u, Ret(UNIT_LIT))
    with pytest.raises(TypingError):
        comp_type(bad, st_sig(INT))


def test_void_branch_joins_with_value_branch():
    b = Var('b', BOOL)
    v = Var('v', VOID)
    throw = Call('throw', int_lit(0), v, Ret(v))
    assert comp_type(throw, exc_sig(INT)) == VOID
    assert comp_type(Ite(b, Ret(int_lit(1)), throw), exc_sig(INT)) == INT
    assert comp_type(absurd(throw, INT), exc_sig(INT)) == INT
    mismatched = Ite(b, Ret(int_lit(1)), Ret(UNIT_LIT))
    with pytest.raises(TypingError):
        comp_type(mismatched, exc_sig(INT))


def test_generic_effect_round_trip():
    sig = st_sig(INT)
    s = Var('s', INT)
    k = Call('put', Arith('+', s, int_lit(1)), u, Ret(UNIT_LIT))
    rebuilt = op_of_gen(sig.op('get'), UNIT_LIT, s, k)
    assert run_state(rebuilt, 2) == run_state(Call('get', UNIT_LIT, s, k), 2) == (None, 3)
    assert run_state(gen_of_op(sig.op('get'), UNIT_LIT), 6) == (6, 6)


def test_let_pure_is_transparent():
    a = Var('a', INT)
    tree = LetPure(a, int_lit(2), Call('put', Arith('*', a, a), u, Ret(a)))
    assert run_state(tree, 0) == (2, 4)


# =============================================================================
# Monad laws, checked through the runners
# =============================================================================

DOM = DomainConfig(int_lo=0, int_hi=1, list_bound=1)
X = Var('x', INT)
ST_TREES = list(enumerate_trees(st_sig(INT), INT, small_values(DOM), 2))
ST_CONTS = list(enumerate_trees(st_sig(INT), INT, small_values(DOM), 1, (X,)))


def test_enumeration_is_deterministic():
    again = list(enumerate_trees(st_sig(INT), INT, small_values(DOM), 2))
    assert again == ST_TREES
    assert all(comp_type(m, st_sig(INT)) == INT for m in ST_TREES)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(ST_TREES), st.integers(0, 1))
def test_bind_right_unit(m, s0):
    assert run_state(comp_bind(m, X, Ret(X)), s0) == run_state(m, s0)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(ST_TREES), st.sampled_from(ST_CONTS), st.sampled_from(ST_CONTS), st.integers(0, 1))
def test_bind_associative(m, f, g, s0):
    left = comp_bind(comp_bind(m, X, f), X, g)
    right = comp_bind(m, X, comp_bind(f, X, g))
    assert run_state(left, s0) == run_state(right, s0)


B = Var('b', BOOL)
ND_CONTS = list(enumerate_trees(nd_sig(), BOOL, small_values(DOM), 2, (B,)))


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(ND_CONTS), st.booleans())
def test_nd_left_unit(k, v):
    assert run_nd(comp_bind(Ret(value_term(v, BOOL)), B, k)) == run_nd(k, {'b': v})
