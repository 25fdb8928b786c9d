#!/usr/bin/env python3
"""
Logic Tests - Typing, substitution, normalization and finite evaluation
"""

import sys
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from core.errors import ResourceLimit, TypingError
from core.logic import (
    BOOL, BOT, INT, TOP, UNIT, Append, Arith, Atom, BoolOp, Cmp, Conj, Cons, Env, Eq, Forall, Implies,
    ListLit, ListOp, ListTy, Neg, PairTy, PApply, Pair, PredLam, PredVar, PRedex, SumTy, Var,
    alpha_equal, beta, carrier, carrier_size, eval_formula, eval_term, int_lit, normalize,
    normalize_term, papply, pred_tables, subst_terms, typecheck,
)
from core.pretty import format_formula, format_term
from utils.config import DomainConfig


SMALL = DomainConfig(int_lo=-3, int_hi=3, list_bound=2)
x = Var('x', INT)
y = Var('y', INT)


# =============================================================================
# Typing and evaluation
# =============================================================================

def test_typecheck_rejects_mixed_arithmetic():
    with pytest.raises(TypingError):
        typecheck(Arith('+', x, Var('b', BOOL)))


def test_division_by_zero_is_zero():
    assert eval_term(Arith('div', int_lit(5), int_lit(0))) == 0
    assert eval_term(Arith('mod', int_lit(5), int_lit(0))) == 0


@pytest.mark.parametrize('a, b, q, r', [(-7, 2, -4, 1), (7, -2, -3, 1), (-7, -2, 4, 1), (7, 2, 3, 1)])
def test_division_is_euclidean(a, b, q, r):
    assert eval_term(Arith('div', int_lit(a), int_lit(b))) == q
    assert eval_term(Arith('mod', int_lit(a), int_lit(b))) == r


@given(st.integers(-20, 20), st.integers(-6, 6).filter(bool))
def test_division_matches_smtlib_definition(a, b):
    """a = b * (a div b) + (a mod b) with 0 <= a mod b < |b|"""
    q = eval_term(Arith('div', int_lit(a), int_lit(b)))
    r = eval_term(Arith('mod', int_lit(a), int_lit(b)))
    assert a == b * q + r
    assert 0 <= r < abs(b)
    assert normalize_term(Arith('div', int_lit(a), int_lit(b))) == int_lit(q)


def test_head_of_nil_is_default():
    assert eval_term(ListOp('head', ListLit((), INT))) == 0


def test_predicate_table_lookup():
    """∀x. x < 2 ⇒ p x holds exactly when the table covers the small part of the carrier"""
    p = PredVar('p', (INT,))
    f = Forall(x, Implies(Atom(Cmp('<', x, int_lit(2))), papply(p, x)))
    dom = DomainConfig(int_lo=0, int_hi=3)
    assert eval_formula(f, Env(preds={'p': frozenset({(0,), (1,)})}), dom)
    assert not eval_formula(f, Env(preds={'p': frozenset({(0,)})}), dom)


def test_carrier_sizes():
    dom = DomainConfig(int_lo=0, int_hi=1, list_bound=2)
    assert carrier_size(ListTy(INT), dom) == 1 + 2 + 4
    assert carrier_size(SumTy(BOOL, UNIT), dom) == 3
    assert len(carrier(PairTy(INT, BOOL), dom)) == 4
    assert carrier(ListTy(INT), dom)[0] == ()


def test_pred_tables_respect_cap():
    p = PredVar('p', (INT,))
    tables = list(pred_tables(p, DomainConfig(int_lo=0, int_hi=2)))
    assert len(tables) == 8
    assert tables[0] == frozenset()
    with pytest.raises(ResourceLimit):
        list(pred_tables(p, DomainConfig(int_lo=0, int_hi=9, pred_cap=6)))


# =============================================================================
# Substitution
# =============================================================================

def test_substitution_avoids_capture():
    f = Forall(y, Atom(Cmp('<', x, y)))
    g = subst_terms(f, {'x': y})
    print(f"\n  substituted: {g}")
    assert g.fv == frozenset({'y'})
    assert g.var.name != 'y'


def test_beta_reduces_predicate_lambda():
    lam = PredLam((y,), Atom(Cmp('<=', int_lit(0), y)))
    assert normalize(beta(lam, (int_lit(4),))) == TOP
    assert normalize(PRedex(lam, (int_lit(-1),))) != TOP


def test_alpha_equivalence():
    p = PredVar('p', (INT,))
    assert alpha_equal(Forall(x, PApply(p, (x,))), Forall(y, PApply(p, (y,))))
    assert not alpha_equal(Forall(x, PApply(p, (x,))), Forall(y, PApply(p, (int_lit(0),))))


# =============================================================================
# Normalization
# =============================================================================

def test_normalize_folds_constants_and_lists():
    assert normalize_term(Arith('*', int_lit(3), int_lit(4))) == int_lit(12)
    lst = Append(ListLit((int_lit(1),), INT), Cons(int_lit(2), ListLit((), INT)))
    assert normalize_term(lst) == ListLit((int_lit(1), int_lit(2)), INT)
    assert normalize_term(ListOp('length', lst)) == int_lit(2)


def test_normalize_one_point_rule():
    p = PredVar('p', (INT,))
    f = Forall(x, Implies(Eq(x, y), PApply(p, (x,))))
    assert normalize(f) == PApply(p, (y,))


def test_normalize_decomposes_pairs():
    f = Eq(Pair(x, int_lit(1)), Pair(y, int_lit(2)))
    assert normalize(f) == BOT


def test_terms_print_in_lambda_notation():
    t = Arith('+', Var('x#3', INT), int_lit(1))
    assert format_term(t) == "x + 1"


def test_normalize_drops_trivial_implication():
    p = PredVar('p', (INT,))
    f = Forall(x, Implies(Conj((PApply(p, (x,)), Atom(Cmp('<', x, y)))), PApply(p, (x,))))
    assert normalize(f) == TOP


@st.composite
def int_terms(draw, depth=2):
    if depth == 0 or draw(st.booleans()):
        return draw(st.sampled_from([x, y, int_lit(draw(st.integers(-3, 3)))]))
    op = draw(st.sampled_from(['+', '-', '*', 'div', 'mod']))
    return Arith(op, draw(int_terms(depth - 1)), draw(int_terms(depth - 1)))


@st.composite
def formulas(draw, depth=2):
    if depth == 0 or draw(st.booleans()):
        op = draw(st.sampled_from(['=', '<>', '<', '<=']))
        left, right = draw(int_terms()), draw(int_terms())
        if draw(st.booleans()):
            return Eq(left, right)
        return Atom(Cmp(op, left, right))
    kind = draw(st.sampled_from(['and', 'implies', 'not', 'forall', 'bool']))
    if kind == 'and':
        return Conj((draw(formulas(depth - 1)), draw(formulas(depth - 1))))
    if kind == 'implies':
        return Implies(draw(formulas(depth - 1)), draw(formulas(depth - 1)))
    if kind == 'not':
        return Neg(draw(formulas(depth - 1)))
    if kind == 'bool':
        inner = Cmp('<', draw(int_terms()), draw(int_terms()))
        return Atom(BoolOp('or', inner, Cmp('=', x, draw(int_terms()))))
    return Forall(y, draw(formulas(depth - 1)))


@settings(max_examples=150, deadline=None)
@given(formulas(), st.integers(-3, 3), st.integers(-3, 3))
def test_normalize_preserves_evaluation(f, xv, yv):
    env = Env(vars={'x': xv, 'y': yv})
    assert eval_formula(f, env, SMALL) == eval_formula(normalize(f), env, SMALL)


@settings(max_examples=150, deadline=None)
@given(formulas())
def test_normalize_is_idempotent(f):
    once = normalize(f)
    assert alpha_equal(normalize(once), once), format_formula(once)
