#!/usr/bin/env python3
"""
Specification Monad Tests - Monad laws, order, transformers and pre/post recognition

Laws are checked semantically: each equation becomes an equivalence
formula closed over its post and context binders and is decided over a
small finite domain.
"""

import sys
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from core.errors import ShapeMismatch
from core.logic import (
    INT, TOP, UNIT, UNIT_LIT, Apply, Atom, Cmp, Conj, Disj, EnumTy, Eq, Forall, FunSym, Implies, PApply,
    PredLam, Var, forall, int_lit,
)
from core.pretty import format_formula
from core.specmonads import (
    ExcT, SpecExpr, StT, UpdateT, apply_transformer, galois_pred_to_prepost, galois_prepost_to_pred,
    galois_prepost_to_wpure, monsp,
    monsp_side_condition, pred, prepost, prepost_view, PrePostPair, wexc, wfr, whist,
    whistst, wiost, wml, wpure, wpure_to_prepost, wst,
)
from prover.decide import Valid, decide
from utils.config import DomainConfig


TICK = EnumTy('Tick', (('Tick', ()),))
DOM = DomainConfig(int_lo=0, int_hi=1, list_bound=1, pred_cap=16)
x = Var('x', INT)
y = Var('y', INT)

MONADS = {
    'pure': lambda: wpure(),
    'st': lambda: wst(INT),
    'exc': lambda: wexc(INT),
    'ml': lambda: wml(INT, INT),
    'fr': lambda: wfr(TICK),
    'hist': lambda: whist(TICK),
    'histst': lambda: whistst(TICK),
    'iost': lambda: wiost(INT, TICK),
    'st-over-pure': lambda: apply_transformer(StT(INT), wpure()),
    'exc-over-st': lambda: apply_transformer(ExcT(INT), wst(INT)),
    'hist-over-st': lambda: apply_transformer(UpdateT(TICK, history=True), wst(INT)),
}


def assert_valid(formula):
    outcome = decide(formula, DOM)
    assert isinstance(outcome, Valid), f"{outcome}\n  {format_formula(formula)}"


def havoc(monad, ty, guard=None):
    """Any result and any extras; exceptional posts get every exception too"""
    shape = monad.shape(ty)
    parts = []
    for idx, post in enumerate(shape.posts):
        vs = [Var(f"v{idx}_{j}", t) for j, t in enumerate(post.arg_tys)]
        body = PApply(post, tuple(vs))
        if idx == 0 and guard is not None:
            body = Implies(Atom(Cmp('<=', guard, vs[0])), body)
        parts.append(forall(vs, body))
    return SpecExpr(shape, parts[0] if len(parts) == 1 else Conj(tuple(parts)))


# =============================================================================
# Monad laws
# =============================================================================

@pytest.mark.parametrize('key', sorted(MONADS))
def test_left_unit(key):
    M = MONADS[key]()
    f = havoc(M, INT, guard=x)
    for v in (0, 1):
        assert_valid(M.equiv(M.bind(M.ret(int_lit(v)), x, f), f.subst({'x': int_lit(v)})))


@pytest.mark.parametrize('key', sorted(MONADS))
def test_right_unit(key):
    M = MONADS[key]()
    for w in (havoc(M, INT), M.ret(int_lit(1))):
        assert_valid(M.equiv(M.bind(w, x, M.ret(x)), w))


@pytest.mark.parametrize('key', sorted(MONADS))
def test_associativity(key):
    M = MONADS[key]()
    w = havoc(M, INT)
    f = havoc(M, INT, guard=x)
    g = M.ret(Var('y', INT))
    left = M.bind(M.bind(w, x, f), y, g)
    right = M.bind(w, x, M.bind(f, y, g))
    assert_valid(M.equiv(left, right))


@pytest.mark.parametrize('key', sorted(MONADS))
def test_bind_is_monotonic(key):
    M = MONADS[key]()
    precise, loose = M.ret(int_lit(0)), havoc(M, INT)
    f = havoc(M, INT, guard=x)
    assert_valid(M.leq(precise, loose))
    assert_valid(M.leq(M.bind(precise, x, f), M.bind(loose, x, f)))


def test_state_transformer_matches_direct_descriptor():
    direct = wst(INT)
    layered = apply_transformer(StT(INT), wpure())
    w, f = havoc(direct, INT), havoc(direct, INT, guard=x)
    lw, lf = SpecExpr(layered.shape(INT), w.body), SpecExpr(layered.shape(INT), f.body)
    from_layers = layered.bind(lw, x, lf)
    assert_valid(direct.equiv(direct.bind(w, x, f), SpecExpr(direct.shape(INT), from_layers.body)))


def test_bind_rejects_mixed_monads():
    with pytest.raises(ShapeMismatch):
        wst(INT).bind(wpure().ret(int_lit(0)), x, wst(INT).ret(x))


def test_leq_rejects_different_shapes():
    with pytest.raises(ShapeMismatch):
        wpure().leq(wpure().ret(int_lit(0)), wpure().ret(UNIT_LIT))


# =============================================================================
# Golden specifications
# =============================================================================

def test_stmod_bind_golden():
    W = wst(INT)
    f = FunSym('f', INT, INT)
    get = SpecExpr(W.shape(INT), PApply(W.shape(INT).posts[0], (Var('s0', INT), Var('s0', INT))))
    put = SpecExpr(W.shape(UNIT), PApply(W.shape(UNIT).posts[0], (UNIT_LIT, Apply(f, x))))
    spec = W.bind(get, x, put).normalized()
    print(f"\n  stmod: {spec.pretty()}")
    assert spec.pretty() == "λp s0. p⟨*, f s0⟩"


def test_shapes_order_posts_before_context():
    assert [b.name for b in wst(INT).shape(INT).binders] == ['p', 's0']
    assert [b.name for b in wexc(INT).shape(INT).binders] == ['p', 'q']
    assert [b.name for b in wml(INT, INT).shape(INT).binders] == ['p', 'q', 's0']
    assert [b.name for b in wiost(INT).shape(UNIT).binders] == ['p', 's', 'h']


# =============================================================================
# Pred, PrePost, MonSP and their connections
# =============================================================================

def test_pred_left_unit():
    P = pred()
    f = SpecExpr(P.shape(INT), Atom(Cmp('<=', x, Var('y', INT))))
    bound = P.bind(P.ret(int_lit(1)), x, f)
    expected = f.subst({'x': int_lit(1)})
    assert_valid(Conj((P.leq(bound, expected), P.leq(expected, bound))))


def test_prepost_round_trip_is_weaker():
    a = Var('a', INT)
    for pp in (PrePostPair(TOP, PredLam((a,), Eq(a, int_lit(1)))),
               PrePostPair(Atom(Cmp('<', int_lit(1), int_lit(0))), PredLam((a,), TOP))):
        back = wpure_to_prepost(galois_prepost_to_wpure(pp))
        assert_valid(prepost().leq(pp, back))


def test_pred_survives_prepost_round_trip():
    P = pred()
    w = SpecExpr(P.shape(INT), Atom(Cmp('<=', int_lit(1), Var('y', INT))))
    back = galois_prepost_to_pred(galois_pred_to_prepost(w))
    assert_valid(Conj((P.leq(w, back), P.leq(back, w))))


def test_monsp_ret_meets_side_condition():
    assert_valid(monsp_side_condition(monsp().ret(int_lit(0))))


# =============================================================================
# Pre/post recognition
# =============================================================================

def test_prepost_view_of_guarded_spec():
    W = wpure()
    shape = W.shape(INT)
    p = shape.posts[0]
    w = SpecExpr(shape, Forall(x, Implies(Atom(Cmp('<=', int_lit(1), x)), PApply(p, (x,)))))
    view = prepost_view(w)
    assert view is not None
    assert view.pre == TOP
    assert set(view.posts) == {'p'}


def test_prepost_view_rejects_negative_occurrence():
    W = wpure()
    shape = W.shape(INT)
    p = shape.posts[0]
    w = SpecExpr(shape, Implies(PApply(p, (int_lit(0),)), PApply(p, (int_lit(1),))))
    assert prepost_view(w) is None
    assert not w.is_positive()


# =============================================================================
# Galois connection between PrePost and W^Pure
# =============================================================================

a = Var('a', INT)


@st.composite
def monotone_specs(draw, depth=2):
    """W^Pure specs whose post binder occurs only positively"""
    p = wpure().shape(INT).posts[0]

    def body(d):
        kind = draw(st.sampled_from(['at', 'from', 'const'] + (['and', 'or'] if d else [])))
        k = int_lit(draw(st.integers(0, 1)))
        if kind == 'at':
            return PApply(p, (k,))
        if kind == 'from':
            return Forall(a, Implies(Atom(Cmp('<=', k, a)), PApply(p, (a,))))
        if kind == 'const':
            return draw(st.sampled_from([TOP, Atom(Cmp('<', k, int_lit(1)))]))
        items = (body(d - 1), body(d - 1))
        return Conj(items) if kind == 'and' else Disj(items)

    return SpecExpr(wpure().shape(INT), body(depth))


@st.composite
def prepost_pairs(draw):
    k = int_lit(draw(st.integers(0, 1)))
    pre = draw(st.sampled_from([TOP, Atom(Cmp('<', k, int_lit(1))), Eq(k, int_lit(0))]))
    post = draw(st.sampled_from([TOP, Atom(Cmp('<=', k, a)), Eq(a, k)]))
    return PrePostPair(pre, PredLam((a,), post))


@settings(max_examples=40, deadline=None)
@given(prepost_pairs())
def test_prepost_is_below_its_round_trip(pp):
    assert_valid(prepost().leq(pp, wpure_to_prepost(galois_prepost_to_wpure(pp))))


@settings(max_examples=40, deadline=None)
@given(monotone_specs())
def test_round_trip_of_monotone_spec_is_below_it(w):
    assert_valid(wpure().leq(galois_prepost_to_wpure(wpure_to_prepost(w)), w))


@settings(max_examples=40, deadline=None)
@given(prepost_pairs(), monotone_specs())
def test_prepost_embedding_is_left_adjoint(pp, w):
    """α pp ≤ w exactly when pp ≤ γ w"""
    left = decide(wpure().leq(galois_prepost_to_wpure(pp), w), DOM)
    right = decide(prepost().leq(pp, wpure_to_prepost(w)), DOM)
    assert isinstance(left, Valid) == isinstance(right, Valid)


@settings(max_examples=40, deadline=None)
@given(prepost_pairs())
def test_pred_approximation_is_below_the_pair(pp):
    assert_valid(prepost().leq(galois_pred_to_prepost(galois_prepost_to_pred(pp)), pp))
