#!/usr/bin/env python3
"""
SMT-LIB Exporter Tests - Query layout, sorts, logic selection and file output
"""

import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from core.dijkstra import Obligation
from core.errors import UnsupportedShape
from core.logic import (
    INT, Append, Arith, Atom, Cmp, Eq, Forall, ForallPred, Implies, ListLit, ListOp, ListTy, PApply,
    PredVar, Var, eval_term, int_lit,
)
from exporters.smtlib_exporter import SMTLibExporter
from prover.decide import Valid, decide
from utils.config import DomainConfig


x = Var('x', INT)
p = PredVar('p', (INT,))


def test_query_layout():
    f = ForallPred(p, Forall(x, Implies(PApply(p, (x,)), PApply(p, (x,)))))
    text = SMTLibExporter().emit(f, name='demo.1')
    print(f"\n{text}")
    lines = text.splitlines()
    assert lines[0] == "; obligation demo.1"
    assert "(set-logic UFDTLIA)" in lines
    assert "(declare-fun p (Int) Bool)" in lines
    assert lines[-3].startswith("(assert (not (forall ((x Int))")
    assert lines[-2:] == ["(check-sat)", "(exit)"]


def test_header_can_be_dropped():
    text = SMTLibExporter(header=False).emit(Forall(x, Atom(Cmp('<=', x, x))))
    assert text.startswith("(set-logic UFDTLIA)")


def test_nonlinear_arithmetic_switches_logic():
    square = Forall(x, Atom(Cmp('<=', int_lit(0), Arith('*', x, x))))
    assert "(set-logic UFDTNIA)" in SMTLibExporter().emit(square)
    scaled = Forall(x, Atom(Cmp('<=', x, Arith('*', int_lit(2), x))))
    assert "(set-logic UFDTLIA)" in SMTLibExporter().emit(scaled)


def test_division_by_zero_is_guarded():
    f = Forall(x, Atom(Cmp('<=', Arith('div', x, int_lit(0)), x)))
    assert "(ite (= 0 0) 0 (div x 0))" in SMTLibExporter().emit(f)


def test_lists_become_datatypes():
    ys = Var('ys', ListTy(INT))
    f = Forall(ys, Atom(Cmp('<=', ListOp('length', ys),
                            ListOp('length', Append(ListLit((int_lit(1),), INT), ys)))))
    text = SMTLibExporter().emit(f)
    assert "(declare-datatype List_Int ((nil_List_Int) (cons_List_Int (head_List_Int Int) (tail_List_Int List_Int))))" in text
    assert "define-fun-rec length_List_Int" in text
    assert "define-fun-rec append_List_Int" in text


def test_free_variables_are_rejected():
    with pytest.raises(UnsupportedShape):
        SMTLibExporter().emit(Atom(Cmp('<', x, int_lit(1))))


def test_nested_predicate_quantifier_is_rejected():
    nested = Forall(x, ForallPred(p, PApply(p, (x,))))
    with pytest.raises(UnsupportedShape):
        SMTLibExporter().emit(nested)


def test_output_is_byte_stable():
    f = ForallPred(p, Forall(x, Implies(PApply(p, (x,)), PApply(p, (Arith('+', x, int_lit(0)),)))))
    assert SMTLibExporter().emit(f, name='a.1') == SMTLibExporter().emit(f, name='a.1')


def test_save_all_skips_unsupported(tmp_path):
    good = Obligation('root', Forall(x, Atom(Cmp('<=', x, x))), name='main.1')
    bad = Obligation('root', Forall(x, ForallPred(p, PApply(p, (x,)))), name='main.2')
    written = SMTLibExporter().save_all([good, bad], tmp_path / 'smt')
    assert [path.name for path in written] == ['main.1.smt2']
    assert written[0].read_text(encoding='utf-8').endswith("(check-sat)\n(exit)\n")


def smt_int(n):
    return str(n) if n >= 0 else f"(- {-n})"


@pytest.mark.parametrize('a, b', [(7, -2), (-7, 2), (-7, -2), (7, 2)])
def test_division_agrees_with_decider(a, b):
    """The exported query and the decider read div and mod the same way"""
    q, r = Var('q', INT), Var('r', INT)
    div, mod = Arith('div', int_lit(a), int_lit(b)), Arith('mod', int_lit(a), int_lit(b))
    expected_q, expected_r = eval_term(div), eval_term(mod)
    assert a == b * expected_q + expected_r and 0 <= expected_r < abs(b)
    f = Forall(q, Implies(Eq(q, div), Eq(q, int_lit(expected_q))))
    assert isinstance(decide(f, DomainConfig(int_lo=-8, int_hi=8)), Valid)
    text = SMTLibExporter().emit(Forall(r, Implies(Eq(r, mod), Eq(r, int_lit(expected_r)))))
    assert f"(mod {smt_int(a)} {smt_int(b)})" in text
