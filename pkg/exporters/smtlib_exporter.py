#!/usr/bin/env python3
"""
SMT-LIB Exporter - Emit obligations as SMT-LIB 2.6 satisfiability queries

Each obligation f becomes a query asserting ¬f: predicate and function
variables in prenex universal position turn into uninterpreted functions
(unsat means f holds for all of them), lists, pairs, sums and event types
become algebraic datatypes, and integers are unbounded. Output is
byte-stable for a fixed input.
"""

import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

# Handle imports
try:
    from core.errors import UnsupportedShape
    from core.logic import (
        Append, Apply, Arith, Atom, BoolOp, BoolTy, Bot, CaseSum, Cmp, Conj, Cons, Ctor, Disj,
        Elem, EnumTy, Eq, Exists, Forall, ForallFun, ForallPred, Formula, FunDef, FunSym,
        Implies, Inj, IntTy, IteT, ListLit, ListOp, ListTy, Lit, Neg, NotT, PApply, PRedex,
        Pair, PairTy, PredVar, Proj, SumTy, Term, Top, Ty, UnitTy, Var, VoidTy,
        beta, collect_nodes,
    )
    from utils.config import Config
except ModuleNotFoundError:
    import sys
    from pathlib import Path as PathLib
    sys.path.insert(0, str(PathLib(__file__).parent.parent))
    from core.errors import UnsupportedShape
    from core.logic import (
        Append, Apply, Arith, Atom, BoolOp, BoolTy, Bot, CaseSum, Cmp, Conj, Cons, Ctor, Disj,
        Elem, EnumTy, Eq, Exists, Forall, ForallFun, ForallPred, Formula, FunDef, FunSym,
        Implies, Inj, IntTy, IteT, ListLit, ListOp, ListTy, Lit, Neg, NotT, PApply, PRedex,
        Pair, PairTy, PredVar, Proj, SumTy, Term, Top, Ty, UnitTy, Var, VoidTy,
        beta, collect_nodes,
    )
    from utils.config import Config

logger = logging.getLogger(__name__)


def _sym(name: str) -> str:
    """SMT symbol for an internal name (x#12 -> x_12)"""
    return name.replace('#', '_').replace("'", '_')


class _Encoder:
    """Per-query state: declared sorts, helper functions and symbols"""

    def __init__(self):
        self.sort_decls: List[str] = []
        self.sorts_done: set = set()
        self.helpers: List[str] = []
        self.helpers_done: set = set()
        self.nonlinear = False

    # ---- sorts ----

    def sort(self, ty: Ty) -> str:
        if isinstance(ty, IntTy):
            return 'Int'
        if isinstance(ty, BoolTy):
            return 'Bool'
        if isinstance(ty, UnitTy):
            self._declare('Unit', '(declare-datatype Unit ((unit)))')
            return 'Unit'
        if isinstance(ty, VoidTy):
            self._declare('Void', '(declare-sort Void 0)')
            return 'Void'
        if isinstance(ty, PairTy):
            a, b = self.sort(ty.fst), self.sort(ty.snd)
            name = f"Pair_{a}_{b}"
            self._declare(name, f"(declare-datatype {name} ((mk_{name} (fst_{name} {a}) (snd_{name} {b}))))")
            return name
        if isinstance(ty, SumTy):
            a, b = self.sort(ty.left), self.sort(ty.right)
            name = f"Sum_{a}_{b}"
            self._declare(name, f"(declare-datatype {name} ((inl_{name} (left_{name} {a})) "
                                f"(inr_{name} (right_{name} {b}))))")
            return name
        if isinstance(ty, ListTy):
            a = self.sort(ty.elem)
            name = f"List_{a}"
            self._declare(name, f"(declare-datatype {name} ((nil_{name}) "
                                f"(cons_{name} (head_{name} {a}) (tail_{name} {name}))))")
            return name
        if isinstance(ty, EnumTy):
            ctors = []
            for ctor, args in ty.ctors:
                fields = " ".join(f"({ctor}_{i} {self.sort(arg)})" for i, arg in enumerate(args, start=1))
                ctors.append(f"({ctor}{' ' + fields if fields else ''})")
            self._declare(ty.name, f"(declare-datatype {ty.name} ({' '.join(ctors)}))")
            return ty.name
        raise UnsupportedShape(f"no SMT sort for {ty}")

    def _declare(self, name: str, text: str):
        if name not in self.sorts_done:
            self.sorts_done.add(name)
            self.sort_decls.append(text)

    def _helper(self, name: str, text: str):
        if name not in self.helpers_done:
            self.helpers_done.add(name)
            self.helpers.append(text)

    def list_fun(self, op: str, ty: ListTy) -> str:
        s = self.sort(ty)
        e = self.sort(ty.elem)
        name = f"{op}_{s}"
        if op == 'append':
            self._helper(name, f"(define-fun-rec {name} ((a {s}) (b {s})) {s} "
                               f"(ite ((_ is nil_{s}) a) b (cons_{s} (head_{s} a) ({name} (tail_{s} a) b))))")
        elif op == 'length':
            self._helper(name, f"(define-fun-rec {name} ((a {s})) Int "
                               f"(ite ((_ is nil_{s}) a) 0 (+ 1 ({name} (tail_{s} a)))))")
        elif op == 'elem':
            self._helper(name, f"(define-fun-rec {name} ((x {e}) (a {s})) Bool "
                               f"(ite ((_ is nil_{s}) a) false (or (= x (head_{s} a)) ({name} x (tail_{s} a)))))")
        return name

    # ---- terms ----

    def term(self, t: Term) -> str:
        if isinstance(t, Var):
            return _sym(t.name)
        if isinstance(t, Lit):
            if isinstance(t.lty, UnitTy):
                self.sort(t.lty)
                return 'unit'
            if isinstance(t.value, bool):
                return 'true' if t.value else 'false'
            return str(t.value) if t.value >= 0 else f"(- {-t.value})"
        if isinstance(t, Pair):
            return f"(mk_{self.sort(t.ty)} {self.term(t.fst)} {self.term(t.snd)})"
        if isinstance(t, Proj):
            s = self.sort(t.arg.ty)
            return f"({'fst' if t.index == 1 else 'snd'}_{s} {self.term(t.arg)})"
        if isinstance(t, Inj):
            s = self.sort(t.sty)
            return f"({'inl' if t.side == 'l' else 'inr'}_{s} {self.term(t.arg)})"
        if isinstance(t, CaseSum):
            s = self.sort(t.scrut.ty)
            scrut = self.term(t.scrut)
            left = f"(let (({_sym(t.lvar.name)} (left_{s} {scrut}))) {self.term(t.lbody)})"
            right = f"(let (({_sym(t.rvar.name)} (right_{s} {scrut}))) {self.term(t.rbody)})"
            return f"(ite ((_ is inl_{s}) {scrut}) {left} {right})"
        if isinstance(t, ListLit):
            s = self.sort(t.ty)
            text = f"nil_{s}"
            for item in reversed(t.items):
                text = f"(cons_{s} {self.term(item)} {text})"
            return text
        if isinstance(t, Cons):
            return f"(cons_{self.sort(t.ty)} {self.term(t.head)} {self.term(t.tail)})"
        if isinstance(t, Append):
            return f"({self.list_fun('append', t.ty)} {self.term(t.left)} {self.term(t.right)})"
        if isinstance(t, ListOp):
            s = self.sort(t.arg.ty)
            if t.op == 'length':
                return f"({self.list_fun('length', t.arg.ty)} {self.term(t.arg)})"
            return f"({t.op}_{s} {self.term(t.arg)})"
        if isinstance(t, Elem):
            return f"({self.list_fun('elem', t.lst.ty)} {self.term(t.item)} {self.term(t.lst)})"
        if isinstance(t, Ctor):
            self.sort(t.ety)
            if not t.args:
                return t.name
            return f"({t.name} {' '.join(self.term(a) for a in t.args)})"
        if isinstance(t, Arith):
            a, b = self.term(t.left), self.term(t.right)
            if t.op in ('+', '-'):
                return f"({t.op} {a} {b})"
            if t.op == '*':
                if not (isinstance(t.left, Lit) or isinstance(t.right, Lit)):
                    self.nonlinear = True
                return f"(* {a} {b})"
            if not isinstance(t.right, Lit):
                self.nonlinear = True
            return f"(ite (= {b} 0) 0 ({t.op} {a} {b}))"
        if isinstance(t, Cmp):
            a, b = self.term(t.left), self.term(t.right)
            if t.op == '<>':
                return f"(not (= {a} {b}))"
            return f"({t.op} {a} {b})"
        if isinstance(t, BoolOp):
            return f"({t.op} {self.term(t.left)} {self.term(t.right)})"
        if isinstance(t, NotT):
            return f"(not {self.term(t.arg)})"
        if isinstance(t, IteT):
            return f"(ite {self.term(t.cond)} {self.term(t.then)} {self.term(t.orelse)})"
        if isinstance(t, Apply):
            return f"({_sym(t.fn.name)} {self.term(t.arg)})"
        raise UnsupportedShape(f"no SMT encoding for term {type(t).__name__}")

    # ---- formulas ----

    def formula(self, f: Formula) -> str:
        if isinstance(f, Top):
            return 'true'
        if isinstance(f, Bot):
            return 'false'
        if isinstance(f, Conj):
            return f"(and {' '.join(self.formula(i) for i in f.items)})"
        if isinstance(f, Disj):
            return f"(or {' '.join(self.formula(i) for i in f.items)})"
        if isinstance(f, Implies):
            return f"(=> {self.formula(f.lhs)} {self.formula(f.rhs)})"
        if isinstance(f, Neg):
            return f"(not {self.formula(f.arg)})"
        if isinstance(f, Atom):
            return self.term(f.term)
        if isinstance(f, Eq):
            return f"(= {self.term(f.left)} {self.term(f.right)})"
        if isinstance(f, (Forall, Exists)):
            q = 'forall' if isinstance(f, Forall) else 'exists'
            return f"({q} (({_sym(f.var.name)} {self.sort(f.var.ty)})) {self.formula(f.body)})"
        if isinstance(f, PApply):
            if not f.args:
                return _sym(f.pred.name)
            return f"({_sym(f.pred.name)} {' '.join(self.term(a) for a in f.args)})"
        if isinstance(f, PRedex):
            return self.formula(beta(f.lam, f.args))
        if isinstance(f, (ForallPred, ForallFun)):
            raise UnsupportedShape("predicate or function quantifier below the prenex prefix")
        raise UnsupportedShape(f"no SMT encoding for formula {type(f).__name__}")


def _prenex(f: Formula) -> Tuple[List[PredVar], List[FunSym], Formula]:
    preds, funs = [], []
    while isinstance(f, (ForallPred, ForallFun)):
        if isinstance(f, ForallPred):
            preds.append(f.pred)
        else:
            funs.append(f.fn)
        f = f.body
    return preds, funs, f


class SMTLibExporter:
    """
    Write obligations as SMT-LIB 2.6 queries

    Args:
        header: Emit a comment header naming the obligation
    """

    def __init__(self, header: bool = True):
        self.header = header

    def emit(self, formula: Formula, definitions: Optional[Mapping[str, FunDef]] = None,
             name: Optional[str] = None) -> str:
        """
        Query whose unsat answer means formula is valid

        Raises:
            UnsupportedShape: A predicate quantifier outside the prenex prefix,
                or a free term variable
        """
        if formula.fv:
            raise UnsupportedShape(f"free variables {sorted(formula.fv)}")
        definitions = dict(definitions or {})
        preds, funs, body = _prenex(formula)
        enc = _Encoder()
        body_text = enc.formula(body)

        decls: List[str] = []
        for p in preds:
            args = " ".join(enc.sort(t) for t in p.arg_tys)
            decls.append(f"(declare-fun {_sym(p.name)} ({args}) Bool)")
        bound_funs = {fn.name for fn in funs}
        free_funs: Dict[str, FunSym] = {}
        for node in collect_nodes(body, lambda n: isinstance(n, Apply)):
            if node.fn.name not in bound_funs and node.fn.name not in definitions:
                free_funs.setdefault(node.fn.name, node.fn)
        for fn in list(funs) + [free_funs[k] for k in sorted(free_funs)]:
            decls.append(f"(declare-fun {_sym(fn.name)} ({enc.sort(fn.dom)}) {enc.sort(fn.cod)})")
        used = {node.fn.name for node in collect_nodes(body, lambda n: isinstance(n, Apply))}
        defs: List[str] = []
        for key in sorted(definitions):
            if key not in used:
                continue
            d = definitions[key]
            defs.append(f"(define-fun-rec {_sym(d.sym.name)} (({_sym(d.param.name)} {enc.sort(d.param.ty)})) "
                        f"{enc.sort(d.sym.cod)} {enc.term(d.body)})")

        logic = Config.SMT_LOGIC_NONLINEAR if enc.nonlinear else Config.SMT_LOGIC_LINEAR
        lines: List[str] = []
        if self.header:
            lines.append(f"; obligation {name or 'anonymous'}")
            lines.append("; unsat means the obligation holds for every interpretation")
        lines.append(f"(set-logic {logic})")
        lines += enc.sort_decls
        lines += decls
        lines += enc.helpers
        lines += defs
        lines.append(f"(assert (not {body_text}))")
        lines.append("(check-sat)")
        lines.append("(exit)")
        return "\n".join(lines) + "\n"

    def emit_obligation(self, ob) -> str:
        return self.emit(ob.formula, ob.definitions, ob.name)

    def save_all(self, obligations: Sequence, directory: Union[str, Path]) -> List[Path]:
        """
        Write one NAME.smt2 per obligation

        Obligations whose shape has no encoding are skipped with a warning.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for ob in obligations:
            try:
                text = self.emit_obligation(ob)
            except UnsupportedShape as e:
                logger.warning(f"{ob.name}: not exported to SMT-LIB ({e})")
                continue
            path = directory / f"{ob.name}{Config.SMT_FILE_SUFFIX}"
            path.write_text(text, encoding='utf-8')
            written.append(path)
        logger.info(f"Wrote {len(written)} SMT-LIB files to {directory}")
        return written


if __name__ == "__main__":
    from core.logic import INT, PredVar as PV
    x = Var('x', INT)
    p = PV('p', (INT,))
    f = ForallPred(p, Forall(x, Implies(PApply(p, (x,)), PApply(p, (x,)))))
    print(SMTLibExporter().emit(f, name='demo.1'))
