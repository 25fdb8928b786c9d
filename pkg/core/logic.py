#!/usr/bin/env python3
"""
Logic - Types, terms and formulas of the verifier, with typing,
substitution, normalization and evaluation over finite carriers

Every symbolic specification and verification condition bottoms out here.
Terms and formulas are immutable dataclasses; derived data (types, free
variables) is cached on the node the first time it is requested.
"""

import itertools
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

# Handle imports
try:
    from core.errors import CarrierTooLarge, ResourceLimit, TypingError, UnboundVariable
    from utils.config import Config, DomainConfig
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core.errors import CarrierTooLarge, ResourceLimit, TypingError, UnboundVariable
    from utils.config import Config, DomainConfig

logger = logging.getLogger(__name__)


# =============================================================================
# Types
# =============================================================================

class Ty:
    """Base class of value types"""


@dataclass(frozen=True)
class UnitTy(Ty):
    def __str__(self):
        return 'unit'


@dataclass(frozen=True)
class BoolTy(Ty):
    def __str__(self):
        return 'bool'


@dataclass(frozen=True)
class IntTy(Ty):
    def __str__(self):
        return 'int'


@dataclass(frozen=True)
class VoidTy(Ty):
    """The empty type, output of throw and fail"""

    def __str__(self):
        return 'void'


@dataclass(frozen=True)
class PairTy(Ty):
    fst: Ty
    snd: Ty

    def __str__(self):
        return f"({self.fst} & {self.snd})"


@dataclass(frozen=True)
class SumTy(Ty):
    left: Ty
    right: Ty

    def __str__(self):
        return f"({self.left} + {self.right})"


@dataclass(frozen=True)
class ListTy(Ty):
    elem: Ty

    def __str__(self):
        return f"list {self.elem}"


@dataclass(frozen=True)
class EnumTy(Ty):
    """
    Named enumeration; constructors may carry arguments (events: In of I | Out of O)

    Attributes:
        name: Type name
        ctors: ((constructor name, argument types), ...)
    """
    name: str
    ctors: Tuple[Tuple[str, Tuple[Ty, ...]], ...]

    def __post_init__(self):
        names = [c for c, _ in self.ctors]
        if not names:
            raise TypingError(f"enum {self.name}", "at least one constructor", "none")
        if len(set(names)) != len(names):
            raise TypingError(f"enum {self.name}", "distinct constructors", ", ".join(names))

    def ctor_args(self, ctor: str) -> Tuple[Ty, ...]:
        for name, args in self.ctors:
            if name == ctor:
                return args
        raise TypingError(f"constructor {ctor}", f"a constructor of {self.name}", ctor)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class FunTy(Ty):
    dom: Ty
    cod: Ty

    def __str__(self):
        return f"({self.dom} -> {self.cod})"


UNIT = UnitTy()
BOOL = BoolTy()
INT = IntTy()
VOID = VoidTy()


def event_type(input_ty: Ty = INT, output_ty: Ty = INT) -> EnumTy:
    """The event type: In of I | Out of O"""
    return EnumTy('event', (('In', (input_ty,)), ('Out', (output_ty,))))


def tuple_type(tys: Sequence[Ty]) -> Ty:
    """Right-nested pair type; unit when empty"""
    if not tys:
        return UNIT
    result = tys[-1]
    for ty in reversed(tys[:-1]):
        result = PairTy(ty, result)
    return result


# =============================================================================
# Values
# =============================================================================
# unit -> None, bool -> bool, int -> int, pair -> 2-tuple, list -> tuple,
# sum -> SumVal, enum -> CtorVal, function tables -> dict

@dataclass(frozen=True)
class SumVal:
    side: str    # 'l' | 'r'
    value: object


@dataclass(frozen=True)
class CtorVal:
    name: str
    args: tuple = ()


def default_value(ty: Ty):
    """Value used for head of an empty list and out-of-table lookups"""
    if isinstance(ty, UnitTy):
        return None
    if isinstance(ty, BoolTy):
        return False
    if isinstance(ty, IntTy):
        return 0
    if isinstance(ty, PairTy):
        return (default_value(ty.fst), default_value(ty.snd))
    if isinstance(ty, SumTy):
        return SumVal('l', default_value(ty.left))
    if isinstance(ty, ListTy):
        return ()
    if isinstance(ty, EnumTy):
        name, args = ty.ctors[0]
        return CtorVal(name, tuple(default_value(a) for a in args))
    return None


# =============================================================================
# Fresh names
# =============================================================================

_fresh_counter = itertools.count(1)


def base_name(name: str) -> str:
    return name.split('#', 1)[0]


def fresh_name(base: str) -> str:
    return f"{base_name(base)}#{next(_fresh_counter)}"


# =============================================================================
# Node machinery
# =============================================================================

def _map_children(node, fn):
    """Rebuild node with fn applied to every child listed in _children"""
    changes = {}
    for name in node._children:
        value = getattr(node, name)
        if isinstance(value, tuple):
            new = tuple(fn(v) for v in value)
            if any(a is not b for a, b in zip(new, value)):
                changes[name] = new
        else:
            new = fn(value)
            if new is not value:
                changes[name] = new
    return replace(node, **changes) if changes else node


def _iter_children(node):
    for name in node._children:
        value = getattr(node, name)
        if isinstance(value, tuple):
            yield from value
        else:
            yield value


class Node:
    """Shared behaviour of terms and formulas"""
    _children: Tuple[str, ...] = ()

    @cached_property
    def fv(self) -> FrozenSet[str]:
        """Free term-variable names"""
        result = frozenset()
        for child in _iter_children(self):
            result |= child.fv
        return result

    @cached_property
    def preds(self) -> FrozenSet[str]:
        """Free predicate-variable names"""
        result = frozenset()
        for child in _iter_children(self):
            result |= child.preds
        return result

    @cached_property
    def funs(self) -> FrozenSet[str]:
        """Free function-symbol names"""
        result = frozenset()
        for child in _iter_children(self):
            result |= child.funs
        return result

    @cached_property
    def size(self) -> int:
        return 1 + sum(child.size for child in _iter_children(self))


# =============================================================================
# Terms
# =============================================================================

class Term(Node):

    @cached_property
    def ty(self) -> Ty:
        return self._infer()

    def _infer(self) -> Ty:
        raise NotImplementedError


@dataclass(frozen=True)
class FunSym:
    """Uninterpreted (or defined) first-order function symbol"""
    name: str
    dom: Ty
    cod: Ty

    @property
    def ty(self) -> FunTy:
        return FunTy(self.dom, self.cod)


@dataclass(frozen=True)
class Var(Term):
    name: str
    vty: Ty

    def _infer(self):
        return self.vty

    @cached_property
    def fv(self):
        return frozenset([self.name])


@dataclass(frozen=True)
class Lit(Term):
    """unit / bool / int literal"""
    value: object
    lty: Ty

    def _infer(self):
        return self.lty


@dataclass(frozen=True)
class Pair(Term):
    fst: Term
    snd: Term
    _children = ('fst', 'snd')

    def _infer(self):
        return PairTy(self.fst.ty, self.snd.ty)


@dataclass(frozen=True)
class Proj(Term):
    index: int    # 1 | 2
    arg: Term
    _children = ('arg',)

    def _infer(self):
        ty = self.arg.ty
        if not isinstance(ty, PairTy):
            raise TypingError(f"proj{self.index}", "a pair", ty)
        return ty.fst if self.index == 1 else ty.snd


@dataclass(frozen=True)
class Inj(Term):
    side: str     # 'l' | 'r'
    arg: Term
    sty: SumTy
    _children = ('arg',)

    def _infer(self):
        expected = self.sty.left if self.side == 'l' else self.sty.right
        if self.arg.ty != expected:
            raise TypingError(f"in{self.side}", expected, self.arg.ty)
        return self.sty


@dataclass(frozen=True)
class CaseSum(Term):
    scrut: Term
    lvar: Var
    lbody: Term
    rvar: Var
    rbody: Term
    _children = ('scrut', 'lbody', 'rbody')

    def _infer(self):
        ty = self.scrut.ty
        if not isinstance(ty, SumTy):
            raise TypingError("case", "a sum", ty)
        if self.lvar.ty != ty.left or self.rvar.ty != ty.right:
            raise TypingError("case binders", ty, f"{self.lvar.ty} + {self.rvar.ty}")
        if self.lbody.ty != self.rbody.ty:
            raise TypingError("case branches", self.lbody.ty, self.rbody.ty)
        return self.lbody.ty

    @cached_property
    def fv(self):
        return (self.scrut.fv | (self.lbody.fv - {self.lvar.name})
                | (self.rbody.fv - {self.rvar.name}))


@dataclass(frozen=True)
class ListLit(Term):
    """List literal; the empty literal is nil"""
    items: Tuple[Term, ...]
    elem_ty: Ty
    _children = ('items',)

    def _infer(self):
        for item in self.items:
            if item.ty != self.elem_ty:
                raise TypingError("list literal", self.elem_ty, item.ty)
        return ListTy(self.elem_ty)


@dataclass(frozen=True)
class Cons(Term):
    head: Term
    tail: Term
    _children = ('head', 'tail')

    def _infer(self):
        expected = ListTy(self.head.ty)
        if self.tail.ty != expected:
            raise TypingError("cons", expected, self.tail.ty)
        return expected


@dataclass(frozen=True)
class Append(Term):
    left: Term
    right: Term
    _children = ('left', 'right')

    def _infer(self):
        if not isinstance(self.left.ty, ListTy):
            raise TypingError("append", "a list", self.left.ty)
        if self.left.ty != self.right.ty:
            raise TypingError("append", self.left.ty, self.right.ty)
        return self.left.ty


@dataclass(frozen=True)
class ListOp(Term):
    """head / tail / length of a list"""
    op: str
    arg: Term
    _children = ('arg',)

    def _infer(self):
        ty = self.arg.ty
        if not isinstance(ty, ListTy):
            raise TypingError(self.op, "a list", ty)
        return {'head': ty.elem, 'tail': ty, 'length': INT}[self.op]


@dataclass(frozen=True)
class Elem(Term):
    """List membership, boolean-valued"""
    item: Term
    lst: Term
    _children = ('item', 'lst')

    def _infer(self):
        if self.lst.ty != ListTy(self.item.ty):
            raise TypingError("elem", ListTy(self.item.ty), self.lst.ty)
        return BOOL


@dataclass(frozen=True)
class Ctor(Term):
    name: str
    args: Tuple[Term, ...]
    ety: EnumTy
    _children = ('args',)

    def _infer(self):
        expected = self.ety.ctor_args(self.name)
        found = tuple(a.ty for a in self.args)
        if found != expected:
            raise TypingError(f"constructor {self.name}", expected, found)
        return self.ety


ARITH_OPS = ('+', '-', '*', 'div', 'mod')
CMP_OPS = ('=', '<>', '<', '<=')


@dataclass(frozen=True)
class Arith(Term):
    op: str
    left: Term
    right: Term
    _children = ('left', 'right')

    def _infer(self):
        for side in (self.left, self.right):
            if side.ty != INT:
                raise TypingError(f"arithmetic '{self.op}'", INT, side.ty)
        return INT


@dataclass(frozen=True)
class Cmp(Term):
    op: str
    left: Term
    right: Term
    _children = ('left', 'right')

    def _infer(self):
        if self.op in ('<', '<='):
            for side in (self.left, self.right):
                if side.ty != INT:
                    raise TypingError(f"comparison '{self.op}'", INT, side.ty)
        elif self.left.ty != self.right.ty:
            raise TypingError(f"comparison '{self.op}'", self.left.ty, self.right.ty)
        return BOOL


@dataclass(frozen=True)
class BoolOp(Term):
    op: str       # 'and' | 'or'
    left: Term
    right: Term
    _children = ('left', 'right')

    def _infer(self):
        for side in (self.left, self.right):
            if side.ty != BOOL:
                raise TypingError(self.op, BOOL, side.ty)
        return BOOL


@dataclass(frozen=True)
class NotT(Term):
    arg: Term
    _children = ('arg',)

    def _infer(self):
        if self.arg.ty != BOOL:
            raise TypingError("not", BOOL, self.arg.ty)
        return BOOL


@dataclass(frozen=True)
class IteT(Term):
    cond: Term
    then: Term
    orelse: Term
    _children = ('cond', 'then', 'orelse')

    def _infer(self):
        if self.cond.ty != BOOL:
            raise TypingError("if condition", BOOL, self.cond.ty)
        if self.then.ty != self.orelse.ty:
            raise TypingError("if branches", self.then.ty, self.orelse.ty)
        return self.then.ty


@dataclass(frozen=True)
class Apply(Term):
    fn: FunSym
    arg: Term
    _children = ('arg',)

    def _infer(self):
        if self.arg.ty != self.fn.dom:
            raise TypingError(f"application of {self.fn.name}", self.fn.dom, self.arg.ty)
        return self.fn.cod

    @cached_property
    def funs(self):
        return self.arg.funs | {self.fn.name}


UNIT_LIT = Lit(None, UNIT)
TRUE_LIT = Lit(True, BOOL)
FALSE_LIT = Lit(False, BOOL)


def int_lit(n: int) -> Lit:
    return Lit(n, INT)


def bool_lit(b: bool) -> Lit:
    return TRUE_LIT if b else FALSE_LIT


def nil(elem_ty: Ty) -> ListLit:
    return ListLit((), elem_ty)


def tuple_term(items: Sequence[Term]) -> Term:
    """Right-nested pair; unit when empty"""
    if not items:
        return UNIT_LIT
    result = items[-1]
    for item in reversed(items[:-1]):
        result = Pair(item, result)
    return result


def tuple_parts(t: Term, arity: int) -> List[Term]:
    """Split a right-nested tuple term into arity components (by projection when opaque)"""
    parts = []
    for _ in range(arity - 1):
        if isinstance(t, Pair):
            parts.append(t.fst)
            t = t.snd
        else:
            parts.append(Proj(1, t))
            t = Proj(2, t)
    parts.append(t)
    return parts


def typecheck(t: Term) -> Ty:
    """Return the unique type of t, raising TypingError when ill-typed"""
    for child in _iter_children(t):
        typecheck(child)
    return t.ty


# =============================================================================
# Formulas
# =============================================================================

class Formula(Node):
    pass


@dataclass(frozen=True)
class PredVar:
    name: str
    arg_tys: Tuple[Ty, ...]


@dataclass(frozen=True)
class PredLam:
    """λ params. body, the value substituted for a predicate variable"""
    params: Tuple[Var, ...]
    body: 'Formula'

    @cached_property
    def fv(self):
        return self.body.fv - {p.name for p in self.params}


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


TOP = Top()
BOT = Bot()


@dataclass(frozen=True)
class Conj(Formula):
    items: Tuple[Formula, ...]
    _children = ('items',)


@dataclass(frozen=True)
class Disj(Formula):
    items: Tuple[Formula, ...]
    _children = ('items',)


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula
    _children = ('lhs', 'rhs')


@dataclass(frozen=True)
class Neg(Formula):
    arg: Formula
    _children = ('arg',)


@dataclass(frozen=True)
class Atom(Formula):
    term: Term
    _children = ('term',)


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term
    _children = ('left', 'right')


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula
    _children = ('body',)

    @cached_property
    def fv(self):
        return self.body.fv - {self.var.name}


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula
    _children = ('body',)

    @cached_property
    def fv(self):
        return self.body.fv - {self.var.name}


@dataclass(frozen=True)
class PApply(Formula):
    pred: PredVar
    args: Tuple[Term, ...]
    _children = ('args',)

    @cached_property
    def preds(self):
        return frozenset([self.pred.name])


@dataclass(frozen=True)
class PRedex(Formula):
    """(λ params. body) args, removed by normalize"""
    lam: PredLam
    args: Tuple[Term, ...]
    _children = ('args',)

    @cached_property
    def fv(self):
        return self.lam.fv.union(*(a.fv for a in self.args))

    @cached_property
    def preds(self):
        return self.lam.body.preds

    @cached_property
    def funs(self):
        return self.lam.body.funs.union(*(a.funs for a in self.args))


@dataclass(frozen=True)
class ForallPred(Formula):
    pred: PredVar
    body: Formula
    _children = ('body',)

    @cached_property
    def preds(self):
        return self.body.preds - {self.pred.name}


@dataclass(frozen=True)
class ForallFun(Formula):
    fn: FunSym
    body: Formula
    _children = ('body',)

    @cached_property
    def funs(self):
        return self.body.funs - {self.fn.name}


# ---- smart constructors ----

def conj(*items: Formula) -> Formula:
    items = tuple(i for i in items if not isinstance(i, Top))
    if not items:
        return TOP
    return items[0] if len(items) == 1 else Conj(items)


def disj(*items: Formula) -> Formula:
    items = tuple(i for i in items if not isinstance(i, Bot))
    if not items:
        return BOT
    return items[0] if len(items) == 1 else Disj(items)


def implies(lhs: Formula, rhs: Formula) -> Formula:
    return Implies(lhs, rhs)


def forall(vs: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(list(vs)):
        body = Forall(v, body)
    return body


def exists(vs: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(list(vs)):
        body = Exists(v, body)
    return body


def forall_preds(ps: Iterable[PredVar], body: Formula) -> Formula:
    for p in reversed(list(ps)):
        body = ForallPred(p, body)
    return body


def papply(pred: PredVar, *args: Term) -> PApply:
    return PApply(pred, tuple(args))


def atom(t: Term) -> Formula:
    return Atom(t)


def check_formula(f: Formula) -> None:
    """Type-check every term and predicate application in f"""
    if isinstance(f, Atom):
        if typecheck(f.term) != BOOL:
            raise TypingError("atom", BOOL, f.term.ty)
    elif isinstance(f, Eq):
        if typecheck(f.left) != typecheck(f.right):
            raise TypingError("equality", f.left.ty, f.right.ty)
    elif isinstance(f, PApply):
        found = tuple(typecheck(a) for a in f.args)
        if found != f.pred.arg_tys:
            raise TypingError(f"application of {f.pred.name}", f.pred.arg_tys, found)
    elif isinstance(f, PRedex):
        found = tuple(typecheck(a) for a in f.args)
        expected = tuple(p.ty for p in f.lam.params)
        if found != expected:
            raise TypingError("lambda redex", expected, found)
        check_formula(f.lam.body)
    else:
        for child in _iter_children(f):
            check_formula(child)


# =============================================================================
# Substitution
# =============================================================================

def _fresh_var(v: Var) -> Var:
    return Var(fresh_name(v.name), v.vty)


def subst_terms(node, mapping: Mapping[str, Term]):
    """Capture-avoiding simultaneous substitution of term variables (in terms or formulas)"""
    if not mapping:
        return node
    keys = mapping.keys()
    if not (node.fv & keys):
        return node
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, (Forall, Exists)):
        inner = {k: v for k, v in mapping.items() if k != node.var.name and k in node.body.fv}
        if not inner:
            return node
        var, body = node.var, node.body
        avoid = frozenset().union(*(t.fv for t in inner.values()))
        if var.name in avoid:
            new = _fresh_var(var)
            body = subst_terms(body, {var.name: new})
            var = new
        return type(node)(var, subst_terms(body, inner))
    if isinstance(node, CaseSum):
        scrut = subst_terms(node.scrut, mapping)
        lvar, lbody = _subst_under(node.lvar, node.lbody, mapping)
        rvar, rbody = _subst_under(node.rvar, node.rbody, mapping)
        return CaseSum(scrut, lvar, lbody, rvar, rbody)
    if isinstance(node, PRedex):
        lam = node.lam
        inner = {k: v for k, v in mapping.items() if k in lam.fv}
        if inner:
            params, body = _rename_params(lam.params, lam.body, inner)
            lam = PredLam(params, subst_terms(body, inner))
        return PRedex(lam, tuple(subst_terms(a, mapping) for a in node.args))
    return _map_children(node, lambda c: subst_terms(c, mapping))


def _subst_under(var: Var, body, mapping):
    inner = {k: v for k, v in mapping.items() if k != var.name and k in body.fv}
    if not inner:
        return var, body
    avoid = frozenset().union(*(t.fv for t in inner.values()))
    if var.name in avoid:
        new = _fresh_var(var)
        body = subst_terms(body, {var.name: new})
        var = new
    return var, subst_terms(body, inner)


def _rename_params(params, body, mapping):
    avoid = frozenset().union(*(t.fv for t in mapping.values()))
    renaming = {}
    new_params = []
    for p in params:
        if p.name in avoid:
            new = _fresh_var(p)
            renaming[p.name] = new
            new_params.append(new)
        else:
            new_params.append(p)
    if renaming:
        body = subst_terms(body, renaming)
    return tuple(new_params), body


def subst(f, var: Var, t: Term):
    """f[var := t], capture-avoiding; TypingError when t's type differs from var's"""
    if t.ty != var.ty:
        raise TypingError(f"substitution for {var.name}", var.ty, t.ty)
    return subst_terms(f, {var.name: t})


def beta(lam: PredLam, args: Sequence[Term]) -> Formula:
    """Reduce (λ params. body) args"""
    if len(args) != len(lam.params):
        raise TypingError("lambda application", f"{len(lam.params)} arguments", len(args))
    return subst_terms(lam.body, {p.name: a for p, a in zip(lam.params, args)})


PredValue = Union[PredLam, PredVar]


def psubst(f: Formula, mapping: Mapping[str, PredValue], reduce: bool = True) -> Formula:
    """
    Replace predicate variables by lambdas (or other predicate variables)

    Args:
        f: Formula
        mapping: predicate-variable name -> PredLam | PredVar
        reduce: beta-reduce the resulting redexes immediately

    Returns:
        Substituted formula
    """
    if not mapping or not (f.preds & mapping.keys()):
        return f
    lam_fv = frozenset().union(*(v.fv for v in mapping.values() if isinstance(v, PredLam)))
    lam_preds = frozenset().union(
        *((v.body.preds - frozenset()) if isinstance(v, PredLam) else {v.name}
          for v in mapping.values())
    )
    return _psubst(f, dict(mapping), lam_fv, lam_preds, reduce)


def _psubst(f, mapping, lam_fv, lam_preds, reduce):
    if not (f.preds & mapping.keys()):
        return f
    if isinstance(f, PApply):
        target = mapping.get(f.pred.name)
        if target is None:
            return f
        if isinstance(target, PredVar):
            return PApply(target, f.args)
        return beta(target, f.args) if reduce else PRedex(target, f.args)
    if isinstance(f, PRedex):
        lam = PredLam(f.lam.params, _psubst(f.lam.body, mapping, lam_fv, lam_preds, reduce))
        return PRedex(lam, f.args)
    if isinstance(f, (Forall, Exists)):
        var, body = f.var, f.body
        if var.name in lam_fv:
            new = _fresh_var(var)
            body = subst_terms(body, {var.name: new})
            var = new
        return type(f)(var, _psubst(body, mapping, lam_fv, lam_preds, reduce))
    if isinstance(f, ForallPred):
        inner = {k: v for k, v in mapping.items() if k != f.pred.name}
        pred, body = f.pred, f.body
        if pred.name in lam_preds:
            new = PredVar(fresh_name(pred.name), pred.arg_tys)
            body = _psubst(body, {pred.name: new}, frozenset(), frozenset(), reduce)
            pred = new
        return ForallPred(pred, _psubst(body, inner, lam_fv, lam_preds, reduce))
    return _map_children(f, lambda c: _psubst(c, mapping, lam_fv, lam_preds, reduce)
                         if isinstance(c, Formula) else c)


# =============================================================================
# Normalization
# =============================================================================

def is_value(t: Term) -> bool:
    """Closed constructor term whose value is known syntactically"""
    if isinstance(t, Lit):
        return True
    if isinstance(t, Pair):
        return is_value(t.fst) and is_value(t.snd)
    if isinstance(t, Inj):
        return is_value(t.arg)
    if isinstance(t, ListLit):
        return all(is_value(i) for i in t.items)
    if isinstance(t, Ctor):
        return all(is_value(a) for a in t.args)
    return False


def value_of(t: Term):
    """Python value of a value term"""
    if isinstance(t, Lit):
        return t.value
    if isinstance(t, Pair):
        return (value_of(t.fst), value_of(t.snd))
    if isinstance(t, Inj):
        return SumVal(t.side, value_of(t.arg))
    if isinstance(t, ListLit):
        return tuple(value_of(i) for i in t.items)
    if isinstance(t, Ctor):
        return CtorVal(t.name, tuple(value_of(a) for a in t.args))
    raise TypingError("value", "a literal term", t)


def value_term(value, ty: Ty) -> Term:
    """Literal term denoting value at type ty"""
    if isinstance(ty, (UnitTy, BoolTy, IntTy)):
        return Lit(value, ty)
    if isinstance(ty, PairTy):
        return Pair(value_term(value[0], ty.fst), value_term(value[1], ty.snd))
    if isinstance(ty, SumTy):
        inner = ty.left if value.side == 'l' else ty.right
        return Inj(value.side, value_term(value.value, inner), ty)
    if isinstance(ty, ListTy):
        return ListLit(tuple(value_term(v, ty.elem) for v in value), ty.elem)
    if isinstance(ty, EnumTy):
        arg_tys = ty.ctor_args(value.name)
        return Ctor(value.name, tuple(value_term(v, a) for v, a in zip(value.args, arg_tys)), ty)
    raise TypingError("value", "a first-order type", ty)


def _list_segments(t: Term) -> List[Term]:
    """Flatten append/cons chains into segments (literal lists merged)"""
    if isinstance(t, Append):
        segs = _list_segments(t.left) + _list_segments(t.right)
    elif isinstance(t, Cons):
        segs = [ListLit((t.head,), t.head.ty)] + _list_segments(t.tail)
    else:
        segs = [t]
    merged: List[Term] = []
    for seg in segs:
        if isinstance(seg, ListLit) and not seg.items:
            continue
        if merged and isinstance(seg, ListLit) and isinstance(merged[-1], ListLit):
            merged[-1] = ListLit(merged[-1].items + seg.items, seg.elem_ty)
        else:
            merged.append(seg)
    return merged


def _rebuild_list(segs: List[Term], ty: ListTy) -> Term:
    if not segs:
        return ListLit((), ty.elem)
    acc = segs[-1]
    for seg in reversed(segs[:-1]):
        if isinstance(seg, ListLit):
            for item in reversed(seg.items):
                acc = Cons(item, acc)
        else:
            acc = Append(seg, acc)
    return acc


def _arith(op, a, b):
    if op == '+':
        return a + b
    if op == '-':
        return a - b
    if op == '*':
        return a * b
    if b == 0:
        return 0
    # Euclidean, as SMT-LIB div/mod: 0 <= r < |b|
    r = a % abs(b)
    return (a - r) // b if op == 'div' else r


def _cmp(op, a, b):
    if op == '=':
        return a == b
    if op == '<>':
        return a != b
    if op == '<':
        return a < b
    return a <= b


def _decompose_eq(a: Term, b: Term):
    """
    Structural decomposition of a = b

    Returns:
        False when the heads clash, a list of component pairs when both
        sides are the same constructor, None when nothing applies
    """
    if isinstance(a, Pair) and isinstance(b, Pair):
        return [(a.fst, b.fst), (a.snd, b.snd)]
    if isinstance(a, Inj) and isinstance(b, Inj):
        return [(a.arg, b.arg)] if a.side == b.side else False
    if isinstance(a, Ctor) and isinstance(b, Ctor):
        return list(zip(a.args, b.args)) if a.name == b.name else False
    if isinstance(a, ListLit) and isinstance(b, ListLit):
        return list(zip(a.items, b.items)) if len(a.items) == len(b.items) else False
    if isinstance(a, Cons) and isinstance(b, Cons):
        return [(a.head, b.head), (a.tail, b.tail)]
    if isinstance(a, Cons) and isinstance(b, ListLit):
        return [(a.head, b.items[0]), (a.tail, ListLit(b.items[1:], b.elem_ty))] if b.items else False
    if isinstance(a, ListLit) and isinstance(b, Cons):
        return _decompose_eq(b, a)
    return None


def _term_and(items: List[Term]) -> Term:
    if not items:
        return TRUE_LIT
    acc = items[-1]
    for item in reversed(items[:-1]):
        acc = BoolOp('and', item, acc)
    return acc


def _term_or(items: List[Term]) -> Term:
    if not items:
        return FALSE_LIT
    acc = items[-1]
    for item in reversed(items[:-1]):
        acc = BoolOp('or', item, acc)
    return acc


def normalize_term(t: Term) -> Term:
    """Constant folding and structural simplification of a term"""
    if isinstance(t, (Var, Lit)):
        return t
    if isinstance(t, CaseSum):
        scrut = normalize_term(t.scrut)
        if isinstance(scrut, Inj):
            var, body = (t.lvar, t.lbody) if scrut.side == 'l' else (t.rvar, t.rbody)
            return normalize_term(subst_terms(body, {var.name: scrut.arg}))
        return CaseSum(scrut, t.lvar, normalize_term(t.lbody), t.rvar, normalize_term(t.rbody))
    t = _map_children(t, normalize_term)
    return _simplify_term(t)


def _simplify_term(t: Term) -> Term:
    if isinstance(t, Proj):
        if isinstance(t.arg, Pair):
            return t.arg.fst if t.index == 1 else t.arg.snd
        return t
    if isinstance(t, (Cons, Append)):
        return _rebuild_list(_list_segments(t), t.ty)
    if isinstance(t, ListOp):
        return _simplify_list_op(t)
    if isinstance(t, Elem):
        return _simplify_elem(t)
    if isinstance(t, Arith):
        if isinstance(t.left, Lit) and isinstance(t.right, Lit):
            return int_lit(_arith(t.op, t.left.value, t.right.value))
        if t.op in ('+', '-') and t.right == int_lit(0):
            return t.left
        if t.op == '+' and t.left == int_lit(0):
            return t.right
        return t
    if isinstance(t, Cmp):
        return _simplify_cmp(t)
    if isinstance(t, BoolOp):
        l, r = t.left, t.right
        if t.op == 'and':
            if l == FALSE_LIT or r == FALSE_LIT:
                return FALSE_LIT
            if l == TRUE_LIT:
                return r
            if r == TRUE_LIT or l == r:
                return l
        else:
            if l == TRUE_LIT or r == TRUE_LIT:
                return TRUE_LIT
            if l == FALSE_LIT:
                return r
            if r == FALSE_LIT or l == r:
                return l
        return t
    if isinstance(t, NotT):
        if isinstance(t.arg, Lit):
            return bool_lit(not t.arg.value)
        if isinstance(t.arg, NotT):
            return t.arg.arg
        return t
    if isinstance(t, IteT):
        if isinstance(t.cond, Lit):
            return t.then if t.cond.value else t.orelse
        if t.then == t.orelse:
            return t.then
        return t
    return t


def _simplify_list_op(t: ListOp) -> Term:
    arg = t.arg
    ty = arg.ty
    if isinstance(arg, ListLit):
        if t.op == 'length':
            return int_lit(len(arg.items))
        if t.op == 'head':
            return arg.items[0] if arg.items else value_term(default_value(ty.elem), ty.elem)
        return ListLit(arg.items[1:], arg.elem_ty)
    if isinstance(arg, Cons):
        if t.op == 'head':
            return arg.head
        if t.op == 'tail':
            return arg.tail
        return _simplify_term(Arith('+', int_lit(1), _simplify_list_op(ListOp('length', arg.tail))))
    return t


def _simplify_elem(t: Elem) -> Term:
    pieces = []
    for seg in _list_segments(t.lst):
        if isinstance(seg, ListLit):
            if any(item == t.item for item in seg.items):
                return TRUE_LIT
            if is_value(t.item) and all(is_value(i) for i in seg.items):
                continue
            pieces.append(Elem(t.item, seg))
        else:
            pieces.append(Elem(t.item, seg))
    return _term_or(pieces)


def _simplify_cmp(t: Cmp) -> Term:
    a, b = t.left, t.right
    if is_value(a) and is_value(b):
        return bool_lit(_cmp(t.op, value_of(a), value_of(b)))
    if t.op == '<>':
        return _simplify_term(NotT(_simplify_cmp(Cmp('=', a, b))))
    if a == b:
        return bool_lit(t.op in ('=', '<='))
    if t.op == '=':
        if a.ty == UNIT:
            return TRUE_LIT
        parts = _decompose_eq(a, b)
        if parts is False:
            return FALSE_LIT
        if parts is not None:
            return normalize_term(_term_and([Cmp('=', x, y) for x, y in parts]))
    return t


def _safe_instance(t: Term, var: Var) -> bool:
    """t certainly lies in the finite carrier that var ranges over"""
    if var.name in t.fv:
        return False
    root = t
    while isinstance(root, Proj):
        root = root.arg
    if isinstance(root, Var):
        return True
    if isinstance(var.ty, (UnitTy, BoolTy)):
        return True
    if isinstance(var.ty, EnumTy) and all(not args for _, args in var.ty.ctors) and is_value(t):
        return True
    return False


def _one_point(var: Var, hyps: Sequence[Formula]):
    """Find an equation var = t among hyps usable for the one-point rule"""
    for idx, h in enumerate(hyps):
        if isinstance(h, Eq):
            for lhs, rhs in ((h.left, h.right), (h.right, h.left)):
                if lhs == var and _safe_instance(rhs, var):
                    return idx, rhs
    return None


def _conjuncts(f: Formula) -> Tuple[Formula, ...]:
    return f.items if isinstance(f, Conj) else (f,)


def _norm(f: Formula) -> Formula:
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Conj):
        items: List[Formula] = []
        for item in f.items:
            n = _norm(item)
            for piece in _conjuncts(n):
                if isinstance(piece, Bot):
                    return BOT
                if isinstance(piece, Top) or piece in items:
                    continue
                items.append(piece)
        return conj(*items)
    if isinstance(f, Disj):
        items = []
        for item in f.items:
            n = _norm(item)
            for piece in (n.items if isinstance(n, Disj) else (n,)):
                if isinstance(piece, Top):
                    return TOP
                if isinstance(piece, Bot) or piece in items:
                    continue
                items.append(piece)
        return disj(*items)
    if isinstance(f, Implies):
        lhs = _norm(f.lhs)
        if isinstance(lhs, Bot):
            return TOP
        rhs = _norm(f.rhs)
        if isinstance(lhs, Top) or isinstance(rhs, Top) or lhs == rhs:
            return rhs if isinstance(lhs, Top) else TOP
        if isinstance(rhs, Bot):
            return _norm(Neg(lhs))
        if rhs in _conjuncts(lhs):
            return TOP
        return Implies(lhs, rhs)
    if isinstance(f, Neg):
        arg = _norm(f.arg)
        if isinstance(arg, Top):
            return BOT
        if isinstance(arg, Bot):
            return TOP
        if isinstance(arg, Neg):
            return arg.arg
        return Neg(arg)
    if isinstance(f, Atom):
        return _lift_atom(normalize_term(f.term))
    if isinstance(f, Eq):
        return _norm_eq(normalize_term(f.left), normalize_term(f.right))
    if isinstance(f, Forall):
        return _norm_forall(f)
    if isinstance(f, Exists):
        return _norm_exists(f)
    if isinstance(f, PApply):
        args = tuple(normalize_term(a) for a in f.args)
        return f if all(a is b for a, b in zip(args, f.args)) else PApply(f.pred, args)
    if isinstance(f, PRedex):
        return _norm(beta(f.lam, f.args))
    if isinstance(f, ForallPred):
        body = _norm(f.body)
        if f.pred.name not in body.preds:
            return body
        return ForallPred(f.pred, body)
    if isinstance(f, ForallFun):
        body = _norm(f.body)
        if f.fn.name not in body.funs:
            return body
        return ForallFun(f.fn, body)
    raise TypingError("formula", "a formula node", type(f).__name__)


def _lift_atom(t: Term) -> Formula:
    if isinstance(t, Lit):
        return TOP if t.value else BOT
    if isinstance(t, BoolOp):
        left, right = _lift_atom(t.left), _lift_atom(t.right)
        return _norm(Conj((left, right)) if t.op == 'and' else Disj((left, right)))
    if isinstance(t, NotT):
        return _norm(Neg(_lift_atom(t.arg)))
    if isinstance(t, Cmp) and t.op == '=':
        return _norm_eq(t.left, t.right)
    if isinstance(t, Cmp) and t.op == '<>':
        return _norm(Neg(_norm_eq(t.left, t.right)))
    return Atom(t)


def _norm_eq(a: Term, b: Term) -> Formula:
    if a == b or a.ty == UNIT:
        return TOP
    if is_value(a) and is_value(b):
        return TOP if value_of(a) == value_of(b) else BOT
    parts = _decompose_eq(a, b)
    if parts is False:
        return BOT
    if parts is not None:
        return _norm(conj(*(Eq(x, y) for x, y in parts)))
    return Eq(a, b)


def _norm_forall(f: Forall) -> Formula:
    var = f.var
    body = _norm(f.body)
    if var.name not in body.fv:
        return TOP if isinstance(var.ty, VoidTy) else body
    if isinstance(body, Implies):
        hyps = _conjuncts(body.lhs)
        hit = _one_point(var, hyps)
        if hit is not None:
            idx, t = hit
            rest = conj(*(h for i, h in enumerate(hyps) if i != idx))
            return _norm(subst_terms(Implies(rest, body.rhs), {var.name: t}))
    return Forall(var, body)


def _norm_exists(f: Exists) -> Formula:
    var = f.var
    body = _norm(f.body)
    if var.name not in body.fv:
        return BOT if isinstance(var.ty, VoidTy) else body
    items = _conjuncts(body)
    hit = _one_point(var, items)
    if hit is not None:
        idx, t = hit
        rest = conj(*(h for i, h in enumerate(items) if i != idx))
        return _norm(subst_terms(rest, {var.name: t}))
    return Exists(var, body)


def normalize(f: Formula, max_rounds: int = 8) -> Formula:
    """
    Beta-reduce and simplify f until a fixpoint

    Eval-preserving; the one-point rule only fires on instances that stay
    inside the quantifier's carrier.
    """
    for _ in range(max_rounds):
        g = _norm(f)
        if g == f:
            return g
        f = g
    return f


# =============================================================================
# Alpha equivalence
# =============================================================================

def alpha_canonical(f):
    """Rename every bound variable to a position-determined name"""
    counter = itertools.count()

    def go(node):
        if isinstance(node, (Forall, Exists)):
            new = Var(f"%{next(counter)}", node.var.vty)
            return type(node)(new, go(subst_terms(node.body, {node.var.name: new})))
        if isinstance(node, ForallPred):
            new = PredVar(f"%{next(counter)}", node.pred.arg_tys)
            return ForallPred(new, go(psubst(node.body, {node.pred.name: new})))
        if isinstance(node, CaseSum):
            lnew = Var(f"%{next(counter)}", node.lvar.vty)
            rnew = Var(f"%{next(counter)}", node.rvar.vty)
            return CaseSum(go(node.scrut), lnew, go(subst_terms(node.lbody, {node.lvar.name: lnew})),
                           rnew, go(subst_terms(node.rbody, {node.rvar.name: rnew})))
        if isinstance(node, PRedex):
            params = tuple(Var(f"%{next(counter)}", p.vty) for p in node.lam.params)
            body = subst_terms(node.lam.body, {p.name: q for p, q in zip(node.lam.params, params)})
            return PRedex(PredLam(params, go(body)), tuple(go(a) for a in node.args))
        return _map_children(node, go)

    return go(f)


def alpha_equal(a, b) -> bool:
    return alpha_canonical(a) == alpha_canonical(b)


# =============================================================================
# Carriers and evaluation
# =============================================================================

@dataclass
class Env:
    """
    Interpretation of free symbols

    Attributes:
        vars: variable name -> value
        preds: predicate name -> set of argument tuples that hold
        funs: function name -> table (dict) or Python callable
    """
    vars: Dict[str, object] = field(default_factory=dict)
    preds: Dict[str, FrozenSet[tuple]] = field(default_factory=dict)
    funs: Dict[str, object] = field(default_factory=dict)

    def bind(self, name: str, value) -> 'Env':
        return Env({**self.vars, name: value}, self.preds, self.funs)


@dataclass(frozen=True)
class FunDef:
    """Interpreted logic function: sym(param) = body, possibly recursive"""
    sym: FunSym
    param: Var
    body: Term


def carrier_size(ty: Ty, dom: DomainConfig) -> int:
    if isinstance(ty, UnitTy):
        return 1
    if isinstance(ty, BoolTy):
        return 2
    if isinstance(ty, IntTy):
        return dom.int_hi - dom.int_lo + 1
    if isinstance(ty, VoidTy):
        return 0
    if isinstance(ty, PairTy):
        return carrier_size(ty.fst, dom) * carrier_size(ty.snd, dom)
    if isinstance(ty, SumTy):
        return carrier_size(ty.left, dom) + carrier_size(ty.right, dom)
    if isinstance(ty, ListTy):
        n = carrier_size(ty.elem, dom)
        return sum(n ** k for k in range(dom.list_bound + 1))
    if isinstance(ty, EnumTy):
        total = 0
        for _, args in ty.ctors:
            size = 1
            for a in args:
                size *= carrier_size(a, dom)
            total += size
        return total
    raise CarrierTooLarge(str(ty), -1, dom.carrier_cap)


@lru_cache(maxsize=512)
def carrier(ty: Ty, dom: DomainConfig) -> Tuple:
    """
    Deterministically ordered finite carrier of ty

    Raises:
        CarrierTooLarge: If the carrier exceeds dom.carrier_cap
    """
    size = carrier_size(ty, dom)
    if size > dom.carrier_cap:
        raise CarrierTooLarge(str(ty), size, dom.carrier_cap)
    if isinstance(ty, UnitTy):
        return (None,)
    if isinstance(ty, BoolTy):
        return (False, True)
    if isinstance(ty, IntTy):
        return tuple(dom.int_range)
    if isinstance(ty, VoidTy):
        return ()
    if isinstance(ty, PairTy):
        return tuple(itertools.product(carrier(ty.fst, dom), carrier(ty.snd, dom)))
    if isinstance(ty, SumTy):
        return (tuple(SumVal('l', v) for v in carrier(ty.left, dom))
                + tuple(SumVal('r', v) for v in carrier(ty.right, dom)))
    if isinstance(ty, ListTy):
        elems = carrier(ty.elem, dom)
        return tuple(itertools.chain.from_iterable(
            itertools.product(elems, repeat=k) for k in range(dom.list_bound + 1)))
    if isinstance(ty, EnumTy):
        values = []
        for name, args in ty.ctors:
            for combo in itertools.product(*(carrier(a, dom) for a in args)):
                values.append(CtorVal(name, tuple(combo)))
        return tuple(values)
    raise CarrierTooLarge(str(ty), -1, dom.carrier_cap)


def pred_tables(pred: PredVar, dom: DomainConfig):
    """All tables of pred in binary-counting order"""
    points = tuple(itertools.product(*(carrier(t, dom) for t in pred.arg_tys)))
    if len(points) > dom.pred_cap:
        raise ResourceLimit(f"predicate {base_name(pred.name)}", len(points), dom.pred_cap)
    for mask in range(2 ** len(points)):
        yield frozenset(pt for bit, pt in enumerate(points) if mask >> bit & 1)


def fun_tables(fn: FunSym, dom: DomainConfig):
    """All tables of fn, lexicographic over the codomain carrier"""
    points = carrier(fn.dom, dom)
    outs = carrier(fn.cod, dom)
    count = len(outs) ** len(points)
    if count > dom.fun_cap:
        raise ResourceLimit(f"function {base_name(fn.name)}", count, dom.fun_cap)
    for combo in itertools.product(outs, repeat=len(points)):
        yield dict(zip(points, combo))


class Evaluator:
    """
    Tarskian evaluation of formulas over finite carriers

    Args:
        dom: Domain configuration
        definitions: Interpreted logic functions by name
    """

    def __init__(self, dom: DomainConfig, definitions: Optional[Mapping[str, FunDef]] = None):
        self.dom = dom
        self.definitions = dict(definitions or {})
        self.vars: Dict[str, object] = {}
        self.preds: Dict[str, FrozenSet] = {}
        self.funs: Dict[str, object] = {}
        self._depth = 0

    def run(self, f: Formula, env: Optional[Env] = None) -> bool:
        env = env or Env()
        self.vars = dict(env.vars)
        self.preds = dict(env.preds)
        self.funs = dict(env.funs)
        return self.formula(f)

    def value(self, t: Term, env: Optional[Env] = None):
        env = env or Env()
        self.vars = dict(env.vars)
        self.preds = dict(env.preds)
        self.funs = dict(env.funs)
        return self.term(t)

    # ---- scoped binding ----

    def _with(self, table: dict, name: str, value, thunk):
        missing = object()
        saved = table.get(name, missing)
        table[name] = value
        try:
            return thunk()
        finally:
            if saved is missing:
                del table[name]
            else:
                table[name] = saved

    # ---- terms ----

    def term(self, t: Term):
        kind = type(t)
        if kind is Var:
            try:
                return self.vars[t.name]
            except KeyError:
                raise UnboundVariable(t.name) from None
        if kind is Lit:
            return t.value
        if kind is Pair:
            return (self.term(t.fst), self.term(t.snd))
        if kind is Proj:
            return self.term(t.arg)[t.index - 1]
        if kind is Inj:
            return SumVal(t.side, self.term(t.arg))
        if kind is CaseSum:
            v = self.term(t.scrut)
            var, body = (t.lvar, t.lbody) if v.side == 'l' else (t.rvar, t.rbody)
            return self._with(self.vars, var.name, v.value, lambda: self.term(body))
        if kind is ListLit:
            return tuple(self.term(i) for i in t.items)
        if kind is Cons:
            return (self.term(t.head),) + self.term(t.tail)
        if kind is Append:
            return self.term(t.left) + self.term(t.right)
        if kind is ListOp:
            v = self.term(t.arg)
            if t.op == 'length':
                return len(v)
            if t.op == 'head':
                return v[0] if v else default_value(t.ty)
            return v[1:]
        if kind is Elem:
            return self.term(t.item) in self.term(t.lst)
        if kind is Ctor:
            return CtorVal(t.name, tuple(self.term(a) for a in t.args))
        if kind is Arith:
            return _arith(t.op, self.term(t.left), self.term(t.right))
        if kind is Cmp:
            return _cmp(t.op, self.term(t.left), self.term(t.right))
        if kind is BoolOp:
            if t.op == 'and':
                return self.term(t.left) and self.term(t.right)
            return self.term(t.left) or self.term(t.right)
        if kind is NotT:
            return not self.term(t.arg)
        if kind is IteT:
            return self.term(t.then) if self.term(t.cond) else self.term(t.orelse)
        if kind is Apply:
            return self._apply(t)
        raise TypingError("term", "a term node", kind.__name__)

    def _apply(self, t: Apply):
        arg = self.term(t.arg)
        table = self.funs.get(t.fn.name)
        if table is not None:
            if callable(table):
                return table(arg)
            return table.get(arg, default_value(t.fn.cod))
        definition = self.definitions.get(t.fn.name)
        if definition is None:
            raise UnboundVariable(t.fn.name)
        if self._depth > Config.MAX_DEFINITION_DEPTH:
            raise CarrierTooLarge(f"unfolding of {t.fn.name}", self._depth, Config.MAX_DEFINITION_DEPTH)
        saved = self.vars
        self.vars = {definition.param.name: arg}
        self._depth += 1
        try:
            return self.term(definition.body)
        finally:
            self._depth -= 1
            self.vars = saved

    # ---- formulas ----

    def formula(self, f: Formula) -> bool:
        kind = type(f)
        if kind is Top:
            return True
        if kind is Bot:
            return False
        if kind is Conj:
            return all(self.formula(i) for i in f.items)
        if kind is Disj:
            return any(self.formula(i) for i in f.items)
        if kind is Implies:
            return (not self.formula(f.lhs)) or self.formula(f.rhs)
        if kind is Neg:
            return not self.formula(f.arg)
        if kind is Atom:
            return bool(self.term(f.term))
        if kind is Eq:
            return self.term(f.left) == self.term(f.right)
        if kind is Forall or kind is Exists:
            return self._quantifier(f, kind is Forall)
        if kind is PApply:
            table = self.preds.get(f.pred.name)
            if table is None:
                raise UnboundVariable(f.pred.name)
            return tuple(self.term(a) for a in f.args) in table
        if kind is PRedex:
            return self.formula(beta(f.lam, f.args))
        if kind is ForallPred:
            body = f.body
            return all(self._with(self.preds, f.pred.name, table, lambda: self.formula(body))
                       for table in pred_tables(f.pred, self.dom))
        if kind is ForallFun:
            body = f.body
            return all(self._with(self.funs, f.fn.name, table, lambda: self.formula(body))
                       for table in fun_tables(f.fn, self.dom))
        raise TypingError("formula", "a formula node", kind.__name__)

    def _quantifier(self, f, universal: bool) -> bool:
        values = carrier(f.var.ty, self.dom)
        if f.var.name not in f.body.fv:
            if not values:
                return universal
            return self.formula(f.body)
        name, body, table = f.var.name, f.body, self.vars
        missing = object()
        saved = table.get(name, missing)
        try:
            for v in values:
                table[name] = v
                if self.formula(body) != universal:
                    return not universal
            return universal
        finally:
            if saved is missing:
                table.pop(name, None)
            else:
                table[name] = saved


def eval_formula(f: Formula, env: Optional[Env] = None, dom: Optional[DomainConfig] = None,
                 definitions: Optional[Mapping[str, FunDef]] = None) -> bool:
    """Truth value of f under env; quantifiers range over dom's carriers"""
    return Evaluator(dom or DomainConfig(), definitions).run(f, env)


def eval_term(t: Term, env: Optional[Env] = None, dom: Optional[DomainConfig] = None,
              definitions: Optional[Mapping[str, FunDef]] = None):
    return Evaluator(dom or DomainConfig(), definitions).value(t, env)


def collect_nodes(node, predicate: Callable[[object], bool]) -> List:
    """Every sub-node (terms and formulas) satisfying predicate, in preorder"""
    found = []

    def go(n):
        if predicate(n):
            found.append(n)
        if isinstance(n, PRedex):
            go(n.lam.body)
        for child in _iter_children(n):
            go(child)

    go(node)
    return found


# Example usage
if __name__ == "__main__":
    x = Var('x', INT)
    p = PredVar('p', (INT,))
    f = Forall(x, Implies(Atom(Cmp('<', x, int_lit(2))), papply(p, x)))
    print(f"formula nodes: {f.size}, free preds: {sorted(f.preds)}")
    table = frozenset({(0,), (1,)})
    print(eval_formula(f, Env(preds={'p': table}), DomainConfig(int_lo=0, int_hi=3)))
