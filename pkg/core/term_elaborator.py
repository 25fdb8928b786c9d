#!/usr/bin/env python3
"""
Term Elaborator - Typed terms, formulas and specifications from surface expressions

Pure expressions are elaborated in two passes: a unification pass gives a
type to every node (untyped quantifier binders and empty lists included,
defaulting to int when unconstrained), then a build pass produces logic
terms and formulas with those types.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

# Handle imports
try:
    from core import surface_ast as ast
    from core.errors import ElaborationError, TypingError
    from core.logic import (
        BOOL, BOT, INT, TOP, UNIT, UNIT_LIT, Append, Apply, Arith, Atom, BoolOp, Cmp, Cons, Ctor,
        Elem, EnumTy, Eq, Formula, FunDef, FunSym, FunTy, Implies, Inj, IteT, ListLit, ListOp,
        ListTy, Neg, NotT, PApply, PairTy, PredLam, PredVar, Proj, SumTy, Term, Ty, Var, VoidTy,
        conj, disj, event_type, exists, forall, fresh_name, int_lit, bool_lit, subst_terms,
        tuple_parts, tuple_term, tuple_type, typecheck,
    )
    from core.specmonads import SpecExpr, SpecShape
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core import surface_ast as ast
    from core.errors import ElaborationError, TypingError
    from core.logic import (
        BOOL, BOT, INT, TOP, UNIT, UNIT_LIT, Append, Apply, Arith, Atom, BoolOp, Cmp, Cons, Ctor,
        Elem, EnumTy, Eq, Formula, FunDef, FunSym, FunTy, Implies, Inj, IteT, ListLit, ListOp,
        ListTy, Neg, NotT, PApply, PairTy, PredLam, PredVar, Proj, SumTy, Term, Ty, Var, VoidTy,
        conj, disj, event_type, exists, forall, fresh_name, int_lit, bool_lit, subst_terms,
        tuple_parts, tuple_term, tuple_type, typecheck,
    )
    from core.specmonads import SpecExpr, SpecShape

logger = logging.getLogger(__name__)


BUILTIN_ARITY = {'head': 1, 'tail': 1, 'length': 1, 'elem': 2, 'fst': 1, 'snd': 1, 'inl': 1, 'inr': 1}
BASE_TYPES = {'int': INT, 'bool': BOOL, 'unit': UNIT}
ARITH = {'+': '+', '-': '-', '*': '*', '/': 'div', '%': 'mod'}
ORDER = ('<', '<=', '>', '>=')
LOGICAL = ('&&', '||', '/\\', '\\/', '==>')


def error_at(message: str, node) -> ElaborationError:
    span = getattr(node, 'span', None)
    if span:
        return ElaborationError(message, span[0], span[1])
    return ElaborationError(message)


# =============================================================================
# Scopes and declarations
# =============================================================================

@dataclass(frozen=True)
class Scope:
    """
    Names visible at a program point

    Attributes:
        vars: Term variables
        funs: Function symbols (function parameters, continuations)
        preds: Post binders of the enclosing specification
        values: Pure values of let-bound variables, when known
        events: Event type of the enclosing observation (In/Out constructors)
    """
    vars: Mapping[str, Var] = field(default_factory=dict)
    funs: Mapping[str, FunSym] = field(default_factory=dict)
    preds: Mapping[str, PredVar] = field(default_factory=dict)
    values: Mapping[str, Term] = field(default_factory=dict)
    events: Optional[EnumTy] = None

    def with_var(self, name: str, var: Var, value: Optional[Term] = None) -> 'Scope':
        values = dict(self.values)
        if value is None:
            values.pop(name, None)
        else:
            values[name] = value
        preds = {k: v for k, v in self.preds.items() if k != name}
        funs = {k: v for k, v in self.funs.items() if k != name}
        return Scope({**self.vars, name: var}, funs, preds, values, self.events)

    def with_fun(self, name: str, sym: FunSym) -> 'Scope':
        vars_ = {k: v for k, v in self.vars.items() if k != name}
        return Scope(vars_, {**self.funs, name: sym}, self.preds, self.values, self.events)

    def with_pred(self, name: str, pred: PredVar) -> 'Scope':
        vars_ = {k: v for k, v in self.vars.items() if k != name}
        return Scope(vars_, self.funs, {**self.preds, name: pred}, self.values, self.events)

    def with_events(self, events: Optional[EnumTy]) -> 'Scope':
        return Scope(self.vars, self.funs, self.preds, self.values, events)

    def binds(self, name: str) -> bool:
        return name in self.vars or name in self.funs or name in self.preds


@dataclass
class Declarations:
    """
    Program-level names: types, constructors and logic functions

    Attributes:
        types: Type aliases and enumerations by name
        ctors: Constructor name -> its enumeration
        logic: Defined logic functions
        logic_syms: Symbols of logic functions (set before their bodies)
    """
    types: Dict[str, Ty] = field(default_factory=dict)
    ctors: Dict[str, EnumTy] = field(default_factory=dict)
    logic: Dict[str, FunDef] = field(default_factory=dict)
    logic_syms: Dict[str, FunSym] = field(default_factory=dict)


# =============================================================================
# Type variables and unification
# =============================================================================

@dataclass(eq=False)
class TVar(Ty):
    """Unification variable"""
    ref: Optional[Ty] = None

    def __str__(self):
        return str(self.ref) if self.ref is not None else '?'


def prune(ty: Ty) -> Ty:
    while isinstance(ty, TVar) and ty.ref is not None:
        ty = ty.ref
    return ty


def resolve(ty: Ty, default: Ty = INT) -> Ty:
    """Fully substituted type; unconstrained variables become default"""
    ty = prune(ty)
    if isinstance(ty, TVar):
        ty.ref = default
        return default
    if isinstance(ty, PairTy):
        return PairTy(resolve(ty.fst, default), resolve(ty.snd, default))
    if isinstance(ty, SumTy):
        return SumTy(resolve(ty.left, default), resolve(ty.right, default))
    if isinstance(ty, ListTy):
        return ListTy(resolve(ty.elem, default))
    if isinstance(ty, FunTy):
        return FunTy(resolve(ty.dom, default), resolve(ty.cod, default))
    return ty


def _occurs(var: TVar, ty: Ty) -> bool:
    ty = prune(ty)
    if ty is var:
        return True
    if isinstance(ty, PairTy):
        return _occurs(var, ty.fst) or _occurs(var, ty.snd)
    if isinstance(ty, SumTy):
        return _occurs(var, ty.left) or _occurs(var, ty.right)
    if isinstance(ty, ListTy):
        return _occurs(var, ty.elem)
    if isinstance(ty, FunTy):
        return _occurs(var, ty.dom) or _occurs(var, ty.cod)
    return False


def unify(a: Ty, b: Ty, node=None):
    """Make a and b equal, binding type variables"""
    a, b = prune(a), prune(b)
    if a is b:
        return
    if isinstance(a, TVar) or isinstance(b, TVar):
        var, other = (a, b) if isinstance(a, TVar) else (b, a)
        if _occurs(var, other):
            raise error_at(f"infinite type {resolve(other)}", node)
        var.ref = other
        return
    pairs = None
    if isinstance(a, PairTy) and isinstance(b, PairTy):
        pairs = ((a.fst, b.fst), (a.snd, b.snd))
    elif isinstance(a, SumTy) and isinstance(b, SumTy):
        pairs = ((a.left, b.left), (a.right, b.right))
    elif isinstance(a, ListTy) and isinstance(b, ListTy):
        pairs = ((a.elem, b.elem),)
    elif isinstance(a, FunTy) and isinstance(b, FunTy):
        pairs = ((a.dom, b.dom), (a.cod, b.cod))
    if pairs is not None:
        for x, y in pairs:
            unify(x, y, node)
        return
    if a != b:
        raise error_at(f"type mismatch: expected {resolve(a)}, found {resolve(b)}", node)


def split_post_args(args: Sequence[ast.Expr], arity: int) -> Optional[List[ast.Expr]]:
    """
    Arguments of a post binder applied to arity components

    p (a, b, c) against a 3-ary post gives [a, b, c]; extra items nest into
    the last component. None when the components must be projected out of
    a single opaque argument.
    """
    if len(args) == arity:
        return list(args)
    if len(args) == 1 and arity > 1:
        arg = args[0]
        if isinstance(arg, ast.Tuple_) and len(arg.items) >= arity:
            items = list(arg.items)
            if len(items) > arity:
                items = items[:arity - 1] + [ast.Tuple_(arg.span, items[arity - 1:])]
            return items
        return None
    raise error_at(f"post binder takes {arity} arguments, {len(args)} given", args[0] if args else None)


# =============================================================================
# Elaboration of pure expressions
# =============================================================================

class TermElaborator:
    """
    Elaborates pure expressions, formulas and specifications

    Args:
        decls: Program-level declarations
    """

    def __init__(self, decls: Declarations):
        self.decls = decls

    # ---- types ----

    def resolve_type(self, texpr: ast.TypeExpr, events: Optional[EnumTy] = None) -> Ty:
        if isinstance(texpr, ast.NamedType):
            if texpr.name in BASE_TYPES:
                return BASE_TYPES[texpr.name]
            if texpr.name in self.decls.types:
                return self.decls.types[texpr.name]
            if texpr.name == 'event':
                return events or event_type()
            raise error_at(f"unknown type {texpr.name}", texpr)
        if isinstance(texpr, ast.ListType):
            return ListTy(self.resolve_type(texpr.elem, events))
        if isinstance(texpr, ast.PairType):
            return PairTy(self.resolve_type(texpr.fst, events), self.resolve_type(texpr.snd, events))
        if isinstance(texpr, ast.SumType):
            return SumTy(self.resolve_type(texpr.left, events), self.resolve_type(texpr.right, events))
        if isinstance(texpr, ast.FunType):
            return FunTy(self.resolve_type(texpr.dom, events), self.resolve_type(texpr.cod, events))
        raise error_at("malformed type", texpr)

    def ctor_type(self, name: str, scope: Scope, node) -> EnumTy:
        if name in self.decls.ctors:
            return self.decls.ctors[name]
        if name in ('In', 'Out'):
            return scope.events or event_type()
        raise error_at(f"unknown constructor {name}", node)

    def function(self, name: str, scope: Scope) -> Optional[FunSym]:
        if name in scope.vars or name in scope.preds:
            return None
        if name in scope.funs:
            return scope.funs[name]
        return self.decls.logic_syms.get(name)

    # ---- entry points ----

    def term(self, expr: ast.Expr, scope: Scope, expected: Optional[Ty] = None) -> Term:
        """Typed term of a pure expression"""
        run = _Pass(self)
        ty = run.typeof(expr, scope)
        if expected is not None and not isinstance(expected, VoidTy):
            unify(ty, expected, expr)
        return self._checked(run.term(expr, scope), expr)

    def formula(self, expr: ast.Expr, scope: Scope) -> Formula:
        """Formula of a pure boolean expression (quantifiers and post binders allowed)"""
        run = _Pass(self)
        unify(run.typeof(expr, scope), BOOL, expr)
        return run.formula(expr, scope)

    def pred_lambda(self, name: str, ty: Ty, body: ast.Expr, scope: Scope) -> PredLam:
        var = Var(name, ty)
        return PredLam((var,), self.formula(body, scope.with_var(name, var)))

    def _checked(self, t: Term, node) -> Term:
        try:
            typecheck(t)
        except TypingError as e:
            raise error_at(str(e), node) from None
        return t

    # ---- specifications ----

    def spec(self, spec: ast.SpecAst, shape: SpecShape, scope: Scope) -> SpecExpr:
        """
        Specification at shape

        Lambda binders are matched to the shape's binders by name when they
        are exactly the canonical names, otherwise by position (post binders
        first, then context binders). requires/ensures lowers to
        pre ∧ ∀r. post r ⇒ p r with the context binders under their canonical names.
        """
        if isinstance(spec, ast.SpecLambda):
            return SpecExpr(shape, self.formula(spec.body, self._lambda_scope(spec, shape, scope)))
        if isinstance(spec, ast.SpecPrePost):
            return SpecExpr(shape, self._prepost(spec, shape, scope))
        raise error_at("malformed specification", spec)

    def _lambda_scope(self, spec: ast.SpecLambda, shape: SpecShape, scope: Scope) -> Scope:
        binders = shape.binders
        canonical = [b.name for b in binders]
        if len(spec.binders) != len(binders):
            raise error_at(f"a {shape.name} specification binds {len(binders)} names "
                           f"({' '.join(canonical)}), {len(spec.binders)} given", spec)
        if sorted(spec.binders) == sorted(canonical):
            by_name = {b.name: b for b in binders}
            pairs = [(name, by_name[name]) for name in spec.binders]
        else:
            pairs = list(zip(spec.binders, binders))
        for name, binder in pairs:
            if isinstance(binder, PredVar):
                scope = scope.with_pred(name, binder)
            else:
                scope = scope.with_var(name, binder)
        return scope

    def _prepost(self, spec: ast.SpecPrePost, shape: SpecShape, scope: Scope) -> Formula:
        for var in shape.ctx:
            scope = scope.with_var(var.name, var)
        pre = self.formula(spec.pre, scope) if spec.pre is not None else TOP
        p = shape.posts[0]
        if spec.post is None and not spec.post_binders:
            rs = tuple(Var(fresh_name('r'), ty) for ty in p.arg_tys)
            return conj(pre, forall(rs, PApply(p, rs)))
        if len(spec.post_binders) != len(p.arg_tys):
            raise error_at(f"postcondition binds {len(p.arg_tys)} names "
                           f"({', '.join(str(t) for t in p.arg_tys)}), {len(spec.post_binders)} given", spec)
        reserved = set(shape.post_names) | set(shape.ctx_names)
        rs = []
        inner = scope
        for name, ty in zip(spec.post_binders, p.arg_tys):
            var = Var(fresh_name(name) if name in reserved else name, ty)
            rs.append(var)
            inner = inner.with_var(name, var)
        post = self.formula(spec.post, inner) if spec.post is not None else TOP
        return conj(pre, forall(rs, Implies(post, PApply(p, tuple(rs)))))


class _Pass:
    """One elaboration of a pure expression: typing first, then construction"""

    def __init__(self, owner: TermElaborator):
        self.owner = owner
        self.types: Dict[int, Ty] = {}
        self.binder_types: Dict[Tuple[int, int], Ty] = {}
        self._keep: List[ast.Expr] = []

    def type_of(self, node) -> Ty:
        return resolve(self.types[id(node)])

    # =========================================================================
    # Typing
    # =========================================================================

    def typeof(self, e: ast.Expr, scope: Scope) -> Ty:
        ty = self._typeof(e, scope)
        self.types[id(e)] = ty
        return ty

    def _typeof(self, e, scope: Scope) -> Ty:
        owner = self.owner
        if isinstance(e, ast.Num):
            return INT
        if isinstance(e, ast.BoolConst):
            return BOOL
        if isinstance(e, ast.UnitConst):
            return UNIT
        if isinstance(e, ast.Name):
            return self._name_type(e, scope)
        if isinstance(e, ast.CtorName):
            ety = owner.ctor_type(e.name, scope, e)
            if ety.ctor_args(e.name):
                raise error_at(f"constructor {e.name} expects arguments", e)
            return ety
        if isinstance(e, ast.Tuple_):
            return tuple_type([self.typeof(i, scope) for i in e.items])
        if isinstance(e, ast.ListExpr):
            elem = TVar()
            for item in e.items:
                unify(elem, self.typeof(item, scope), item)
            return ListTy(elem)
        if isinstance(e, ast.BinOp):
            return self._binop_type(e, scope)
        if isinstance(e, ast.Not):
            unify(self.typeof(e.arg, scope), BOOL, e.arg)
            return BOOL
        if isinstance(e, ast.Negate):
            unify(self.typeof(e.arg, scope), INT, e.arg)
            return INT
        if isinstance(e, ast.App):
            return self._app_type(e, scope)
        if isinstance(e, ast.CtorApp):
            ety = owner.ctor_type(e.ctor, scope, e)
            expected = ety.ctor_args(e.ctor)
            found = [self.typeof(a, scope) for a in e.args]
            if len(found) == len(expected):
                for f, x, a in zip(found, expected, e.args):
                    unify(x, f, a)
            elif len(expected) == 1:
                unify(expected[0], tuple_type(found), e)
            else:
                raise error_at(f"constructor {e.ctor} takes {len(expected)} arguments", e)
            return ety
        if isinstance(e, ast.Quant):
            inner = scope
            for idx, b in enumerate(e.binders):
                ty = owner.resolve_type(b.ty, scope.events) if b.ty is not None else TVar()
                self.binder_types[(id(e), idx)] = ty
                inner = inner.with_var(b.name, Var(b.name, ty))
            unify(self.typeof(e.body, inner), BOOL, e.body)
            return BOOL
        if isinstance(e, ast.Let):
            rhs = self.typeof(e.rhs, scope)
            inner = scope
            if len(e.names) == 1:
                inner = inner.with_var(e.names[0], Var(e.names[0], rhs))
            else:
                parts = [TVar() for _ in e.names]
                unify(tuple_type(parts), rhs, e.rhs)
                for name, ty in zip(e.names, parts):
                    inner = inner.with_var(name, Var(name, ty))
            return self.typeof(e.body, inner)
        if isinstance(e, ast.If):
            unify(self.typeof(e.cond, scope), BOOL, e.cond)
            then = self.typeof(e.then, scope)
            unify(then, self.typeof(e.orelse, scope), e.orelse)
            return then
        if isinstance(e, ast.Match):
            elem = TVar()
            unify(self.typeof(e.scrut, scope), ListTy(elem), e.scrut)
            nil_ty = self.typeof(e.nil_branch, scope)
            inner = scope.with_var(e.head, Var(e.head, elem)).with_var(e.tail, Var(e.tail, ListTy(elem)))
            unify(nil_ty, self.typeof(e.cons_branch, inner), e.cons_branch)
            return nil_ty
        raise error_at(f"{type(e).__name__.lower()} is not allowed in a pure expression", e)

    def _name_type(self, e: ast.Name, scope: Scope) -> Ty:
        if e.name in scope.vars:
            return scope.vars[e.name].vty
        sym = self.owner.function(e.name, scope)
        if sym is not None:
            if sym.dom != UNIT:
                raise error_at(f"function {e.name} needs an argument", e)
            return sym.cod
        if e.name in scope.preds:
            raise error_at(f"post binder {e.name} needs arguments", e)
        raise error_at(f"unbound name {e.name}", e)

    def _binop_type(self, e: ast.BinOp, scope: Scope) -> Ty:
        left = self.typeof(e.left, scope)
        right = self.typeof(e.right, scope)
        if e.op in ARITH:
            unify(left, INT, e.left)
            unify(right, INT, e.right)
            return INT
        if e.op in ORDER:
            unify(left, INT, e.left)
            unify(right, INT, e.right)
            return BOOL
        if e.op in ('=', '<>'):
            unify(left, right, e)
            return BOOL
        if e.op in LOGICAL:
            unify(left, BOOL, e.left)
            unify(right, BOOL, e.right)
            return BOOL
        if e.op == '::':
            unify(ListTy(left), right, e.right)
            return right
        if e.op == '@':
            unify(left, ListTy(TVar()), e.left)
            unify(left, right, e.right)
            return left
        raise error_at(f"unknown operator {e.op}", e)

    def _app_type(self, e: ast.App, scope: Scope) -> Ty:
        if e.fn in scope.preds and e.fn not in scope.vars:
            pred = scope.preds[e.fn]
            split = split_post_args(e.args, len(pred.arg_tys))
            if split is None:
                unify(tuple_type(list(pred.arg_tys)), self.typeof(e.args[0], scope), e.args[0])
            else:
                self._keep.extend(split)
                for arg, ty in zip(split, pred.arg_tys):
                    unify(ty, self.typeof(arg, scope), arg)
            return BOOL
        sym = self.owner.function(e.fn, scope)
        if sym is not None:
            found = tuple_type([self.typeof(a, scope) for a in e.args])
            unify(sym.dom, found, e)
            return sym.cod
        if e.fn in BUILTIN_ARITY and e.fn not in scope.vars:
            if len(e.args) != BUILTIN_ARITY[e.fn]:
                raise error_at(f"{e.fn} takes {BUILTIN_ARITY[e.fn]} arguments", e)
            args = [self.typeof(a, scope) for a in e.args]
            elem = TVar()
            if e.fn in ('head', 'tail', 'length'):
                unify(ListTy(elem), args[0], e.args[0])
                return {'head': elem, 'tail': ListTy(elem), 'length': INT}[e.fn]
            if e.fn == 'elem':
                unify(ListTy(args[0]), args[1], e.args[1])
                return BOOL
            if e.fn in ('fst', 'snd'):
                other = TVar()
                unify(PairTy(elem, other), args[0], e.args[0])
                return elem if e.fn == 'fst' else other
            return SumTy(args[0], TVar()) if e.fn == 'inl' else SumTy(TVar(), args[0])
        if e.fn in scope.vars:
            raise error_at(f"{e.fn} is not a function", e)
        raise error_at(f"unknown function {e.fn} in a pure expression", e)

    # =========================================================================
    # Terms
    # =========================================================================

    def term(self, e, scope: Scope) -> Term:
        owner = self.owner
        if isinstance(e, ast.Num):
            return int_lit(e.value)
        if isinstance(e, ast.BoolConst):
            return bool_lit(e.value)
        if isinstance(e, ast.UnitConst):
            return UNIT_LIT
        if isinstance(e, ast.Name):
            if e.name in scope.vars:
                return scope.vars[e.name]
            return Apply(owner.function(e.name, scope), UNIT_LIT)
        if isinstance(e, ast.CtorName):
            return Ctor(e.name, (), owner.ctor_type(e.name, scope, e))
        if isinstance(e, ast.Tuple_):
            return tuple_term([self.term(i, scope) for i in e.items])
        if isinstance(e, ast.ListExpr):
            return ListLit(tuple(self.term(i, scope) for i in e.items), self.type_of(e).elem)
        if isinstance(e, ast.BinOp):
            return self._binop_term(e, scope)
        if isinstance(e, ast.Not):
            return NotT(self.term(e.arg, scope))
        if isinstance(e, ast.Negate):
            return Arith('-', int_lit(0), self.term(e.arg, scope))
        if isinstance(e, ast.App):
            return self._app_term(e, scope)
        if isinstance(e, ast.CtorApp):
            ety = owner.ctor_type(e.ctor, scope, e)
            args = [self.term(a, scope) for a in e.args]
            if len(args) != len(ety.ctor_args(e.ctor)):
                args = [tuple_term(args)]
            return Ctor(e.ctor, tuple(args), ety)
        if isinstance(e, ast.Let):
            rhs = self.term(e.rhs, scope)
            inner, mapping = self._let_binders(e.names, rhs, scope)
            return subst_terms(self.term(e.body, inner), mapping)
        if isinstance(e, ast.If):
            return IteT(self.term(e.cond, scope), self.term(e.then, scope), self.term(e.orelse, scope))
        if isinstance(e, ast.Match):
            scrut = self.term(e.scrut, scope)
            inner, mapping = self._match_binders(e, scrut, scope)
            empty = Cmp('=', scrut, ListLit((), scrut.ty.elem))
            return IteT(empty, self.term(e.nil_branch, scope),
                        subst_terms(self.term(e.cons_branch, inner), mapping))
        if isinstance(e, ast.Quant):
            raise error_at("quantifiers are only allowed in specifications", e)
        raise error_at(f"{type(e).__name__.lower()} is not allowed in a pure expression", e)

    def _binop_term(self, e: ast.BinOp, scope: Scope) -> Term:
        left = self.term(e.left, scope)
        right = self.term(e.right, scope)
        op = e.op
        if op in ARITH:
            return Arith(ARITH[op], left, right)
        if op in ('=', '<>', '<', '<='):
            return Cmp(op, left, right)
        if op == '>':
            return Cmp('<', right, left)
        if op == '>=':
            return Cmp('<=', right, left)
        if op in ('&&', '/\\'):
            return BoolOp('and', left, right)
        if op in ('||', '\\/'):
            return BoolOp('or', left, right)
        if op == '==>':
            return BoolOp('or', NotT(left), right)
        if op == '::':
            return Cons(left, right)
        return Append(left, right)

    def _app_term(self, e: ast.App, scope: Scope) -> Term:
        if e.fn in scope.preds and e.fn not in scope.vars:
            raise error_at(f"post binder {e.fn} used as a value", e)
        sym = self.owner.function(e.fn, scope)
        if sym is not None:
            return Apply(sym, tuple_term([self.term(a, scope) for a in e.args]))
        args = [self.term(a, scope) for a in e.args]
        if e.fn in ('head', 'tail', 'length'):
            return ListOp(e.fn, args[0])
        if e.fn == 'elem':
            return Elem(args[0], args[1])
        if e.fn in ('fst', 'snd'):
            return Proj(1 if e.fn == 'fst' else 2, args[0])
        return Inj('l' if e.fn == 'inl' else 'r', args[0], self.type_of(e))

    def _let_binders(self, names: Sequence[str], rhs: Term, scope: Scope):
        if len(names) == 1:
            var = Var(fresh_name(names[0]), rhs.ty)
            return scope.with_var(names[0], var), {var.name: rhs}
        parts = tuple_parts(rhs, len(names)) if names else []
        mapping = {}
        for name, part in zip(names, parts):
            var = Var(fresh_name(name), part.ty)
            scope = scope.with_var(name, var)
            mapping[var.name] = part
        return scope, mapping

    def _match_binders(self, e: ast.Match, scrut: Term, scope: Scope):
        head = Var(fresh_name(e.head), scrut.ty.elem)
        tail = Var(fresh_name(e.tail), scrut.ty)
        inner = scope.with_var(e.head, head).with_var(e.tail, tail)
        return inner, {head.name: ListOp('head', scrut), tail.name: ListOp('tail', scrut)}

    # =========================================================================
    # Formulas
    # =========================================================================

    def formula(self, e, scope: Scope) -> Formula:
        if isinstance(e, ast.BoolConst):
            return TOP if e.value else BOT
        if isinstance(e, ast.BinOp):
            if e.op in ('&&', '/\\'):
                return conj(self.formula(e.left, scope), self.formula(e.right, scope))
            if e.op in ('||', '\\/'):
                return disj(self.formula(e.left, scope), self.formula(e.right, scope))
            if e.op == '==>':
                return Implies(self.formula(e.left, scope), self.formula(e.right, scope))
            if e.op == '=':
                return Eq(self.term(e.left, scope), self.term(e.right, scope))
            if e.op == '<>':
                return Neg(Eq(self.term(e.left, scope), self.term(e.right, scope)))
        if isinstance(e, ast.Not):
            return Neg(self.formula(e.arg, scope))
        if isinstance(e, ast.Quant):
            binders = []
            inner = scope
            for idx, b in enumerate(e.binders):
                var = Var(b.name, resolve(self.binder_types[(id(e), idx)]))
                binders.append(var)
                inner = inner.with_var(b.name, var)
            body = self.formula(e.body, inner)
            return forall(binders, body) if e.kind == 'forall' else exists(binders, body)
        if isinstance(e, ast.App) and e.fn in scope.preds and e.fn not in scope.vars:
            return self._post_application(e, scope)
        if isinstance(e, ast.If):
            cond = self.formula(e.cond, scope)
            return conj(Implies(cond, self.formula(e.then, scope)),
                        Implies(Neg(cond), self.formula(e.orelse, scope)))
        if isinstance(e, ast.Let):
            rhs = self.term(e.rhs, scope)
            inner, mapping = self._let_binders(e.names, rhs, scope)
            return subst_terms(self.formula(e.body, inner), mapping)
        if isinstance(e, ast.Match):
            scrut = self.term(e.scrut, scope)
            inner, mapping = self._match_binders(e, scrut, scope)
            empty = Eq(scrut, ListLit((), scrut.ty.elem))
            return conj(Implies(empty, self.formula(e.nil_branch, scope)),
                        Implies(Neg(empty), subst_terms(self.formula(e.cons_branch, inner), mapping)))
        return Atom(self.term(e, scope))

    def _post_application(self, e: ast.App, scope: Scope) -> Formula:
        pred = scope.preds[e.fn]
        arity = len(pred.arg_tys)
        split = split_post_args(e.args, arity)
        if split is None:
            args = tuple_parts(self.term(e.args[0], scope), arity)
        else:
            args = [self.term(a, scope) for a in split]
        return PApply(pred, tuple(args))


if __name__ == "__main__":
    from core.surface_parser import parse_program
    from core.specmonads import wst
    program = parse_program("let f (x : int) : St unit (fun p s0 -> forall y. y = s0 ==> p ((), y + x)) = ()")
    decl = program.definitions()[0]
    elab = TermElaborator(Declarations())
    scope = Scope().with_var('x', Var('x', INT))
    print(elab.spec(decl.spec, wst(INT).shape(UNIT), scope).pretty())
