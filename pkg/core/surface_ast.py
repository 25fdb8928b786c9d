#!/usr/bin/env python3
"""
Surface AST - Parsed form of .eff programs

Expressions and formulas share one node family; the elaborator decides
from context whether a node is read as a computation, a term or a formula.
Every node carries the (line, column) it starts at.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

Span = Optional[Tuple[int, int]]


# =============================================================================
# Types
# =============================================================================

@dataclass
class TypeExpr:
    span: Span = field(default=None, compare=False, repr=False)


@dataclass
class NamedType(TypeExpr):
    name: str = ""


@dataclass
class ListType(TypeExpr):
    elem: TypeExpr = None


@dataclass
class PairType(TypeExpr):
    fst: TypeExpr = None
    snd: TypeExpr = None


@dataclass
class SumType(TypeExpr):
    left: TypeExpr = None
    right: TypeExpr = None


@dataclass
class FunType(TypeExpr):
    dom: TypeExpr = None
    cod: TypeExpr = None


# =============================================================================
# Expressions
# =============================================================================

@dataclass
class Expr:
    span: Span = field(default=None, compare=False, repr=False)


@dataclass
class Num(Expr):
    value: int = 0


@dataclass
class BoolConst(Expr):
    value: bool = False


@dataclass
class UnitConst(Expr):
    pass


@dataclass
class Name(Expr):
    """Lowercase identifier: variable, parameter, binder"""
    name: str = ""


@dataclass
class CtorName(Expr):
    """Nullary use of a constructor"""
    name: str = ""


@dataclass
class Tuple_(Expr):
    items: List[Expr] = field(default_factory=list)


@dataclass
class ListExpr(Expr):
    items: List[Expr] = field(default_factory=list)


@dataclass
class BinOp(Expr):
    """+ - * / % = <> < <= > >= && || /\\ \\/ ==> :: @"""
    op: str = ""
    left: Expr = None
    right: Expr = None


@dataclass
class Not(Expr):
    arg: Expr = None


@dataclass
class Negate(Expr):
    arg: Expr = None


@dataclass
class App(Expr):
    """f a1 ... an: operation, definition, logic function, builtin or post binder"""
    fn: str = ""
    args: List[Expr] = field(default_factory=list)


@dataclass
class CtorApp(Expr):
    ctor: str = ""
    args: List[Expr] = field(default_factory=list)


@dataclass
class Binder:
    name: str
    ty: Optional[TypeExpr] = None


@dataclass
class Quant(Expr):
    kind: str = "forall"     # 'forall' | 'exists'
    binders: List[Binder] = field(default_factory=list)
    body: Expr = None


@dataclass
class Let(Expr):
    names: List[str] = field(default_factory=list)   # one name, or a tuple pattern
    rhs: Expr = None
    body: Expr = None


@dataclass
class Seq(Expr):
    first: Expr = None
    second: Expr = None


@dataclass
class If(Expr):
    cond: Expr = None
    then: Expr = None
    orelse: Expr = None


@dataclass
class Match(Expr):
    """match e with [] -> nil_branch | head :: tail -> cons_branch"""
    scrut: Expr = None
    nil_branch: Expr = None
    head: str = ""
    tail: str = ""
    cons_branch: Expr = None


@dataclass
class Try(Expr):
    body: Expr = None
    var: str = ""
    handler: Expr = None
    spec: Optional['SpecAst'] = None


@dataclass
class Reify(Expr):
    label: str = ""
    body: Expr = None


@dataclass
class OpClauseAst:
    op: str
    inp: str
    k: str
    body: Expr
    span: Span = None


@dataclass
class Handle(Expr):
    """handle EFFECT body returns fun a -> Q ensures fun b -> R with | return a -> ... | op x k -> ... end"""
    effect: str = ""
    body: Expr = None
    ret_binder: str = ""
    ret_post: Expr = None
    res_binder: str = ""
    res_post: Expr = None
    return_var: str = ""
    return_body: Expr = None
    clauses: List[OpClauseAst] = field(default_factory=list)


@dataclass
class ForIn(Expr):
    var: str = ""
    items: Expr = None
    invariant: 'SpecAst' = None
    body: Expr = None


@dataclass
class MapIn(Expr):
    var: str = ""
    items: Expr = None
    body: Expr = None


@dataclass
class Ascribe(Expr):
    """(e : spec), weakening e's specification"""
    body: Expr = None
    spec: 'SpecAst' = None


# =============================================================================
# Specifications
# =============================================================================

@dataclass
class SpecAst:
    span: Span = field(default=None, compare=False, repr=False)


@dataclass
class SpecLambda(SpecAst):
    """(fun b1 ... bn -> body), binders matched by name or position"""
    binders: List[str] = field(default_factory=list)
    body: Expr = None


@dataclass
class SpecPrePost(SpecAst):
    """(requires pre ensures fun r ... -> post)"""
    pre: Optional[Expr] = None
    post_binders: List[str] = field(default_factory=list)
    post: Optional[Expr] = None


# =============================================================================
# Declarations
# =============================================================================

@dataclass
class Decl:
    span: Span = field(default=None, compare=False, repr=False)


@dataclass
class TypeAlias(Decl):
    name: str = ""
    ty: TypeExpr = None


@dataclass
class CtorDecl:
    name: str
    arg: Optional[TypeExpr] = None


@dataclass
class EnumDecl(Decl):
    name: str = ""
    ctors: List[CtorDecl] = field(default_factory=list)


@dataclass
class OpSigAst:
    name: str
    inp: str
    inp_ty: TypeExpr
    out: str
    out_ty: TypeExpr
    requires: Optional[Expr] = None
    ensures: Optional[Expr] = None
    span: Span = None


@dataclass
class EffectDecl(Decl):
    name: str = ""
    ops: List[OpSigAst] = field(default_factory=list)


@dataclass
class ObservationDecl(Decl):
    label: str = ""
    key: str = ""
    params: List[Tuple[str, TypeExpr]] = field(default_factory=list)


@dataclass
class Param:
    name: str
    ty: TypeExpr


@dataclass
class LogicDecl(Decl):
    name: str = ""
    params: List[Param] = field(default_factory=list)
    result: TypeExpr = None
    body: Expr = None


@dataclass
class LetDecl(Decl):
    name: str = ""
    params: List[Param] = field(default_factory=list)
    label: str = ""
    result: TypeExpr = None
    spec: SpecAst = None
    body: Expr = None
    recursive: bool = False
    measure: Optional[Expr] = None


@dataclass
class Program:
    decls: List[Decl] = field(default_factory=list)

    def definitions(self) -> List[LetDecl]:
        return [d for d in self.decls if isinstance(d, LetDecl)]


def walk(node, skip=None):
    """
    Every AST node under node (itself included), depth first, source order

    Args:
        skip: Nodes for which skip(node) holds are left out with their subtrees
    """
    if node is None:
        return
    if isinstance(node, (list, tuple)):
        for item in node:
            yield from walk(item, skip)
        return
    if not hasattr(node, '__dataclass_fields__'):
        return
    if skip is not None and skip(node):
        return
    yield node
    for name in node.__dataclass_fields__:
        if name == 'span':
            continue
        yield from walk(getattr(node, name), skip)
