#!/usr/bin/env python3
"""
Surface Printer - Programs back to .eff source

Output reparses to an equal AST (spans aside). Compound subexpressions
are parenthesized wherever the grammar would otherwise read further.
"""

from typing import List

# Handle imports
try:
    from core import surface_ast as ast
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core import surface_ast as ast

INDENT = '  '

# Nodes printed as a single grammar argument, needing no parentheses
_ATOMIC = (ast.BoolConst, ast.UnitConst, ast.Name, ast.CtorName, ast.Tuple_, ast.ListExpr,
           ast.Handle, ast.ForIn, ast.MapIn, ast.Ascribe)


# =============================================================================
# Types
# =============================================================================

def format_type_expr(t: ast.TypeExpr) -> str:
    if isinstance(t, ast.NamedType):
        return t.name
    if isinstance(t, ast.ListType):
        return f"list {_type_atom(t.elem)}"
    if isinstance(t, ast.PairType):
        fst = _type_atom(t.fst) if not isinstance(t.fst, ast.ListType) else format_type_expr(t.fst)
        snd = format_type_expr(t.snd) if isinstance(t.snd, ast.PairType) else _type_factor(t.snd)
        return f"{fst} * {snd}"
    if isinstance(t, ast.SumType):
        left = format_type_expr(t.left) if not isinstance(t.left, ast.FunType) else f"({format_type_expr(t.left)})"
        return f"{left} + {_type_factor(t.right)}"
    if isinstance(t, ast.FunType):
        dom = f"({format_type_expr(t.dom)})" if isinstance(t.dom, ast.FunType) else format_type_expr(t.dom)
        return f"{dom} -> {format_type_expr(t.cod)}"
    raise ValueError(f"cannot print type {t!r}")


def _type_factor(t: ast.TypeExpr) -> str:
    if isinstance(t, (ast.NamedType, ast.ListType)):
        return format_type_expr(t)
    return f"({format_type_expr(t)})"


def _type_atom(t: ast.TypeExpr) -> str:
    if isinstance(t, ast.NamedType):
        return t.name
    return f"({format_type_expr(t)})"


# =============================================================================
# Expressions
# =============================================================================

def atom(e: ast.Expr) -> str:
    """e as a single argument"""
    if isinstance(e, _ATOMIC) or (isinstance(e, ast.Num) and e.value >= 0):
        return format_expr(e)
    return f"({format_expr(e)})"


def _binder(b: ast.Binder) -> str:
    return b.name if b.ty is None else f"({b.name} : {format_type_expr(b.ty)})"


def _pattern(names: List[str]) -> str:
    if len(names) == 1:
        return names[0]
    return f"({', '.join(names)})"


def format_expr(e: ast.Expr) -> str:
    if isinstance(e, ast.Num):
        return str(e.value) if e.value >= 0 else f"-{-e.value}"
    if isinstance(e, ast.BoolConst):
        return 'true' if e.value else 'false'
    if isinstance(e, ast.UnitConst):
        return '()'
    if isinstance(e, (ast.Name, ast.CtorName)):
        return e.name
    if isinstance(e, ast.Tuple_):
        return f"({', '.join(format_expr(i) for i in e.items)})"
    if isinstance(e, ast.ListExpr):
        return f"[{'; '.join(atom(i) for i in e.items)}]"
    if isinstance(e, ast.BinOp):
        return f"{atom(e.left)} {e.op} {atom(e.right)}"
    if isinstance(e, ast.Not):
        return f"~{atom(e.arg)}"
    if isinstance(e, ast.Negate):
        return f"-{atom(e.arg)}"
    if isinstance(e, ast.App):
        return f"{e.fn} {' '.join(atom(a) for a in e.args)}"
    if isinstance(e, ast.CtorApp):
        return f"{e.ctor} {' '.join(atom(a) for a in e.args)}"
    if isinstance(e, ast.Reify):
        return f"reify {e.label} {atom(e.body)}"
    if isinstance(e, ast.Quant):
        return f"{e.kind} {' '.join(_binder(b) for b in e.binders)}. {format_expr(e.body)}"
    if isinstance(e, ast.Let):
        return f"let {_pattern(e.names)} = {format_expr(e.rhs)} in\n{format_expr(e.body)}"
    if isinstance(e, ast.Seq):
        return f"{atom(e.first)};\n{format_expr(e.second)}"
    if isinstance(e, ast.If):
        return f"if {format_expr(e.cond)} then {atom(e.then)} else {atom(e.orelse)}"
    if isinstance(e, ast.Match):
        return (f"match {format_expr(e.scrut)} with | [] -> {atom(e.nil_branch)} "
                f"| {e.head} :: {e.tail} -> {atom(e.cons_branch)}")
    if isinstance(e, ast.Try):
        text = f"try {format_expr(e.body)} with {e.var} -> {atom(e.handler)}"
        if e.spec is not None:
            text += f" spec {format_spec(e.spec)}"
        return text
    if isinstance(e, ast.Handle):
        clauses = ''.join(f" | {c.op} {c.inp} {c.k} -> {atom(c.body)}" for c in e.clauses)
        return (f"handle {e.effect} {atom(e.body)} returns fun {e.ret_binder} -> {atom(e.ret_post)} "
                f"ensures fun {e.res_binder} -> {atom(e.res_post)} "
                f"with | return {e.return_var} -> {atom(e.return_body)}{clauses} end")
    if isinstance(e, ast.ForIn):
        return (f"for {e.var} in {format_expr(e.items)} invariant {format_spec(e.invariant)} "
                f"do {format_expr(e.body)} done")
    if isinstance(e, ast.MapIn):
        return f"map {e.var} in {format_expr(e.items)} do {format_expr(e.body)} done"
    if isinstance(e, ast.Ascribe):
        return f"({format_expr(e.body)} : {format_spec(e.spec)})"
    raise ValueError(f"cannot print expression {e!r}")


def format_spec(s: ast.SpecAst) -> str:
    if isinstance(s, ast.SpecLambda):
        return f"(fun {' '.join(s.binders)} -> {format_expr(s.body)})"
    if isinstance(s, ast.SpecPrePost):
        parts = []
        if s.pre is not None:
            parts.append(f"requires {atom(s.pre)}")
        if s.post is not None:
            parts.append(f"ensures fun {' '.join(s.post_binders)} -> {format_expr(s.post)}")
        return f"({' '.join(parts)})"
    raise ValueError(f"cannot print specification {s!r}")


# =============================================================================
# Declarations
# =============================================================================

def _params(params: List[ast.Param]) -> str:
    if not params:
        return '()'
    return ' '.join(f"({p.name} : {format_type_expr(p.ty)})" for p in params)


def format_decl(d: ast.Decl) -> str:
    if isinstance(d, ast.TypeAlias):
        return f"type {d.name} = {format_type_expr(d.ty)}"
    if isinstance(d, ast.EnumDecl):
        ctors = ' '.join(f"| {c.name}" + (f" of {_type_factor(c.arg)}" if c.arg is not None else '')
                         for c in d.ctors)
        return f"type {d.name} = {ctors}"
    if isinstance(d, ast.EffectDecl):
        lines = [f"effect {d.name} {{"]
        for op in d.ops:
            line = (f"{INDENT}| {op.name} ({op.inp} : {format_type_expr(op.inp_ty)}) : "
                    f"({op.out} : {format_type_expr(op.out_ty)})")
            if op.requires is not None:
                line += f" requires {atom(op.requires)}"
            if op.ensures is not None:
                line += f" ensures {atom(op.ensures)}"
            lines.append(line)
        lines.append('}')
        return '\n'.join(lines)
    if isinstance(d, ast.ObservationDecl):
        text = f"observation {d.label} = {d.key}"
        if d.params:
            text += ' {' + ', '.join(f"{k} = {format_type_expr(t)}" for k, t in d.params) + '}'
        return text
    if isinstance(d, ast.LogicDecl):
        return (f"logic {d.name} {_params(d.params)} : {format_type_expr(d.result)} =\n"
                f"{INDENT}{format_expr(d.body)}")
    if isinstance(d, ast.LetDecl):
        head = 'let'
        if d.recursive:
            head += ' rec'
            if d.measure is not None:
                head += f" {{ measure {format_expr(d.measure)} }}"
        return (f"{head} {d.name} {_params(d.params)} : {d.label} {_type_atom(d.result)}\n"
                f"{INDENT}{format_spec(d.spec)} =\n{INDENT}{format_expr(d.body)}")
    raise ValueError(f"cannot print declaration {d!r}")


def format_program(program: ast.Program) -> str:
    """Source text of a program"""
    return '\n\n'.join(format_decl(d) for d in program.decls) + '\n'
