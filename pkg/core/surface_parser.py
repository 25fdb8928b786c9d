#!/usr/bin/env python3
"""
Surface Parser - lark LALR grammar for .eff programs

Turns program text into the surface AST. Comments and unicode logic
symbols are handled by the source preprocessor first; reported positions
refer to the original text.
"""

import logging
from functools import lru_cache
from typing import List, Optional

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

# Handle imports
try:
    from core import surface_ast as ast
    from core.errors import ParseError
    from utils.text_utils import PreprocessedSource, SourceError, SourcePreprocessor
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core import surface_ast as ast
    from core.errors import ParseError
    from utils.text_utils import PreprocessedSource, SourceError, SourcePreprocessor

logger = logging.getLogger(__name__)


GRAMMAR = r'''
start: decl*

?decl: type_decl | effect_decl | obs_decl | logic_decl | let_decl

type_decl: "type" LNAME "=" type                          -> type_alias
         | "type" LNAME "=" "|"? ctor_decl ("|" ctor_decl)*  -> type_enum
ctor_decl: UNAME ("of" type)?

effect_decl: "effect" UNAME "{" op_sig* "}"
op_sig: "|" LNAME "(" LNAME ":" type ")" ":" "(" LNAME ":" type ")" requires_clause? ensures_clause?
requires_clause: "requires" expr
ensures_clause: "ensures" expr

obs_decl: "observation" UNAME "=" obs_key obs_params?
obs_key: LNAME ("-" LNAME)*
obs_params: "{" obs_param ("," obs_param)* "}"
obs_param: UNAME "=" type

logic_decl: "logic" LNAME params ":" type "=" expr
let_decl: "let" rec_flag? LNAME params ":" UNAME type spec "=" expr
rec_flag: "rec" measure?
measure: "{" "measure" expr "}"
params: param*
param: "(" LNAME ":" type ")"  -> typed_param
     | "(" ")"                 -> unit_param

?type: sum_type
     | sum_type "->" type      -> fun_type
?sum_type: sum_type "+" prod_type -> sum_type_
         | prod_type
?prod_type: app_type ("*" app_type)+ -> prod_type_
          | app_type
?app_type: "list" app_type     -> list_type
         | LNAME               -> named_type
         | "(" type ")"

spec: "(" "fun" LNAME+ "->" expr ")"                               -> spec_lambda
    | "(" "requires" expr "ensures" "fun" LNAME+ "->" expr ")"     -> spec_prepost
    | "(" "ensures" "fun" LNAME+ "->" expr ")"                     -> spec_post
    | "(" "requires" expr ")"                                      -> spec_pre

?expr: "let" pattern "=" expr "in" expr                            -> let_expr
     | "if" expr "then" expr "else" expr                           -> if_expr
     | "match" expr "with" "|"? "[" "]" "->" expr "|" LNAME "::" LNAME "->" expr  -> match_expr
     | "try" expr "with" LNAME "->" expr try_spec?                 -> try_expr
     | quant
     | seq_expr

try_spec: "spec" spec

?quant: "forall" qbinder+ "." expr   -> forall
      | "exists" qbinder+ "." expr   -> exists
qbinder: LNAME
       | "(" LNAME ":" type ")"

pattern: LNAME                        -> pvar
       | "(" ")"                      -> punit
       | "(" LNAME ("," LNAME)+ ")"   -> ptuple

?seq_expr: imp ";" expr    -> seq
         | imp

?imp: disj "==>" imp_rhs   -> implies
    | disj
?imp_rhs: imp | quant

?disj: disj "\\/" conj     -> or_
     | disj "||" conj      -> or_
     | conj
?conj: conj "/\\" neg      -> and_
     | conj "&&" neg       -> and_
     | neg
?neg: "~" neg              -> not_
    | "not" neg            -> not_
    | cmp
?cmp: cons "=" cons        -> eq
    | cons "<>" cons       -> ne
    | cons "<" cons        -> lt
    | cons "<=" cons       -> le
    | cons ">" cons        -> gt
    | cons ">=" cons       -> ge
    | cons
?cons: sum "::" cons       -> cons_
     | sum "@" cons        -> append
     | sum
?sum: sum "+" prod         -> add
    | sum "-" prod         -> sub
    | prod
?prod: prod "*" unary      -> mul
     | prod "/" unary      -> div
     | prod "%" unary      -> mod
     | unary
?unary: "-" unary          -> negate
      | app
?app: LNAME arg+           -> app
    | UNAME arg+           -> ctor_app
    | "reify" UNAME arg    -> reify
    | arg
?arg: INT                                  -> num
    | "true"                               -> true
    | "false"                              -> false
    | "(" ")"                              -> unit
    | LNAME                                -> name
    | UNAME                                -> ctor_name
    | "(" expr ")"
    | "(" expr ("," expr)+ ")"             -> tuple
    | "(" expr ":" spec ")"                -> ascribe
    | "[" "]"                              -> nil
    | "[" imp (";" imp)* "]"               -> list_lit
    | "handle" UNAME arg "returns" "fun" LNAME "->" expr "ensures" "fun" LNAME "->" expr "with" return_clause op_clause* "end"  -> handle
    | "for" LNAME "in" expr "invariant" spec "do" expr "done"  -> for_in
    | "map" LNAME "in" expr "do" expr "done"                   -> map_in

return_clause: "|" "return" LNAME "->" expr
op_clause: "|" LNAME LNAME LNAME "->" expr

LNAME: /[a-z_][A-Za-z0-9_']*/
UNAME: /[A-Z][A-Za-z0-9_']*/
INT: /[0-9]+/

%import common.WS
%ignore WS
'''


@lru_cache(maxsize=1)
def _lark() -> Lark:
    return Lark(GRAMMAR, start='start', parser='lalr', propagate_positions=True)


def _binop(op: str):
    def build(self, meta, left, right):
        return ast.BinOp(self._span(meta), op, left, right)
    return build


@v_args(meta=True, inline=True)
class AstBuilder(Transformer):
    """Builds surface AST nodes from the lark parse tree"""

    def __init__(self, source: Optional[PreprocessedSource] = None):
        super().__init__()
        self.source = source

    def _span(self, meta):
        line = getattr(meta, 'line', None)
        if line is None:
            return None
        column = getattr(meta, 'column', 1)
        if self.source is not None:
            return self.source.position_of(line, column)
        return line, column

    # ---- program and declarations ----

    def start(self, meta, *decls):
        return ast.Program(list(decls))

    def type_alias(self, meta, name, ty):
        return ast.TypeAlias(self._span(meta), str(name), ty)

    def type_enum(self, meta, name, *ctors):
        return ast.EnumDecl(self._span(meta), str(name), list(ctors))

    def ctor_decl(self, meta, name, ty=None):
        return ast.CtorDecl(str(name), ty)

    def effect_decl(self, meta, name, *ops):
        return ast.EffectDecl(self._span(meta), str(name), list(ops))

    def op_sig(self, meta, name, inp, inp_ty, out, out_ty, *clauses):
        found = dict(clauses)
        return ast.OpSigAst(str(name), str(inp), inp_ty, str(out), out_ty,
                            found.get('requires'), found.get('ensures'), self._span(meta))

    def requires_clause(self, meta, e):
        return 'requires', e

    def ensures_clause(self, meta, e):
        return 'ensures', e

    def obs_decl(self, meta, label, key, params=None):
        return ast.ObservationDecl(self._span(meta), str(label), key, list(params or []))

    def obs_key(self, meta, *parts):
        return '-'.join(str(p) for p in parts)

    def obs_params(self, meta, *params):
        return list(params)

    def obs_param(self, meta, name, ty):
        return str(name), ty

    def logic_decl(self, meta, name, params, result, body):
        return ast.LogicDecl(self._span(meta), str(name), params, result, body)

    def let_decl(self, meta, *children):
        children = list(children)
        recursive, measure = False, None
        if isinstance(children[0], tuple):
            _, measure = children.pop(0)
            recursive = True
        name, params, label, result, spec, body = children
        return ast.LetDecl(self._span(meta), str(name), params, str(label), result, spec, body,
                           recursive, measure)

    def rec_flag(self, meta, measure=None):
        return 'rec', measure

    def measure(self, meta, e):
        return e

    def params(self, meta, *params):
        return [p for p in params if p is not None]

    def typed_param(self, meta, name, ty):
        return ast.Param(str(name), ty)

    def unit_param(self, meta):
        return None

    # ---- types ----

    def fun_type(self, meta, dom, cod):
        return ast.FunType(self._span(meta), dom, cod)

    def sum_type_(self, meta, left, right):
        return ast.SumType(self._span(meta), left, right)

    def prod_type_(self, meta, *items):
        result = items[-1]
        for item in reversed(items[:-1]):
            result = ast.PairType(self._span(meta), item, result)
        return result

    def list_type(self, meta, elem):
        return ast.ListType(self._span(meta), elem)

    def named_type(self, meta, name):
        return ast.NamedType(self._span(meta), str(name))

    # ---- specifications ----

    def spec_lambda(self, meta, *children):
        *binders, body = children
        return ast.SpecLambda(self._span(meta), [str(b) for b in binders], body)

    def spec_prepost(self, meta, pre, *children):
        *binders, post = children
        return ast.SpecPrePost(self._span(meta), pre, [str(b) for b in binders], post)

    def spec_post(self, meta, *children):
        *binders, post = children
        return ast.SpecPrePost(self._span(meta), None, [str(b) for b in binders], post)

    def spec_pre(self, meta, pre):
        return ast.SpecPrePost(self._span(meta), pre, [], None)

    # ---- expressions ----

    def let_expr(self, meta, names, rhs, body):
        return ast.Let(self._span(meta), names, rhs, body)

    def pvar(self, meta, name):
        return [str(name)]

    def punit(self, meta):
        return []

    def ptuple(self, meta, *names):
        return [str(n) for n in names]

    def if_expr(self, meta, cond, then, orelse):
        return ast.If(self._span(meta), cond, then, orelse)

    def match_expr(self, meta, scrut, nil_branch, head, tail, cons_branch):
        return ast.Match(self._span(meta), scrut, nil_branch, str(head), str(tail), cons_branch)

    def try_expr(self, meta, body, var, handler, spec=None):
        return ast.Try(self._span(meta), body, str(var), handler, spec)

    def try_spec(self, meta, spec):
        return spec

    def forall(self, meta, *children):
        *binders, body = children
        return ast.Quant(self._span(meta), 'forall', list(binders), body)

    def exists(self, meta, *children):
        *binders, body = children
        return ast.Quant(self._span(meta), 'exists', list(binders), body)

    def qbinder(self, meta, name, ty=None):
        return ast.Binder(str(name), ty)

    def seq(self, meta, first, second):
        return ast.Seq(self._span(meta), first, second)

    implies = _binop('==>')
    or_ = _binop('\\/')
    and_ = _binop('/\\')
    eq = _binop('=')
    ne = _binop('<>')
    lt = _binop('<')
    le = _binop('<=')
    gt = _binop('>')
    ge = _binop('>=')
    cons_ = _binop('::')
    append = _binop('@')
    add = _binop('+')
    sub = _binop('-')
    mul = _binop('*')
    div = _binop('/')
    mod = _binop('%')

    def not_(self, meta, arg):
        return ast.Not(self._span(meta), arg)

    def negate(self, meta, arg):
        if isinstance(arg, ast.Num):
            return ast.Num(self._span(meta), -arg.value)
        return ast.Negate(self._span(meta), arg)

    def app(self, meta, fn, *args):
        return ast.App(self._span(meta), str(fn), list(args))

    def ctor_app(self, meta, ctor, *args):
        return ast.CtorApp(self._span(meta), str(ctor), list(args))

    def reify(self, meta, label, body):
        return ast.Reify(self._span(meta), str(label), body)

    def num(self, meta, tok):
        return ast.Num(self._span(meta), int(tok))

    def true(self, meta):
        return ast.BoolConst(self._span(meta), True)

    def false(self, meta):
        return ast.BoolConst(self._span(meta), False)

    def unit(self, meta):
        return ast.UnitConst(self._span(meta))

    def name(self, meta, tok):
        return ast.Name(self._span(meta), str(tok))

    def ctor_name(self, meta, tok):
        return ast.CtorName(self._span(meta), str(tok))

    def tuple(self, meta, *items):
        return ast.Tuple_(self._span(meta), list(items))

    def ascribe(self, meta, body, spec):
        return ast.Ascribe(self._span(meta), body, spec)

    def nil(self, meta):
        return ast.ListExpr(self._span(meta), [])

    def list_lit(self, meta, *items):
        return ast.ListExpr(self._span(meta), list(items))

    def handle(self, meta, effect, body, ret_binder, ret_post, res_binder, res_post,
               return_clause, *clauses):
        return_var, return_body = return_clause
        return ast.Handle(self._span(meta), str(effect), body, str(ret_binder), ret_post,
                          str(res_binder), res_post, return_var, return_body, list(clauses))

    def return_clause(self, meta, var, body):
        return str(var), body

    def op_clause(self, meta, op, inp, k, body):
        return ast.OpClauseAst(str(op), str(inp), str(k), body, self._span(meta))

    def for_in(self, meta, var, items, spec, body):
        return ast.ForIn(self._span(meta), str(var), items, spec, body)

    def map_in(self, meta, var, items, body):
        return ast.MapIn(self._span(meta), str(var), items, body)


def _expected(e: UnexpectedInput) -> List[str]:
    expected = getattr(e, 'expected', None) or getattr(e, 'allowed', None) or ()
    return sorted(str(x) for x in expected)


def parse_program(text: str) -> ast.Program:
    """
    Parse program text

    Args:
        text: UTF-8 program text

    Returns:
        Program (empty for an empty or comment-only text)

    Raises:
        ParseError: With the original position and the expected tokens
    """
    try:
        source = SourcePreprocessor.preprocess(text)
    except SourceError as e:
        raise ParseError(str(e), e.line, e.column) from None
    if not source.text.strip():
        return ast.Program([])
    try:
        tree = _lark().parse(source.text)
    except UnexpectedEOF as e:
        lines = source.text.rstrip().split('\n')
        line, column = source.position_of(len(lines), len(lines[-1]) + 1)
        raise ParseError("unexpected end of input", line, column, _expected(e)) from None
    except (UnexpectedToken, UnexpectedCharacters) as e:
        token = getattr(e, 'token', None)
        if token is not None and token.type == '$END' or not e.line or e.line < 1:
            lines = source.text.rstrip().split('\n')
            line, column = source.position_of(len(lines), len(lines[-1]) + 1)
            raise ParseError("unexpected end of input", line, column, _expected(e)) from None
        line, column = source.position_of(e.line, e.column)
        found = token if token is not None else getattr(e, 'char', '')
        raise ParseError(f"unexpected {str(found)!r}", line, column, _expected(e)) from None
    try:
        program = AstBuilder(source).transform(tree)
    except VisitError as e:
        raise ParseError(str(e.orig_exc)) from None
    logger.debug(f"Parsed {len(program.decls)} declarations")
    return program


def parse_file(path) -> ast.Program:
    with open(path, 'r', encoding='utf-8') as f:
        return parse_program(f.read())


if __name__ == "__main__":
    sample = """
    observation ND = nd-demonic
    let guard (b : bool) : ND unit (fun p -> b ==> p ()) = if b then () else fail ()
    """
    for decl in parse_program(sample).decls:
        print(decl)
