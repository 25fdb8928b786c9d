#!/usr/bin/env python3
"""
Elaborator - From parsed programs to annotated computations

Declarations are processed in source order. Each top-level definition is
elaborated against the observation its label names: the body becomes a
DComp built with the Dijkstra combinators, the declared specification
annotates it, and obligations_of (or fix, for let rec) produces the
numbered obligations the prover discharges.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

# Handle imports
try:
    from core import surface_ast as ast
    from core.dijkstra import (
        DComp, Obligation, annotate, d_absurd, d_bind, d_call, d_ite, d_let, d_op, d_ret, d_weaken,
        for_in, inline_calls, map_d, obligations_of, with_definition,
    )
    from core.effects import OpDecl, Signature, free_sig, sig_event_type
    from core.errors import CarrierTooLarge, ElaborationError, NonTermination, VerifierError
    from core.handlers import (
        Measure, OpClause, OpContract, ReturnClause, contract_observation, fix, handle_upfront,
        recursive_observation, reify, try_catch,
    )
    from core.logic import (
        BOOL, INT, TOP, UNIT, Cmp, EnumTy, FunDef, FunSym, FunTy, ListLit, ListOp, ListTy, Ty, Var, VoidTy,
        carrier, fresh_name, normalize_term, subst_terms, tuple_parts, tuple_term, tuple_type,
    )
    from core.observations import REGISTRY_KEYS, Observation, build_observation
    from core.pretty import format_type, format_value
    from core.specmonads import SpecExpr, WPure
    from core.term_elaborator import Declarations, Scope, TermElaborator, error_at
    from core.vcgen import wp
    from utils.config import Config, DomainConfig
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core import surface_ast as ast
    from core.dijkstra import (
        DComp, Obligation, annotate, d_absurd, d_bind, d_call, d_ite, d_let, d_op, d_ret, d_weaken,
        for_in, inline_calls, map_d, obligations_of, with_definition,
    )
    from core.effects import OpDecl, Signature, free_sig, sig_event_type
    from core.errors import CarrierTooLarge, ElaborationError, NonTermination, VerifierError
    from core.handlers import (
        Measure, OpClause, OpContract, ReturnClause, contract_observation, fix, handle_upfront,
        recursive_observation, reify, try_catch,
    )
    from core.logic import (
        BOOL, INT, TOP, UNIT, Cmp, EnumTy, FunDef, FunSym, FunTy, ListLit, ListOp, ListTy, Ty, Var, VoidTy,
        carrier, fresh_name, normalize_term, subst_terms, tuple_parts, tuple_term, tuple_type,
    )
    from core.observations import REGISTRY_KEYS, Observation, build_observation
    from core.pretty import format_type, format_value
    from core.specmonads import SpecExpr, WPure
    from core.term_elaborator import Declarations, Scope, TermElaborator, error_at
    from core.vcgen import wp
    from utils.config import Config, DomainConfig

logger = logging.getLogger(__name__)


# Labels usable without an observation declaration
PRELUDE_LABELS = {
    'Pure': 'pure',
    'St': 'st',
    'Exc': 'exc',
    'EXC': 'exc',
    'ND': 'nd-demonic',
    'NDD': 'nd-demonic',
    'NDA': 'nd-angelic',
    'IOFree': 'io-free',
    'IOHist': 'io-hist',
    'IOHistSt': 'io-histst',
    'IOST': 'iost',
}

# Alternative operation names accepted in programs
OP_ALIASES = {'pick': 'choice', 'input': 'read', 'output': 'write', 'raise': 'throw'}

EFFECT_NODES = (ast.Seq, ast.Try, ast.Reify, ast.Handle, ast.ForIn, ast.MapIn, ast.Ascribe)


@dataclass
class DefinedFunction:
    """An already verified definition, callable from later ones"""
    name: str
    label: str
    params: Tuple[Var, ...]
    declared: SpecExpr
    comp: object
    recursive: bool = False
    calls: FrozenSet[str] = frozenset()


@dataclass
class ElaboratedDefinition:
    """
    A definition ready for discharge

    Attributes:
        name: Definition name
        label: Source label (St, Exc, a declared observation, ...)
        obs_key: Registry key the label resolved to
        result_ty: Result type
        declared: Declared specification
        inferred: θ of the body, normalized
        obligations: Numbered obligations
        outputs: Printed argument -> printed result, for executable recursive definitions
        origin: Source position
        dcomp: The annotated computation
        warnings: Non-fatal findings carried into the report
    """
    name: str
    label: str
    obs_key: str
    result_ty: Ty
    declared: SpecExpr
    inferred: SpecExpr
    obligations: List[Obligation] = field(default_factory=list)
    outputs: Dict[str, str] = field(default_factory=dict)
    origin: Optional[Tuple[int, int]] = None
    dcomp: Optional[DComp] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def result_type(self) -> str:
        return format_type(self.result_ty)


# =============================================================================
# Computations
# =============================================================================

class ComputationElaborator:
    """
    Elaborates an effectful body under one observation

    Args:
        owner: Program elaborator (declarations, earlier definitions)
        obs: Observation the body is built over
        rec_name: Name of the enclosing let rec, whose calls become the call operation
    """

    def __init__(self, owner: 'Elaborator', obs: Observation, rec_name: Optional[str] = None):
        self.owner = owner
        self.obs = obs
        self.rec_name = rec_name
        self.terms = owner.terms
        shape = obs.target.shape(UNIT)
        self.reserved: Set[str] = set(shape.post_names) | set(shape.ctx_names)

    def under(self, obs: Observation) -> 'ComputationElaborator':
        return ComputationElaborator(self.owner, obs)

    # ---- names ----

    def local(self, name: str) -> str:
        """Program binder name that cannot capture a specification binder"""
        return fresh_name(name) if name in self.reserved else name

    def op_name(self, name: str) -> Optional[str]:
        if self.obs.sig.has(name):
            return name
        alias = OP_ALIASES.get(name)
        if alias and self.obs.sig.has(alias):
            return alias
        return None

    def call_kind(self, fn: str, scope: Scope) -> Optional[str]:
        """'rec', 'def' or 'op' when fn is an effectful call here, else None"""
        if scope.binds(fn):
            return None
        if fn == self.rec_name:
            return 'rec'
        if fn in self.owner.defined:
            return 'def'
        if self.op_name(fn) is not None:
            return 'op'
        return None

    def effectful(self, e: ast.Expr, scope: Scope) -> bool:
        for node in ast.walk(e):
            if isinstance(node, EFFECT_NODES):
                return True
            if isinstance(node, ast.App) and self.call_kind(node.fn, scope) is not None:
                return True
        return False

    # ---- dispatch ----

    def comp(self, e: ast.Expr, scope: Scope, expected: Optional[Ty] = None) -> DComp:
        if isinstance(e, ast.Seq):
            return self._seq(e, scope, expected)
        if not self.effectful(e, scope):
            return d_ret(self.terms.term(e, scope, expected), self.obs, e.span)
        if isinstance(e, ast.Let):
            return self._let(e, scope, expected)
        if isinstance(e, ast.If) and not self.effectful(e.cond, scope):
            return self._if(e, scope, expected)
        if isinstance(e, ast.Match) and not self.effectful(e.scrut, scope):
            return self._match(e, scope, expected)
        if isinstance(e, ast.App) and not any(self.effectful(a, scope) for a in e.args):
            return self._app(e, scope, expected)
        if isinstance(e, ast.Try):
            return self._try(e, scope, expected)
        if isinstance(e, ast.Reify):
            return self._reify(e, scope)
        if isinstance(e, ast.Handle):
            return self._handle(e, scope, expected)
        if isinstance(e, (ast.ForIn, ast.MapIn)):
            return self._loop(e, scope)
        if isinstance(e, ast.Ascribe):
            m = self.comp(e.body, scope, expected)
            w = self.terms.spec(e.spec, self.obs.target.shape(m.result_ty), scope)
            return d_weaken(m, w, e.span)[0]
        if isinstance(e, ast.Quant):
            raise error_at("quantifiers are only allowed in specifications", e)
        return self._lifted(e, scope, expected)

    # ---- sequencing ----

    def _let(self, e: ast.Let, scope: Scope, expected: Optional[Ty]) -> DComp:
        if not self.effectful(e.rhs, scope):
            value = self.terms.term(e.rhs, scope)
            if len(e.names) == 1:
                var = Var(self.local(e.names[0]), value.ty)
                body = self.comp(e.body, scope.with_var(e.names[0], var, value), expected)
                return d_let(var, value, body, e.span)
            tmp = Var(fresh_name('p'), value.ty)
            return d_let(tmp, value, self._destructure(e, tmp, scope, expected), e.span)

        m = self.comp(e.rhs, scope)
        if isinstance(m.result_ty, VoidTy):
            raise error_at("the bound computation never returns a value", e.rhs)
        if len(e.names) == 1:
            var = Var(self.local(e.names[0]), m.result_ty)
            body = self.comp(e.body, scope.with_var(e.names[0], var), expected)
            return d_bind(m, var, body, e.span)
        tmp = Var(fresh_name('p'), m.result_ty)
        return d_bind(m, tmp, self._destructure(e, tmp, scope, expected), e.span)

    def _destructure(self, e: ast.Let, tmp: Var, scope: Scope, expected: Optional[Ty]) -> DComp:
        if not e.names:
            if tmp.ty != UNIT:
                raise error_at(f"() pattern bound to a {format_type(tmp.ty)} value", e)
            return self.comp(e.body, scope, expected)
        try:
            parts = tuple_parts(tmp, len(e.names))
        except VerifierError:
            raise error_at(f"{len(e.names)}-tuple pattern bound to a {format_type(tmp.ty)} value", e) from None
        vars_ = [Var(self.local(name), part.ty) for name, part in zip(e.names, parts)]
        inner = scope
        for name, var in zip(e.names, vars_):
            inner = inner.with_var(name, var)
        body = self.comp(e.body, inner, expected)
        for var, part in reversed(list(zip(vars_, parts))):
            body = d_let(var, part, body, e.span)
        return body

    def _seq(self, e: ast.Seq, scope: Scope, expected: Optional[Ty]) -> DComp:
        first = self.comp(e.first, scope)
        rest = self.comp(e.second, scope, expected)
        if isinstance(first.result_ty, VoidTy):
            return d_absurd(first, rest.result_ty, e.span)
        return d_bind(first, Var(fresh_name('_'), first.result_ty), rest, e.span)

    def _lifted(self, e: ast.Expr, scope: Scope, expected: Optional[Ty]) -> DComp:
        """Name effectful subexpressions left to right, then elaborate the rest"""
        lifted: List[Tuple[str, ast.Expr]] = []

        def lift(sub: ast.Expr) -> ast.Expr:
            if not self.effectful(sub, scope):
                return sub
            name = fresh_name('t')
            lifted.append((name, sub))
            return ast.Name(sub.span, name)

        if isinstance(e, ast.BinOp):
            rebuilt = replace(e, left=lift(e.left), right=lift(e.right))
        elif isinstance(e, (ast.Not, ast.Negate)):
            rebuilt = replace(e, arg=lift(e.arg))
        elif isinstance(e, (ast.App, ast.CtorApp)):
            rebuilt = replace(e, args=[lift(a) for a in e.args])
        elif isinstance(e, (ast.Tuple_, ast.ListExpr)):
            rebuilt = replace(e, items=[lift(i) for i in e.items])
        elif isinstance(e, ast.If):
            rebuilt = replace(e, cond=lift(e.cond))
        elif isinstance(e, ast.Match):
            rebuilt = replace(e, scrut=lift(e.scrut))
        else:
            raise error_at(f"{type(e).__name__.lower()} cannot contain effects here", e)
        return self._chain(lifted, rebuilt, scope, expected)

    def _chain(self, lifted, rebuilt: ast.Expr, scope: Scope, expected: Optional[Ty]) -> DComp:
        if not lifted:
            return self.comp(rebuilt, scope, expected)
        (name, sub), rest = lifted[0], lifted[1:]
        m = self.comp(sub, scope)
        if isinstance(m.result_ty, VoidTy):
            raise error_at("the value of a computation that never returns is used", sub)
        var = Var(name, m.result_ty)
        return d_bind(m, var, self._chain(rest, rebuilt, scope.with_var(name, var), expected), sub.span)

    # ---- branching ----

    @staticmethod
    def _balance(m1: DComp, m2: DComp) -> Tuple[DComp, DComp]:
        if isinstance(m1.result_ty, VoidTy) and not isinstance(m2.result_ty, VoidTy):
            return d_absurd(m1, m2.result_ty), m2
        if isinstance(m2.result_ty, VoidTy) and not isinstance(m1.result_ty, VoidTy):
            return m1, d_absurd(m2, m1.result_ty)
        return m1, m2

    def _same_type(self, m1: DComp, m2: DComp, node):
        if m1.result_ty != m2.result_ty:
            raise error_at(f"branches return {format_type(m1.result_ty)} and {format_type(m2.result_ty)}", node)

    def _if(self, e: ast.If, scope: Scope, expected: Optional[Ty]) -> DComp:
        cond = self.terms.term(e.cond, scope, expected=None)
        if cond.ty != BOOL:
            raise error_at("condition is not a bool", e.cond)
        m1, m2 = self._balance(self.comp(e.then, scope, expected), self.comp(e.orelse, scope, expected))
        self._same_type(m1, m2, e)
        return d_ite(cond, m1, m2, e.span)

    def _match(self, e: ast.Match, scope: Scope, expected: Optional[Ty]) -> DComp:
        scrut = self.terms.term(e.scrut, scope)
        if not isinstance(scrut.ty, ListTy):
            raise error_at("match needs a list", e.scrut)
        head = Var(self.local(e.head), scrut.ty.elem)
        tail = Var(self.local(e.tail), scrut.ty)
        inner = scope.with_var(e.head, head).with_var(e.tail, tail)
        on_nil = self.comp(e.nil_branch, scope, expected)
        on_cons = self.comp(e.cons_branch, inner, expected)
        on_cons = d_let(head, ListOp('head', scrut), d_let(tail, ListOp('tail', scrut), on_cons))
        on_nil, on_cons = self._balance(on_nil, on_cons)
        self._same_type(on_nil, on_cons, e)
        return d_ite(Cmp('=', scrut, ListLit((), scrut.ty.elem)), on_nil, on_cons, e.span)

    # ---- calls ----

    def _arguments(self, e: ast.App, scope: Scope, dom: Ty) -> List:
        if len(e.args) == 1 and isinstance(e.args[0], ast.UnitConst):
            return [] if dom == UNIT else [self.terms.term(e.args[0], scope)]
        if len(e.args) == 1:
            return [self.terms.term(e.args[0], scope, dom)]
        return [self.terms.term(a, scope) for a in e.args]

    def _app(self, e: ast.App, scope: Scope, expected: Optional[Ty]) -> DComp:
        kind = self.call_kind(e.fn, scope)
        if kind == 'op':
            op = self.obs.sig.op(self.op_name(e.fn))
            arg = tuple_term(self._arguments(e, scope, op.inp))
            if arg.ty != op.inp:
                raise error_at(f"{op.name} expects {format_type(op.inp)}, given {format_type(arg.ty)}", e)
            return d_op(self.obs, op.name, arg, e.span)
        if kind == 'rec':
            op = self.obs.sig.op('call')
            arg = tuple_term(self._arguments(e, scope, op.inp))
            if arg.ty != op.inp:
                raise error_at(f"{e.fn} expects {format_type(op.inp)}, given {format_type(arg.ty)}", e)
            return d_op(self.obs, 'call', arg, e.span)
        if kind == 'def':
            callee = self.owner.defined[e.fn]
            if not self.obs.sig.has(e.fn):
                raise error_at(f"{e.fn} is typed with {callee.label} and cannot be called here", e)
            if any(isinstance(p.ty, FunTy) for p in callee.params):
                raise error_at(f"{e.fn} takes a function parameter and cannot be called", e)
            dom = tuple_type([p.ty for p in callee.params])
            args = self._arguments(e, scope, dom)
            if len(args) == 1 and len(callee.params) > 1:
                args = list(tuple_parts(args[0], len(callee.params)))
            if len(args) != len(callee.params):
                raise error_at(f"{e.fn} takes {len(callee.params)} arguments, {len(args)} given", e)
            return d_call(self.obs, e.fn, args, e.span)
        return d_ret(self.terms.term(e, scope, expected), self.obs, e.span)

    # ---- exceptions ----

    def inlined(self, m: DComp) -> DComp:
        """m with calls of non-recursive definitions replaced by their bodies"""
        bodies = {d.name: (d.params, d.comp) for d in self.owner.defined.values() if not d.recursive}
        return replace(m, comp=inline_calls(m.comp, bodies))

    def _try(self, e: ast.Try, scope: Scope, expected: Optional[Ty]) -> DComp:
        if not self.obs.sig.has('throw'):
            raise error_at(f"try needs an exception observation, not {self.obs.name}", e)
        body = self.comp(e.body, scope, expected)
        exn = Var(self.local(e.var), self.obs.sig.op('throw').inp)
        inner = scope.with_var(e.var, exn)
        hint = expected if isinstance(body.result_ty, VoidTy) else body.result_ty
        handler = self.comp(e.handler, inner, hint)
        body, handler = self._balance(body, handler)
        self._same_type(body, handler, e)
        if e.spec is not None:
            h_spec = self.terms.spec(e.spec, self.obs.target.shape(handler.result_ty), inner)
        else:
            h_spec = handler.declared
        x = Var(fresh_name('x'), body.result_ty)
        k = d_ret(x, self.obs, e.span)
        return try_catch(self.inlined(body), exn, h_spec, handler, x, k, e.span)

    def _reify(self, e: ast.Reify, scope: Scope) -> DComp:
        base = self.owner.observation(e.label, e)
        for name in sorted(self.owner.defined):
            callee = self.owner.defined[name]
            if callee.label == e.label and not callee.recursive:
                base = with_definition(base, name, callee.params, callee.declared)
        inner = self.under(base)
        events = sig_event_type(base.sig) if base.sig.has('read') or base.sig.has('write') else scope.events
        m = inner.comp(e.body, scope.with_events(events))
        reified = reify(inner.inlined(m), e.span)
        if isinstance(self.obs.target, WPure):
            return replace(reified, obs=self.obs)
        return DComp(reified.comp, wp(reified.comp, self.obs).spec, self.obs, e.span, reified.pending)

    # ---- handlers ----

    def _handle(self, e: ast.Handle, scope: Scope, expected: Optional[Ty]) -> DComp:
        if e.effect not in self.owner.effects:
            raise error_at(f"unknown effect {e.effect}", e)
        sig, contracts = self.owner.effects[e.effect]
        inner = self.under(contract_observation(sig, contracts))
        m = inner.comp(e.body, scope)
        if isinstance(m.result_ty, VoidTy):
            raise error_at("handled computation never returns", e.body)

        result_post = self.terms.pred_lambda(e.ret_binder, m.result_ty, e.ret_post, scope)
        ret_var = Var(self.local(e.return_var), m.result_ty)
        ret_body = self.terms.term(e.return_body, scope.with_var(e.return_var, ret_var), expected)
        target_post = self.terms.pred_lambda(e.res_binder, ret_body.ty, e.res_post, scope)

        clauses: Dict[str, OpClause] = {}
        for clause in e.clauses:
            name = clause.op if sig.has(clause.op) else OP_ALIASES.get(clause.op, clause.op)
            if not sig.has(name):
                raise error_at(f"{e.effect} has no operation {clause.op}", clause)
            if name in clauses:
                raise error_at(f"two clauses for {name}", clause)
            op = sig.op(name)
            inp = Var(self.local(clause.inp), op.inp)
            k = FunSym(fresh_name(clause.k), op.out, ret_body.ty)
            body = self.terms.term(clause.body, scope.with_var(clause.inp, inp).with_fun(clause.k, k),
                                   ret_body.ty)
            clauses[name] = OpClause(name, inp, k, body)
        missing = [op for op in sig.op_names if op not in clauses]
        if missing:
            raise error_at(f"no clause for {', '.join(missing)}", e)

        term, obligations = handle_upfront(m.comp, sig, contracts, result_post, target_post,
                                           ReturnClause(ret_var, ret_body), clauses, e.span)
        result = d_ret(term, self.obs, e.span)
        return replace(result, pending=m.pending + tuple(obligations))

    # ---- loops ----

    def _known_list(self, expr: ast.Expr, scope: Scope) -> ListLit:
        items = self.terms.term(expr, scope)
        for _ in range(len(scope.values) + 1):
            expanded = subst_terms(items, dict(scope.values))
            if expanded == items:
                break
            items = expanded
        items = normalize_term(items)
        if not isinstance(items, ListLit):
            raise error_at("loops need a list whose length is known here", expr)
        return items

    def _loop(self, e, scope: Scope) -> DComp:
        items = self._known_list(e.items, scope)
        x = Var(self.local(e.var), items.elem_ty)
        body = self.comp(e.body, scope.with_var(e.var, x))
        if isinstance(e, ast.MapIn):
            return map_d(items.items, x, body, e.span)
        if body.result_ty != UNIT:
            raise error_at("for loop bodies return ()", e.body)
        inv = self.terms.spec(e.invariant, self.obs.target.shape(UNIT), scope)
        return for_in(items.items, x, body, inv, e.span)


# =============================================================================
# Programs
# =============================================================================

class Elaborator:
    """
    Elaborates a parsed program definition by definition

    Args:
        program: Parsed program
        overrides: Label -> observation key, replacing the declared or default key
        dom: Finite domain, used to run recursive definitions
        history: Treatment of history binders in root obligations

    Example:
        >>> elaborator = Elaborator(parse_program(text))
        >>> elaborator.declare()
        >>> for decl in program.definitions():
        ...     result = elaborator.elaborate_definition(decl)
    """

    def __init__(self, program: ast.Program, overrides: Optional[Mapping[str, str]] = None,
                 dom: Optional[DomainConfig] = None, history: str = Config.HISTORY_MODE):
        self.program = program
        self.overrides = dict(overrides or {})
        self.dom = dom or DomainConfig.from_config()
        self.history = history
        self.decls = Declarations()
        self.terms = TermElaborator(self.decls)
        self.labels: Dict[str, Tuple[str, Dict[str, Ty]]] = {}
        self.effects: Dict[str, Tuple[Signature, Dict[str, OpContract]]] = {}
        self.defined: Dict[str, DefinedFunction] = {}
        self._observations: Dict[str, Observation] = {}

    # =========================================================================
    # Declarations
    # =========================================================================

    def declare(self):
        """Process type, effect, observation and logic declarations"""
        for decl in self.program.decls:
            if isinstance(decl, ast.TypeAlias):
                self.decls.types[decl.name] = self.terms.resolve_type(decl.ty)
            elif isinstance(decl, ast.EnumDecl):
                self._declare_enum(decl)
            elif isinstance(decl, ast.EffectDecl):
                self._declare_effect(decl)
            elif isinstance(decl, ast.ObservationDecl):
                self._declare_observation(decl)
            elif isinstance(decl, ast.LogicDecl):
                self._declare_logic(decl)
        logger.debug(f"Declared {len(self.decls.types)} types, {len(self.effects)} effects, "
                     f"{len(self.decls.logic)} logic functions")

    def _declare_enum(self, decl: ast.EnumDecl):
        ctors = tuple((c.name, (self.terms.resolve_type(c.arg),) if c.arg is not None else ())
                      for c in decl.ctors)
        ety = EnumTy(decl.name, ctors)
        self.decls.types[decl.name] = ety
        for name, _ in ctors:
            self.decls.ctors[name] = ety

    def _declare_effect(self, decl: ast.EffectDecl):
        ops, contracts = [], {}
        for sig_ast in decl.ops:
            op = OpDecl(sig_ast.name, self.terms.resolve_type(sig_ast.inp_ty),
                        self.terms.resolve_type(sig_ast.out_ty))
            inp, out = Var(sig_ast.inp, op.inp), Var(sig_ast.out, op.out)
            scope = Scope().with_var(sig_ast.inp, inp)
            pre = self.terms.formula(sig_ast.requires, scope) if sig_ast.requires is not None else TOP
            post = (self.terms.formula(sig_ast.ensures, scope.with_var(sig_ast.out, out))
                    if sig_ast.ensures is not None else TOP)
            ops.append(op)
            contracts[op.name] = OpContract(op, inp, out, pre, post)
        self.effects[decl.name] = (free_sig(decl.name, ops), contracts)

    def _declare_observation(self, decl: ast.ObservationDecl):
        if decl.key not in REGISTRY_KEYS and decl.key != 'pure':
            raise error_at(f"unknown observation {decl.key}", decl)
        params = {name: self.terms.resolve_type(ty) for name, ty in decl.params}
        self.labels[decl.label] = (decl.key, params)

    def _declare_logic(self, decl: ast.LogicDecl):
        params = [Var(p.name, self.terms.resolve_type(p.ty)) for p in decl.params]
        sym = FunSym(decl.name, tuple_type([p.ty for p in params]), self.terms.resolve_type(decl.result))
        self.decls.logic_syms[decl.name] = sym
        scope = Scope()
        for p in params:
            scope = scope.with_var(p.name, p)
        body = self.terms.term(decl.body, scope, sym.cod)
        if len(params) == 1:
            param = params[0]
        else:
            param = Var(fresh_name('args'), sym.dom)
            if params:
                parts = tuple_parts(param, len(params))
                body = subst_terms(body, {p.name: part for p, part in zip(params, parts)})
        self.decls.logic[decl.name] = FunDef(sym, param, body)

    # =========================================================================
    # Labels
    # =========================================================================

    def resolve_label(self, label: str, node=None) -> Tuple[str, Dict[str, Ty]]:
        """(registry key, carrier parameters) of a label"""
        if label in self.labels:
            key, params = self.labels[label]
        elif label in PRELUDE_LABELS:
            key, params = PRELUDE_LABELS[label], {}
        else:
            raise error_at(f"unknown label {label}", node)
        return self.overrides.get(label, key), params

    def observation(self, label: str, node=None) -> Observation:
        if label not in self._observations:
            key, params = self.resolve_label(label, node)
            try:
                self._observations[label] = build_observation(key, params)
            except VerifierError as e:
                raise error_at(str(e), node) from None
        return self._observations[label]

    # =========================================================================
    # Definitions
    # =========================================================================

    def _calls(self, decl: ast.LetDecl) -> FrozenSet[str]:
        """Earlier definitions decl's body calls, transitively"""
        params = {p.name for p in decl.params}
        direct = {node.fn for node in ast.walk(decl.body, skip=lambda n: isinstance(n, ast.Reify))
                  if isinstance(node, ast.App) and node.fn in self.defined and node.fn not in params
                  and node.fn != decl.name}
        closure = set(direct)
        for name in direct:
            closure |= self.defined[name].calls
        return frozenset(closure)

    def elaborate_definition(self, decl: ast.LetDecl) -> ElaboratedDefinition:
        """
        Elaborate and generate obligations for one definition

        Raises:
            ElaborationError: Ill-typed body or specification, unknown names
        """
        try:
            return self._elaborate(decl)
        except ElaborationError:
            raise
        except VerifierError as e:
            raise error_at(f"{decl.name}: {e}", decl) from None

    def _elaborate(self, decl: ast.LetDecl) -> ElaboratedDefinition:
        key, _ = self.resolve_label(decl.label, decl)
        base = self.observation(decl.label, decl)
        calls = self._calls(decl)
        obs = base
        for name in sorted(calls):
            callee = self.defined[name]
            if callee.label != decl.label:
                raise error_at(f"{decl.name} calls {name}, which is typed with {callee.label}", decl)
            obs = with_definition(obs, name, callee.params, callee.declared)

        events = sig_event_type(obs.sig) if obs.sig.has('read') or obs.sig.has('write') else None
        shape = obs.target.shape(UNIT)
        reserved = set(shape.post_names) | set(shape.ctx_names)
        scope = Scope(events=events)
        params = []
        for p in decl.params:
            if p.name in reserved:
                raise error_at(f"parameter {p.name} has the name of a {obs.target.name} specification binder", decl)
            var = Var(p.name, self.terms.resolve_type(p.ty, events))
            params.append(var)
            if isinstance(var.ty, FunTy):
                scope = scope.with_fun(p.name, FunSym(p.name, var.ty.dom, var.ty.cod))
            else:
                scope = scope.with_var(p.name, var)
        result_ty = self.terms.resolve_type(decl.result, events)
        declared = self.terms.spec(decl.spec, obs.target.shape(result_ty), scope)
        warnings = []
        if not declared.is_positive():
            warnings.append(f"specification of {decl.name} is not monotone in its postcondition")
            logger.warning(warnings[-1])

        if decl.recursive:
            return self._elaborate_rec(decl, key, obs, tuple(params), result_ty, declared, scope, calls, warnings)

        body = self._body(ComputationElaborator(self, obs), decl, scope, result_ty)
        annotated = annotate(body, declared)
        obligations = obligations_of(annotated, decl.name, self.decls.logic, history=self.history)
        self.defined[decl.name] = DefinedFunction(decl.name, decl.label, tuple(params), declared,
                                                  body.comp, False, calls)
        logger.info(f"Elaborated {decl.name}: {len(obligations)} obligations")
        return ElaboratedDefinition(decl.name, decl.label, key, result_ty, declared,
                                    wp(body.comp, obs).spec, obligations, {}, decl.span, annotated, warnings)

    def _body(self, elab: ComputationElaborator, decl: ast.LetDecl, scope: Scope, result_ty: Ty) -> DComp:
        body = elab.comp(decl.body, scope, result_ty)
        if isinstance(body.result_ty, VoidTy) and not isinstance(result_ty, VoidTy):
            body = d_absurd(body, result_ty)
        if body.result_ty != result_ty:
            raise error_at(f"{decl.name} returns {format_type(body.result_ty)}, "
                           f"declared {format_type(result_ty)}", decl.body)
        return body

    def _elaborate_rec(self, decl: ast.LetDecl, key: str, obs: Observation, params: Tuple[Var, ...],
                       result_ty: Ty, declared: SpecExpr, scope: Scope, calls, warnings=()) -> ElaboratedDefinition:
        if len(params) != 1:
            raise error_at(f"let rec {decl.name} must take exactly one parameter", decl)
        a = params[0]
        if decl.measure is not None:
            measure = Measure(a, self.terms.term(decl.measure, scope, INT))
        else:
            measure = Measure.default_for(a)
        rec_obs = recursive_observation(obs, a, declared, measure)
        body = self._body(ComputationElaborator(self, rec_obs, decl.name), decl, scope, result_ty)
        result = fix(a, body, declared, measure, decl.name, self.decls.logic, self.dom, self.history)
        self.defined[decl.name] = DefinedFunction(decl.name, decl.label, params, declared,
                                                  body.comp, True, calls)
        outputs = self._outputs(result.function, a, result_ty) if result.function else {}
        logger.info(f"Elaborated let rec {decl.name}: {len(result.obligations)} obligations")
        return ElaboratedDefinition(decl.name, decl.label, key, result_ty, declared,
                                    wp(body.comp, rec_obs).spec, result.obligations, outputs,
                                    decl.span, result.dcomp, list(warnings))

    def _outputs(self, function, a: Var, result_ty: Ty) -> Dict[str, str]:
        """Run an executable recursive definition on the first arguments of its carrier"""
        try:
            values = carrier(a.ty, self.dom)[:Config.MAX_REPORTED_OUTPUTS]
        except CarrierTooLarge:
            return {}
        outputs = {}
        for value in values:
            shown = format_value(value, a.ty)
            try:
                outputs[shown] = format_value(function(value), result_ty)
            except NonTermination:
                outputs[shown] = 'diverges'
            except VerifierError as e:
                outputs[shown] = f"error: {e}"
        return outputs


if __name__ == "__main__":
    from core.surface_parser import parse_program
    source = """
    let stmod (x : int) : St unit (fun p s0 -> p ((), s0 + x)) =
      let s = get () in put (s + x)
    """
    program = parse_program(source)
    elaborator = Elaborator(program)
    elaborator.declare()
    for d in program.definitions():
        result = elaborator.elaborate_definition(d)
        print(result.name, result.inferred.pretty())
        for ob in result.obligations:
            print(" ", ob.name, ob.kind, ob.pretty())
