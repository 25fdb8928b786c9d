#!/usr/bin/env python3
"""
Dijkstra Layer - Computations paired with declared specifications

A DComp is a computation tree plus the specification it is claimed to
meet; the claim θ(comp) ≤ declared is reified as an Obligation discharged
by the prover. Combinators compose declared specifications with the
target monad's ret and bind, so d_bind never creates obligations of its
own; weakening and loop invariants do.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

# Handle imports
try:
    from core.effects import Call, Comp, Ite, LetPure, OpDecl, Ret, absurd, comp_bind, gen_of_op, subst_comp
    from core.errors import ObservationMismatch, ShapeMismatch
    from core.logic import (
        BOT, UNIT, UNIT_LIT, Atom, Formula, FunDef, Implies, ListLit, Neg, PredLam, Term, Var,
        VoidTy, conj, psubst, tuple_parts, tuple_term, tuple_type,
        fresh_name, normalize, subst_terms,
    )
    from core.observations import Observation
    from core.pretty import format_formula
    from core.specmonads import SpecExpr
    from core.vcgen import close_formula, vc_leq, wp
    from utils.config import Config
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core.effects import Call, Comp, Ite, LetPure, OpDecl, Ret, absurd, comp_bind, gen_of_op, subst_comp
    from core.errors import ObservationMismatch, ShapeMismatch
    from core.logic import (
        BOT, UNIT, UNIT_LIT, Atom, Formula, FunDef, Implies, ListLit, Neg, PredLam, Term, Var,
        VoidTy, conj, psubst, tuple_parts, tuple_term, tuple_type,
        fresh_name, normalize, subst_terms,
    )
    from core.observations import Observation
    from core.pretty import format_formula
    from core.specmonads import SpecExpr
    from core.vcgen import close_formula, vc_leq, wp
    from utils.config import Config

logger = logging.getLogger(__name__)

# (line, column) of the source construct an obligation comes from
Origin = Optional[Tuple[int, int]]


class ObligationStatus(Enum):
    """Discharge status of an obligation"""
    PENDING = "pending"
    VALID = "valid"
    COUNTEREXAMPLE = "counterexample"
    RESOURCE_EXCEEDED = "resource-exceeded"


@dataclass(frozen=True)
class Obligation:
    """
    A closed formula whose validity the prover must establish

    Attributes:
        name: DEF.N once numbered by obligations_of
        kind: root, weaken, side, invariant, clause, return, contract, measure, fix
        formula: Closed formula
        origin: Source position
        status: Discharge status
        counterexample: Falsifying assignment, printed, when status is COUNTEREXAMPLE
        detail: Resource message when status is RESOURCE_EXCEEDED
        definitions: Interpreted logic functions the formula mentions
    """
    kind: str
    formula: Formula
    origin: Origin = None
    name: Optional[str] = None
    status: ObligationStatus = ObligationStatus.PENDING
    counterexample: Optional[Dict[str, str]] = None
    detail: Optional[str] = None
    definitions: Mapping[str, FunDef] = field(default_factory=dict, compare=False)

    def with_status(self, status: ObligationStatus, counterexample: Optional[Dict[str, str]] = None,
                    detail: Optional[str] = None) -> 'Obligation':
        if self.status is not ObligationStatus.PENDING:
            raise ValueError(f"obligation {self.name} already {self.status.value}")
        return replace(self, status=status, counterexample=counterexample, detail=detail)

    @property
    def is_valid(self) -> bool:
        return self.status is ObligationStatus.VALID

    def pretty(self) -> str:
        return format_formula(self.formula)

    def to_dict(self) -> Dict:
        data = {
            'name': self.name,
            'kind': self.kind,
            'formula': self.pretty(),
            'status': self.status.value,
        }
        if self.origin:
            data['origin'] = {'line': self.origin[0], 'column': self.origin[1]}
        if self.counterexample is not None:
            data['counterexample'] = dict(self.counterexample)
        if self.detail:
            data['detail'] = self.detail
        return data


@dataclass(frozen=True)
class DComp:
    """
    Computation with a declared specification, D A w

    Attributes:
        comp: Computation tree over obs's signature
        declared: Specification w in obs's target monad
        obs: Observation interpreting comp
        origin: Source position
        pending: Obligations raised while building (weakenings, invariants)
    """
    comp: Comp
    declared: SpecExpr
    obs: Observation
    origin: Origin = None
    pending: Tuple[Obligation, ...] = ()

    @property
    def result_ty(self):
        return self.declared.shape.result_ty


def _same_obs(a: Observation, b: Observation):
    if a is not b and (a.name != b.name or a.target.describe() != b.target.describe()):
        raise ObservationMismatch(f"{a.name} and {b.name}")


def _check_shape(w1: SpecExpr, w2: SpecExpr):
    if w1.shape != w2.shape:
        raise ShapeMismatch(f"{w1.shape.name}/{w1.shape.result_ty} against "
                            f"{w2.shape.name}/{w2.shape.result_ty}")


def _guarded(obligations: Sequence[Obligation], hyp: Formula) -> Tuple[Obligation, ...]:
    return tuple(replace(ob, formula=Implies(hyp, ob.formula)) for ob in obligations)


# =============================================================================
# Combinators
# =============================================================================

def d_ret(v: Term, obs: Observation, origin: Origin = None) -> DComp:
    return DComp(Ret(v), obs.ret(v), obs, origin)


def d_bind(m: DComp, binder: Var, f: DComp, origin: Origin = None) -> DComp:
    """
    Sequential composition; declared = bind^W of the declared specs

    Raises:
        ObservationMismatch: m and f are observed differently
        ShapeMismatch: binder's type is not m's result type
    """
    _same_obs(m.obs, f.obs)
    if binder.ty != m.result_ty:
        raise ShapeMismatch(f"binder {binder.name} : {binder.ty} after a {m.result_ty} computation")
    declared = m.obs.target.bind(m.declared, binder, f.declared)
    return DComp(comp_bind(m.comp, binder, f.comp), declared, m.obs, origin or m.origin,
                 m.pending + f.pending)


def d_let(var: Var, value: Term, body: DComp, origin: Origin = None) -> DComp:
    """let var = value in body, for a pure value"""
    if value.ty != var.ty:
        raise ShapeMismatch(f"let {var.name} : {var.ty} bound to a {value.ty} value")
    mapping = {var.name: value}
    pending = tuple(replace(ob, formula=subst_terms(ob.formula, mapping)) for ob in body.pending)
    return DComp(LetPure(var, value, body.comp), body.declared.subst(mapping), body.obs,
                 origin or body.origin, pending)


def d_weaken(m: DComp, w: SpecExpr, origin: Origin = None) -> Tuple[DComp, Obligation]:
    """Coerce m to the weaker w; returns the new DComp and the obligation declared ≤ w"""
    _check_shape(m.declared, w)
    ob = Obligation('weaken', vc_leq(m.obs.target, m.declared, w), origin or m.origin)
    return DComp(m.comp, w, m.obs, m.origin, m.pending + (ob,)), ob


def annotate(m: DComp, w: SpecExpr) -> DComp:
    """Replace the declared spec by a user annotation checked by the root obligation"""
    _check_shape(m.declared, w)
    return replace(m, declared=w)


def d_op(obs: Observation, op: str, i: Term, origin: Origin = None) -> DComp:
    """The generic effect of op, declared with its operation spec"""
    comp = gen_of_op(obs.sig.op(op), i)
    return DComp(comp, obs.gen_spec(op, i), obs, origin)


def d_absurd(m: DComp, ty, origin: Origin = None) -> DComp:
    """Retype a void computation (throw, fail) to ty; its void post becomes ⊥"""
    if not isinstance(m.result_ty, VoidTy):
        return m
    shape = m.obs.target.shape(ty)
    void_post = m.declared.shape.posts[0]
    params = tuple(Var(fresh_name('v'), t) for t in void_post.arg_tys)
    body = psubst(m.declared.body, {void_post.name: PredLam(params, BOT)})
    return DComp(absurd(m.comp, ty), SpecExpr(shape, body), m.obs, origin or m.origin, m.pending)


def d_ite(c: Term, m1: DComp, m2: DComp, origin: Origin = None) -> DComp:
    _same_obs(m1.obs, m2.obs)
    _check_shape(m1.declared, m2.declared)
    cond = Atom(c)
    return DComp(Ite(c, m1.comp, m2.comp), m1.obs.ite(c, m1.declared, m2.declared), m1.obs, origin,
                 _guarded(m1.pending, cond) + _guarded(m2.pending, Neg(cond)))


def definition_op(name: str, params: Sequence[Var], declared: SpecExpr) -> Tuple[OpDecl, Callable]:
    """A verified definition as an operation whose generic effect is its declared spec"""
    decl = OpDecl(name, tuple_type([p.ty for p in params]), declared.shape.result_ty)

    def gen(i: Term) -> SpecExpr:
        parts = tuple_parts(i, len(params)) if params else []
        return declared.subst({p.name: t for p, t in zip(params, parts)})
    return decl, gen


def with_definition(obs: Observation, name: str, params: Sequence[Var], declared: SpecExpr) -> Observation:
    """obs extended so that calls to name are specified by its declared spec"""
    decl, gen = definition_op(name, params, declared)
    return obs.extend(decl, gen)


def d_call(obs: Observation, name: str, args: Sequence[Term], origin: Origin = None) -> DComp:
    """
    Call of a verified definition; wp uses the callee's declared spec

    Raises:
        UnhandledOp: name was not added with with_definition
        ShapeMismatch: Wrong number of arguments
    """
    decl = obs.sig.op(name)
    arg = tuple_term(list(args))
    if arg.ty != decl.inp:
        raise ShapeMismatch(f"{name} applied to {len(args)} arguments of the wrong type")
    return d_op(obs, name, arg, origin)


def inline_calls(m: Comp, bodies: Mapping[str, Tuple[Sequence[Var], Comp]]) -> Comp:
    """Replace calls of non-recursive definitions by their bodies, for execution"""
    if isinstance(m, Ret):
        return m
    if isinstance(m, Ite):
        return Ite(m.cond, inline_calls(m.then, bodies), inline_calls(m.orelse, bodies))
    if isinstance(m, LetPure):
        return LetPure(m.var, m.value, inline_calls(m.body, bodies))
    cont = inline_calls(m.cont, bodies)
    if m.op not in bodies:
        return Call(m.op, m.arg, m.binder, cont)
    params, body = bodies[m.op]
    parts = tuple_parts(m.arg, len(params)) if params else []
    callee = inline_calls(subst_comp(body, {p.name: t for p, t in zip(params, parts)}), bodies)
    return comp_bind(callee, m.binder, cont)


def map_d(items: Sequence[Term], x: Var, body: DComp, origin: Origin = None) -> DComp:
    """[body x1; ...; body xn] collected into a list, for a statically known list"""
    elem_ty = body.result_ty
    outs = [Var(fresh_name('y'), elem_ty) for _ in items]
    acc = d_ret(ListLit(tuple(outs), elem_ty), body.obs, origin)
    for item, out in reversed(list(zip(items, outs))):
        acc = d_bind(_instance(body, x, item), out, acc, origin)
    return acc


def for_in(items: Sequence[Term], x: Var, body: DComp, inv: SpecExpr,
           origin: Origin = None) -> DComp:
    """
    Run body on each item with a loop invariant

    Raises obligations: every iteration meets inv, ret () ≤ inv, and
    bind inv (λ(). inv) ≤ inv.
    """
    obs = body.obs
    target = obs.target
    if inv.shape != target.shape(UNIT):
        raise ShapeMismatch(f"loop invariant must be a {target.name} spec over unit")
    _check_shape(body.declared, inv)

    u = Var(fresh_name('u'), UNIT)
    comp: Comp = Ret(UNIT_LIT)
    steps = []
    for item in reversed(list(items)):
        step = _instance(body, x, item)
        steps.append(vc_leq(target, wp(step.comp, obs).spec, inv))
        comp = comp_bind(step.comp, Var(fresh_name('u'), UNIT), comp)
    obligations = (
        Obligation('invariant', conj(*reversed(steps)), origin),
        Obligation('invariant', vc_leq(target, target.ret(UNIT_LIT), inv), origin),
        Obligation('invariant', vc_leq(target, target.bind(inv, u, inv), inv), origin),
    )
    return DComp(comp, inv, obs, origin, body.pending + obligations)


def _instance(d: DComp, x: Var, t: Term) -> DComp:
    mapping = {x.name: t}
    pending = tuple(replace(ob, formula=subst_terms(ob.formula, mapping)) for ob in d.pending)
    return DComp(subst_comp(d.comp, mapping), d.declared.subst(mapping), d.obs, d.origin, pending)


# =============================================================================
# Obligation extraction
# =============================================================================

def obligations_of(m: DComp, def_name: str = 'main', definitions: Optional[Mapping[str, FunDef]] = None,
                   route: str = 'auto', history: str = Config.HISTORY_MODE,
                   extra: Sequence[Obligation] = ()) -> List[Obligation]:
    """
    Numbered obligations of a definition

    Order: obligations raised while building, extra ones supplied by the
    caller (handlers, recursion), division side conditions, then the root
    obligation θ(comp) ≤ declared.
    """
    definitions = dict(definitions or {})
    defined = tuple(definitions)
    result = wp(m.comp, m.obs)
    collected: List[Obligation] = list(m.pending) + list(extra)
    collected += [Obligation('side', s, m.origin) for s in result.side_conditions]
    root = normalize(close_formula(vc_leq(m.obs.target, result.spec, m.declared, route, history),
                                   defined))
    collected.append(Obligation('root', root, m.origin))

    numbered = []
    for idx, ob in enumerate(collected, start=1):
        formula = ob.formula if ob.kind == 'root' else normalize(close_formula(ob.formula, defined))
        numbered.append(replace(ob, name=f"{def_name}.{idx}", formula=formula,
                                definitions=definitions))
    logger.debug(f"{def_name}: {len(numbered)} obligations")
    return numbered


if __name__ == "__main__":
    from core.logic import INT
    from core.observations import theta_st
    obs = theta_st(INT)
    x = Var('x', INT)
    get = d_op(obs, 'get', UNIT_LIT)
    put = d_op(obs, 'put', x)
    prog = d_bind(get, x, put)
    print(prog.declared.normalized().pretty())
    for ob in obligations_of(prog, 'stmod'):
        print(ob.name, ob.kind, ob.pretty())
