#!/usr/bin/env python3
"""
Handlers - Exception handling, upfront-contract handlers and recursion

Three ways of giving meaning to operations at the Dijkstra level:
  - try_catch / reify / alpha_star for exceptions, with weakest
    exceptional preconditions
  - handle_upfront for free signatures, where each operation carries a
    pre/postcondition contract and clauses are checked against it
  - fix for general recursion, where each recursive call is specified by
    the invariant under a decreasing measure
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Optional, Tuple

# Handle imports
try:
    from core.dijkstra import DComp, Obligation, Origin, obligations_of
    from core.effects import (
        Call, Comp, Ite, LetPure, OpDecl, Ret, Signature, comp_bind, genrec_sig, run_genrec, subst_comp,
    )
    from core.errors import NonTermination, ShapeMismatch, UnhandledOp, UnsupportedShape
    from core.logic import (
        INT, TOP, Apply, Atom, Cmp, Formula, ForallFun, FunDef, FunSym, Implies, IntTy, IteT,
        ListOp, ListTy, PApply, PredLam, SumTy, Term, Var, Inj, Forall, _map_children, beta,
        carrier_size, conj, eval_term, fresh_name, int_lit, psubst, subst_terms, value_term,
    )
    from core.observations import Observation, OpRule, theta_pure
    from core.specmonads import NestedSpec, SpecExpr, wpure
    from core.vcgen import vc_leq, wp
    from utils.config import Config, DomainConfig
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core.dijkstra import DComp, Obligation, Origin, obligations_of
    from core.effects import (
        Call, Comp, Ite, LetPure, OpDecl, Ret, Signature, comp_bind, genrec_sig, run_genrec, subst_comp,
    )
    from core.errors import NonTermination, ShapeMismatch, UnhandledOp, UnsupportedShape
    from core.logic import (
        INT, TOP, Apply, Atom, Cmp, Formula, ForallFun, FunDef, FunSym, Implies, IntTy, IteT,
        ListOp, ListTy, PApply, PredLam, SumTy, Term, Var, Inj, Forall, _map_children, beta,
        carrier_size, conj, eval_term, fresh_name, int_lit, psubst, subst_terms, value_term,
    )
    from core.observations import Observation, OpRule, theta_pure
    from core.specmonads import NestedSpec, SpecExpr, wpure
    from core.vcgen import vc_leq, wp
    from utils.config import Config, DomainConfig

logger = logging.getLogger(__name__)


# =============================================================================
# Exceptions
# =============================================================================

def _exc_posts(d: DComp):
    if not d.obs.sig.has('throw') or len(d.declared.shape.posts) != 2:
        raise ShapeMismatch(f"{d.obs.name} is not an exception observation into W^Exc")
    return d.declared.shape.posts


def handle_exc_tree(m: Comp, on_ret: Callable[[Term], Comp], on_throw: Callable[[Term], Comp]) -> Comp:
    """Replace ret leaves and throw nodes of m; other operations are kept"""
    if isinstance(m, Ret):
        return on_ret(m.value)
    if isinstance(m, Call):
        if m.op == 'throw':
            return on_throw(m.arg)
        return Call(m.op, m.arg, m.binder, handle_exc_tree(m.cont, on_ret, on_throw))
    if isinstance(m, Ite):
        return Ite(m.cond, handle_exc_tree(m.then, on_ret, on_throw),
                   handle_exc_tree(m.orelse, on_ret, on_throw))
    if isinstance(m, LetPure):
        return LetPure(m.var, m.value, handle_exc_tree(m.body, on_ret, on_throw))
    raise ShapeMismatch(f"unexpected computation node {type(m).__name__}")


def try_catch(m: DComp, e: Var, h_spec: SpecExpr, h_impl: DComp, x: Var, k: DComp,
              origin: Origin = None) -> DComp:
    """
    try m with e -> h_impl, continuing with k on normal return

    declared = λp q. w1 (λx. w2 x p q) (λe. h_spec e p q)

    Raises:
        ShapeMismatch: Non-exception observation, or h_spec and k disagree on shape
    """
    p1, q1 = _exc_posts(m)
    if h_spec.shape != k.declared.shape or h_impl.declared.shape != h_spec.shape:
        raise ShapeMismatch("handler and continuation specifications differ in shape")
    if x.ty != m.result_ty:
        raise ShapeMismatch(f"continuation binder {x.name} : {x.ty} after a {m.result_ty} computation")

    comp = handle_exc_tree(m.comp,
                           lambda v: subst_comp(k.comp, {x.name: v}),
                           lambda err: subst_comp(h_impl.comp, {e.name: err}))
    body = psubst(m.declared.body, {
        p1.name: PredLam((x,), k.declared.body),
        q1.name: PredLam((e,), h_spec.body),
    })
    pending = m.pending + h_impl.pending + k.pending
    if h_impl.declared.body != h_spec.body:
        pending += (Obligation('weaken', vc_leq(m.obs.target, h_impl.declared, h_spec), origin),)
    return DComp(comp, SpecExpr(k.declared.shape, body), m.obs, origin or m.origin, pending)


def reify(m: DComp, origin: Origin = None) -> DComp:
    """
    Turn exceptions into values: the result is inl v or inr e

    declared = λp. w (λx. p (inl x)) (λe. p (inr e))
    """
    p1, q1 = _exc_posts(m)
    exn_ty = q1.arg_tys[0]
    sty = SumTy(m.result_ty, exn_ty)
    comp = handle_exc_tree(m.comp, lambda v: Ret(Inj('l', v, sty)), lambda err: Ret(Inj('r', err, sty)))
    obs = theta_pure()
    shape = obs.target.shape(sty)
    p = shape.posts[0]
    x = Var(fresh_name('x'), m.result_ty)
    err = Var(fresh_name('e'), exn_ty)
    body = psubst(m.declared.body, {
        p1.name: PredLam((x,), PApply(p, (Inj('l', x, sty),))),
        q1.name: PredLam((err,), PApply(p, (Inj('r', err, sty),))),
    })
    return DComp(comp, SpecExpr(shape, body), obs, origin or m.origin, m.pending)


def alpha_star(e: Var, on_exn: SpecExpr) -> Callable[[NestedSpec], SpecExpr]:
    """
    Extend an exception algebra α to W^Exc-specifications

    α_* w = λp q. w (λw'. w' p q) (λe. α(inr e) p q), with w given as a
    nested spec whose inner family is w'.
    """
    def apply(nested: NestedSpec) -> SpecExpr:
        outer = nested.outer
        p1, q1 = outer.shape.posts
        if nested.inner.shape != on_exn.shape:
            raise ShapeMismatch("inner family and exception algebra differ in shape")
        body = psubst(outer.body, {
            p1.name: PredLam((nested.binder,), nested.inner.body),
            q1.name: PredLam((e,), on_exn.body),
        })
        return SpecExpr(on_exn.shape, body)
    return apply


# =============================================================================
# Upfront contracts
# =============================================================================

@dataclass(frozen=True)
class OpContract:
    """
    Precondition and postcondition of one operation

    Attributes:
        op: Operation declaration
        inp: Input binder, free in pre and post
        out: Output binder, free in post
        pre: P_i over inp
        post: Q_i over inp and out
    """
    op: OpDecl
    inp: Var
    out: Var
    pre: Formula = TOP
    post: Formula = TOP

    def pre_at(self, i: Term) -> Formula:
        return subst_terms(self.pre, {self.inp.name: i})

    def post_at(self, i: Term, o: Term) -> Formula:
        return subst_terms(self.post, {self.inp.name: i, self.out.name: o})


@dataclass(frozen=True)
class OpClause:
    """op x k -> body, where body only applies k"""
    op: str
    inp: Var
    k: FunSym
    body: Term


@dataclass(frozen=True)
class ReturnClause:
    var: Var
    body: Term


def contract_observation(sig: Signature, contracts: Mapping[str, OpContract]) -> Observation:
    """op ↦ λp. P_i i ∧ ∀o. Q_i⟨i, o⟩ ⇒ p o"""
    target = wpure()
    rules = {}
    for op in sig.ops:
        contract = contracts.get(op.name)
        if contract is None:
            raise UnhandledOp(op.name)

        def gen(i, contract=contract):
            shape = target.shape(contract.op.out)
            o = Var(fresh_name(contract.out.name), contract.op.out)
            return SpecExpr(shape, conj(contract.pre_at(i),
                                        Forall(o, Implies(contract.post_at(i, o), PApply(shape.posts[0], (o,))))))
        rules[op.name] = OpRule(op, gen)
    return Observation('contract', sig, target, rules)


def _apply_k(t: Term, k: str, resume: Callable[[Term], Term]) -> Term:
    def go(node):
        if isinstance(node, Apply) and node.fn.name == k:
            return resume(go(node.arg))
        return _map_children(node, go)
    return go(t)


def handled_term(m: Comp, retc: ReturnClause, clauses: Mapping[str, OpClause]) -> Term:
    """The handler run over a tree as a pure term"""
    if isinstance(m, Ret):
        return subst_terms(retc.body, {retc.var.name: m.value})
    if isinstance(m, Call):
        clause = clauses.get(m.op)
        if clause is None:
            raise UnhandledOp(m.op)
        rest = handled_term(m.cont, retc, clauses)
        body = subst_terms(clause.body, {clause.inp.name: m.arg})
        return _apply_k(body, clause.k.name, lambda t: subst_terms(rest, {m.binder.name: t}))
    if isinstance(m, Ite):
        return IteT(m.cond, handled_term(m.then, retc, clauses), handled_term(m.orelse, retc, clauses))
    if isinstance(m, LetPure):
        return subst_terms(handled_term(m.body, retc, clauses), {m.var.name: m.value})
    raise ShapeMismatch(f"unexpected computation node {type(m).__name__}")


def handle_upfront(m: Comp, sig: Signature, contracts: Mapping[str, OpContract], result_post: PredLam,
                   target_post: PredLam, retc: ReturnClause, clauses: Mapping[str, OpClause],
                   origin: Origin = None) -> Tuple[Term, List[Obligation]]:
    """
    Handle a free-signature computation with contract-checked clauses

    Args:
        m: Computation over sig
        contracts: OpContract per operation
        result_post: Q, what m guarantees of its result under the contracts
        target_post: R, what the handled value must satisfy
        retc: return a -> ...
        clauses: op clause per operation

    Returns:
        (handled value as a term, obligations: contract, one clause
        obligation per operation, return)

    Raises:
        UnhandledOp: An operation without contract or clause
    """
    for op in sig.ops:
        if op.name not in clauses:
            raise UnhandledOp(op.name)
    obs = contract_observation(sig, contracts)
    obligations = [Obligation('contract', wp(m, obs).spec.instantiate((result_post,)), origin)]

    for op in sig.ops:
        contract, clause = contracts[op.name], clauses[op.name]
        inp = Var(fresh_name(clause.inp.name), op.inp)
        out = Var(fresh_name(contract.out.name), op.out)
        premise = Forall(out, Implies(contract.post_at(inp, out),
                                      beta(target_post, (Apply(clause.k, out),))))
        goal = Implies(contract.pre_at(inp), beta(target_post, (subst_terms(clause.body, {clause.inp.name: inp}),)))
        formula = ForallFun(clause.k, Forall(inp, Implies(premise, goal)))
        obligations.append(Obligation('clause', formula, origin))

    a = Var(fresh_name(retc.var.name), retc.var.ty)
    ret_goal = Implies(beta(result_post, (a,)), beta(target_post, (subst_terms(retc.body, {retc.var.name: a}),)))
    obligations.append(Obligation('return', Forall(a, ret_goal), origin))
    return handled_term(m, retc, clauses), obligations


# =============================================================================
# General recursion
# =============================================================================

@dataclass(frozen=True)
class Measure:
    """Natural-number termination measure μ(var) = term"""
    var: Var
    term: Term

    def at(self, t: Term) -> Term:
        return subst_terms(self.term, {self.var.name: t})

    @classmethod
    def default_for(cls, var: Var) -> 'Measure':
        """length for lists, the value itself for ints"""
        if isinstance(var.ty, ListTy):
            return cls(var, ListOp('length', var))
        if isinstance(var.ty, IntTy):
            return cls(var, var)
        raise ShapeMismatch(f"no default measure for {var.ty}; give one explicitly")


def recursive_observation(base: Observation, a: Var, inv: SpecExpr, measure: Measure) -> Observation:
    """
    base extended with call : A ⤳ B, specified as

    call a' ↦ λp ctx. μ(a') < μ(a) ∧ inv(a') p ctx
    """
    res_ty = inv.shape.result_ty
    decl = genrec_sig(a.ty, res_ty).op('call')

    def gen(arg: Term) -> SpecExpr:
        decreasing = Atom(Cmp('<', measure.at(arg), measure.term))
        return SpecExpr(inv.shape, conj(decreasing, inv.subst({a.name: arg}).body))

    return base.extend(decl, gen)


class FixedPoint:
    """
    Executable function of a recursive definition

    Recursion depth is bounded by the argument carrier plus slack.
    """

    def __init__(self, a: Var, body: Comp, bound: int,
                 definitions: Optional[Mapping[str, FunDef]] = None, dom: Optional[DomainConfig] = None):
        self.a = a
        self.body = body
        self.bound = bound
        self.definitions = dict(definitions or {})
        self.dom = dom
        self.depth = 0

    def __call__(self, value):
        if self.depth >= self.bound:
            raise NonTermination(f"recursion deeper than {self.bound} on {self.a.name}")
        self.depth += 1
        try:
            return run_genrec(self.body, self, {self.a.name: value}, max_depth=self.bound,
                              definitions=self.definitions, dom=self.dom)
        finally:
            self.depth -= 1


@dataclass
class FixResult:
    """Outcome of fix: the annotated body, its obligations and the executable function"""
    dcomp: DComp
    obligations: List[Obligation] = field(default_factory=list)
    function: Optional[FixedPoint] = None


def fix(a: Var, body: DComp, inv: SpecExpr, measure: Measure, name: str = 'rec',
        definitions: Optional[Mapping[str, FunDef]] = None, dom: Optional[DomainConfig] = None,
        history: str = Config.HISTORY_MODE) -> FixResult:
    """
    Close a recursive body over its invariant

    body must be built over recursive_observation(base, a, inv, measure).
    Obligations: measure(a) ≥ 0 for every a, division guards, and
    θ(body) ≤ inv(a) for every a.

    Raises:
        ShapeMismatch: body lacks the call operation or disagrees with inv
    """
    if not body.obs.sig.has('call'):
        raise ShapeMismatch("recursive body is not built over a call operation")
    dom = dom or DomainConfig.from_config()
    annotated = DComp(body.comp, inv, body.obs, body.origin, body.pending)
    nonneg = Obligation('measure', Atom(Cmp('<=', int_lit(0), measure.term)), body.origin)
    obligations = obligations_of(annotated, name, definitions, history=history, extra=(nonneg,))

    function = None
    if set(body.obs.sig.op_names) == {'call'}:
        bound = carrier_size(a.ty, dom) + Config.UNFOLD_SLACK
        function = FixedPoint(a, body.comp, bound, definitions, dom)
    logger.debug(f"fix {name}: {len(obligations)} obligations")
    return FixResult(annotated, obligations, function)


def unfold(a: Var, body: Comp, arg: Term, depth: int,
           definitions: Optional[Mapping[str, FunDef]] = None, dom: Optional[DomainConfig] = None) -> Comp:
    """
    Expand recursive calls of body at a closed argument

    Closed conditions are decided on the way so only the taken branch is
    expanded; every call argument must be closed once reached.

    Raises:
        NonTermination: More than depth nested expansions
        UnsupportedShape: A call whose argument depends on an effect result
    """
    dom = dom or DomainConfig.from_config()

    def closed(t: Term) -> Term:
        return value_term(eval_term(t, dom=dom, definitions=definitions), t.ty)

    def expand(value: Term, level: int) -> Comp:
        if level > depth:
            raise NonTermination(f"unfolding deeper than {depth}")
        return walk(subst_comp(body, {a.name: value}), level)

    def walk(m: Comp, level: int) -> Comp:
        if isinstance(m, Ret):
            return m
        if isinstance(m, Ite):
            if not m.cond.fv:
                taken = m.then if eval_term(m.cond, dom=dom, definitions=definitions) else m.orelse
                return walk(taken, level)
            return Ite(m.cond, walk(m.then, level), walk(m.orelse, level))
        if isinstance(m, LetPure):
            if not m.value.fv:
                return walk(subst_comp(m.body, {m.var.name: closed(m.value)}), level)
            return LetPure(m.var, m.value, walk(m.body, level))
        if isinstance(m, Call):
            if m.op != 'call':
                return Call(m.op, m.arg, m.binder, walk(m.cont, level))
            if m.arg.fv:
                raise UnsupportedShape(f"recursive call on {m.arg} is not closed")
            return comp_bind(expand(closed(m.arg), level + 1), m.binder, walk(m.cont, level))
        raise ShapeMismatch(f"unexpected computation node {type(m).__name__}")

    return expand(arg, 0)


if __name__ == "__main__":
    from core.logic import FunSym as Fn
    n = Var('n', INT)
    fib_spec = Fn('fib_spec', INT, INT)
    r = Var('r', INT)
    inv = SpecExpr(wpure().shape(INT), Forall(r, Implies(Atom(Cmp('=', r, Apply(fib_spec, n))),
                                                       PApply(wpure().shape(INT).posts[0], (r,)))))
    print(recursive_observation(theta_pure(), n, inv, Measure.default_for(n)).sig.op_names)
