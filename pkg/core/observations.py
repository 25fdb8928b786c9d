#!/usr/bin/env python3
"""
Observations - Effect observations θ : M → W as per-operation wp rules

An observation maps every operation of a signature to the specification of
its generic effect; the action on a whole tree follows from the morphism
laws (ret goes to ret, calls go to bind of the operation's spec with the
continuation's spec). Builders cover the named observations, observations
derived from monad algebras, and a law checker that compares θ against
the runners.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Tuple

# Handle imports
try:
    from core.effects import (
        Call, Comp, Ite, LetPure, OpDecl, Ret, Signature, comp_bind, enumerate_trees, exc_sig,
        io_sig, iost_sig, nd_sig, pure_sig, run_exc, run_io, run_iost, run_nd, run_pure,
        run_state, st_sig,
    )
    from core.errors import AlgebraLawViolation, TypingError, UnhandledOp, UnknownObservation
    from core.logic import (
        BOOL, INT, UNIT, UNIT_LIT, TRUE_LIT, FALSE_LIT, TOP, BOT, Atom, Conj, Ctor, Disj,
        Env, Evaluator, Forall, Formula, Implies, ListLit, Neg, PApply, PredLam,
        Term, Ty, Var, VOID, beta, carrier, event_type, fresh_name, normalize, value_term, Cons,
    )
    from core.specmonads import (
        NestedSpec, SpecExpr, SpecMonad, WSt, wexc, wfr, whist, whistst, wiost, wpure, wst,
    )
    from utils.config import Config, DomainConfig
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core.effects import (
        Call, Comp, Ite, LetPure, OpDecl, Ret, Signature, comp_bind, enumerate_trees, exc_sig,
        io_sig, iost_sig, nd_sig, pure_sig, run_exc, run_io, run_iost, run_nd, run_pure,
        run_state, st_sig,
    )
    from core.errors import AlgebraLawViolation, TypingError, UnhandledOp, UnknownObservation
    from core.logic import (
        BOOL, INT, UNIT, UNIT_LIT, TRUE_LIT, FALSE_LIT, TOP, BOT, Atom, Conj, Ctor, Disj,
        Env, Evaluator, Forall, Formula, Implies, ListLit, Neg, PApply, PredLam,
        Term, Ty, Var, VOID, beta, carrier, event_type, fresh_name, normalize, value_term, Cons,
    )
    from core.specmonads import (
        NestedSpec, SpecExpr, SpecMonad, WSt, wexc, wfr, whist, whistst, wiost, wpure, wst,
    )
    from utils.config import Config, DomainConfig

logger = logging.getLogger(__name__)

# Generic-effect specification of one operation: input term -> spec at the output type
GenSpec = Callable[[Term], SpecExpr]
# Runner summary of a closed tree over every context, used to compare trees semantically
Oracle = Callable[[Comp, DomainConfig], object]


@dataclass(frozen=True)
class OpRule:
    """θ's action on one operation, given by the spec of its generic effect"""
    op: OpDecl
    gen: GenSpec

    def template(self, target: SpecMonad, i: Term, binder: Var, k: SpecExpr) -> SpecExpr:
        """bind^W (gen i) (λbinder. k)"""
        return target.bind(self.gen(i), binder, k)


@dataclass
class Observation:
    """
    Effect observation θ from a signature's free monad into a spec monad

    Attributes:
        name: Registry key (st, exc, nd-demonic, ...)
        sig: Source signature
        target: Target specification monad
        rules: One OpRule per operation of sig
        oracle: Runner summary used by the law checker
    """
    name: str
    sig: Signature
    target: SpecMonad
    rules: Dict[str, OpRule] = field(default_factory=dict)
    oracle: Optional[Oracle] = None

    def __post_init__(self):
        missing = [op for op in self.sig.op_names if op not in self.rules]
        if missing:
            raise UnhandledOp(", ".join(missing))

    # ---- rules ----

    def ret(self, v: Term) -> SpecExpr:
        return self.target.ret(v)

    def gen_spec(self, op: str, i: Term) -> SpecExpr:
        rule = self.rules.get(op)
        if rule is None:
            raise UnhandledOp(op)
        return rule.gen(i)

    def call(self, op: str, i: Term, binder: Var, k: SpecExpr) -> SpecExpr:
        rule = self.rules.get(op)
        if rule is None:
            raise UnhandledOp(op)
        return rule.template(self.target, i, binder, k)

    def ite(self, cond: Term, w1: SpecExpr, w2: SpecExpr) -> SpecExpr:
        """(c ⇒ w1) ∧ (¬c ⇒ w2); collapses when the branches agree"""
        if w1.body == w2.body:
            return w1
        c = Atom(cond)
        return SpecExpr(w1.shape, Conj((Implies(c, w1.body), Implies(Neg(c), w2.body))))

    def extend(self, op: OpDecl, gen: GenSpec, name: Optional[str] = None) -> 'Observation':
        """Observation over sig + op (used to add the recursion operation)"""
        rules = dict(self.rules)
        rules[op.name] = OpRule(op, gen)
        return Observation(name or self.name, self.sig.extend(op), self.target, rules, None)

    # ---- homomorphic extension ----

    def theta(self, m: Comp) -> SpecExpr:
        """θ(m), computed by structural recursion"""
        if isinstance(m, Ret):
            return self.ret(m.value)
        if isinstance(m, Call):
            return self.call(m.op, m.arg, m.binder, self.theta(m.cont))
        if isinstance(m, Ite):
            return self.ite(m.cond, self.theta(m.then), self.theta(m.orelse))
        if isinstance(m, LetPure):
            return self.theta(m.body).subst({m.var.name: m.value})
        raise TypingError("computation", "a computation node", type(m).__name__)


# =============================================================================
# Builders
# =============================================================================

def _spec(target: SpecMonad, out_ty: Ty, build: Callable) -> SpecExpr:
    shape = target.shape(out_ty)
    return SpecExpr(shape, build(*shape.binders))


def _rules(sig: Signature, gens: Mapping[str, GenSpec]) -> Dict[str, OpRule]:
    return {op.name: OpRule(op, gens[op.name]) for op in sig.ops}


def _ctx_values(ty: Ty, dom: DomainConfig):
    return carrier(ty, dom)


def theta_pure() -> Observation:
    """Identity observation of the effect-free signature into W^Pure"""
    return Observation('pure', pure_sig(), wpure(), {}, lambda m, dom: run_pure(m))


def theta_st(state_ty: Ty = INT) -> Observation:
    """θ^St: get ↦ λp s0. p⟨s0, s0⟩, put s ↦ λp s0. p⟨*, s⟩"""
    sig = st_sig(state_ty)
    target = wst(state_ty)
    gens = {
        'get': lambda i: _spec(target, state_ty, lambda p, s0: PApply(p, (s0, s0))),
        'put': lambda i: _spec(target, UNIT, lambda p, s0: PApply(p, (UNIT_LIT, i))),
    }

    def oracle(m, dom):
        return tuple(run_state(m, s) for s in _ctx_values(state_ty, dom))

    return Observation('st', sig, target, _rules(sig, gens), oracle)


def theta_exc(exn_ty: Ty) -> Observation:
    """θ^Exc into W^Exc: throw e ↦ λp q. q e"""
    sig = exc_sig(exn_ty)
    target = wexc(exn_ty)
    gens = {'throw': lambda e: _spec(target, VOID, lambda p, q: PApply(q, (e,)))}
    return Observation('exc', sig, target, _rules(sig, gens), lambda m, dom: run_exc(m))


def theta_from_exnmap(exn_ty: Ty, handler: PredLam, name: str = 'exc-map') -> Observation:
    """Observation into W^Pure sending throw e to λp. handler(e)"""
    sig = exc_sig(exn_ty)
    target = wpure()
    gens = {'throw': lambda e: _spec(target, VOID, lambda p: beta(handler, (e,)))}
    return Observation(name, sig, target, _rules(sig, gens), lambda m, dom: run_exc(m))


def theta_bot(exn_ty: Ty) -> Observation:
    """Total correctness: exceptions satisfy no postcondition"""
    return theta_from_exnmap(exn_ty, PredLam((Var('e', exn_ty),), BOT), 'exc-total')


def theta_top(exn_ty: Ty) -> Observation:
    """Partial correctness: exceptions satisfy every postcondition"""
    return theta_from_exnmap(exn_ty, PredLam((Var('e', exn_ty),), TOP), 'exc-partial')


def _nd(name: str, demonic: bool) -> Observation:
    sig = nd_sig()
    target = wpure()
    combine = (lambda a, b: Conj((a, b))) if demonic else (lambda a, b: Disj((a, b)))
    gens = {
        'choice': lambda i: _spec(target, BOOL, lambda p: combine(PApply(p, (TRUE_LIT,)),
                                                                  PApply(p, (FALSE_LIT,)))),
        'fail': lambda i: _spec(target, VOID, lambda p: TOP if demonic else BOT),
    }
    return Observation(name, sig, target, _rules(sig, gens), lambda m, dom: run_nd(m))


def theta_demonic() -> Observation:
    """θ^∀: choice ↦ λp. p true ∧ p false, fail ↦ λp. ⊤"""
    return _nd('nd-demonic', True)


def theta_angelic() -> Observation:
    """θ^∃: choice ↦ λp. p true ∨ p false, fail ↦ λp. ⊥"""
    return _nd('nd-angelic', False)


def _io_oracle(input_ty: Ty):
    def oracle(m, dom):
        streams = itertools.product(carrier(input_ty, dom), repeat=m.depth)
        return tuple(run_io(m, stream) for stream in streams)
    return oracle


def _events(sig: Signature):
    ev = event_type(sig.param('I', INT), sig.param('O', INT))
    return ev, (lambda i: Ctor('In', (i,), ev)), (lambda o: Ctor('Out', (o,), ev))


def _single(ev, t: Term) -> ListLit:
    return ListLit((t,), ev)


def theta_fr(input_ty: Ty = INT, output_ty: Ty = INT) -> Observation:
    """θ^Fr: read ↦ λp. ∀i. p⟨i, [In i]⟩, write o ↦ λp. p⟨*, [Out o]⟩"""
    sig = io_sig(input_ty, output_ty)
    ev, In, Out = _events(sig)
    target = wfr(ev)

    def read(_):
        def build(p):
            i = Var(fresh_name('i'), input_ty)
            return Forall(i, PApply(p, (i, _single(ev, In(i)))))
        return _spec(target, input_ty, build)

    gens = {
        'read': read,
        'write': lambda o: _spec(target, UNIT, lambda p: PApply(p, (UNIT_LIT, _single(ev, Out(o))))),
    }
    return Observation('io-free', sig, target, _rules(sig, gens), _io_oracle(input_ty))


def theta_hist(input_ty: Ty = INT, output_ty: Ty = INT) -> Observation:
    """θ^Hist: as θ^Fr with the history binder available to specs"""
    sig = io_sig(input_ty, output_ty)
    ev, In, Out = _events(sig)
    target = whist(ev)

    def read(_):
        def build(p, h):
            i = Var(fresh_name('i'), input_ty)
            return Forall(i, PApply(p, (i, _single(ev, In(i)))))
        return _spec(target, input_ty, build)

    gens = {
        'read': read,
        'write': lambda o: _spec(target, UNIT,
                                 lambda p, h: PApply(p, (UNIT_LIT, _single(ev, Out(o))))),
    }
    return Observation('io-hist', sig, target, _rules(sig, gens), _io_oracle(input_ty))


def theta_histst(input_ty: Ty = INT, output_ty: Ty = INT) -> Observation:
    """θ^HistST: the history is threaded and events are prepended"""
    sig = io_sig(input_ty, output_ty)
    ev, In, Out = _events(sig)
    target = whistst(ev)

    def read(_):
        def build(p, h):
            i = Var(fresh_name('i'), input_ty)
            return Forall(i, PApply(p, (i, Cons(In(i), h))))
        return _spec(target, input_ty, build)

    gens = {
        'read': read,
        'write': lambda o: _spec(target, UNIT, lambda p, h: PApply(p, (UNIT_LIT, Cons(Out(o), h)))),
    }
    return Observation('io-histst', sig, target, _rules(sig, gens), _io_oracle(input_ty))


def theta_iost(state_ty: Ty = INT, input_ty: Ty = INT, output_ty: Ty = INT) -> Observation:
    """θ^IOSt into W^IOSt (binders p s h)"""
    sig = iost_sig(state_ty, input_ty, output_ty)
    ev, In, Out = _events(sig)
    target = wiost(state_ty, ev)
    nil = ListLit((), ev)

    def read(_):
        def build(p, s, h):
            i = Var(fresh_name('i'), input_ty)
            return Forall(i, PApply(p, (i, s, _single(ev, In(i)))))
        return _spec(target, input_ty, build)

    gens = {
        'get': lambda _: _spec(target, state_ty, lambda p, s, h: PApply(p, (s, s, nil))),
        'put': lambda x: _spec(target, UNIT, lambda p, s, h: PApply(p, (UNIT_LIT, x, nil))),
        'read': read,
        'write': lambda o: _spec(target, UNIT,
                                 lambda p, s, h: PApply(p, (UNIT_LIT, s, _single(ev, Out(o))))),
    }

    def oracle(m, dom):
        return tuple(run_iost(m, s, stream)
                     for s in carrier(state_ty, dom)
                     for stream in itertools.product(carrier(input_ty, dom), repeat=m.depth))

    return Observation('iost', sig, target, _rules(sig, gens), oracle)


# =============================================================================
# Registry
# =============================================================================

REGISTRY_KEYS = ('st', 'exc', 'exc-total', 'exc-partial', 'nd-demonic', 'nd-angelic',
                 'io-free', 'io-hist', 'io-histst', 'iost')

# Signature each key observes, for checking effect declarations against labels
KEY_EFFECTS = {
    'st': 'St', 'exc': 'Exc', 'exc-total': 'Exc', 'exc-partial': 'Exc',
    'nd-demonic': 'ND', 'nd-angelic': 'ND',
    'io-free': 'IO', 'io-hist': 'IO', 'io-histst': 'IO', 'iost': 'IOSt', 'pure': 'Pure',
}


def build_observation(key: str, params: Optional[Mapping[str, Ty]] = None) -> Observation:
    """
    Instantiate a named observation

    Args:
        key: One of REGISTRY_KEYS (or 'pure')
        params: Carrier parameters S, E, I, O (ints when absent)

    Raises:
        UnknownObservation: If key is not registered
    """
    params = dict(params or {})
    S = params.get('S', INT)
    I = params.get('I', INT)
    O = params.get('O', INT)
    E = params.get('E', INT)
    builders = {
        'pure': lambda: theta_pure(),
        'st': lambda: theta_st(S),
        'exc': lambda: theta_exc(E),
        'exc-total': lambda: theta_bot(E),
        'exc-partial': lambda: theta_top(E),
        'nd-demonic': theta_demonic,
        'nd-angelic': theta_angelic,
        'io-free': lambda: theta_fr(I, O),
        'io-hist': lambda: theta_hist(I, O),
        'io-histst': lambda: theta_histst(I, O),
        'iost': lambda: theta_iost(S, I, O),
    }
    if key not in builders:
        raise UnknownObservation(key)
    logger.debug(f"Building observation {key} with params {sorted(params)}")
    return builders[key]()


# =============================================================================
# Algebras
# =============================================================================

# α_op(i, k): interpret op applied to a continuation of answers
AlgebraOp = Callable[[Term, PredLam], Formula]


@dataclass
class AlgebraRule:
    """
    An M-algebra with answers in prop ('prop') or S → prop ('state')

    Attributes:
        answer: 'prop' or 'state'
        ops: op name -> α_op; for 'state' answers the continuation takes
            (output, state) and the result may mention the initial state s0
        state_ty: S for 'state' answers
    """
    answer: str
    ops: Dict[str, AlgebraOp]
    state_ty: Ty = INT


def alpha_forall() -> AlgebraRule:
    """α^∀: conjunction over choices, ⊤ on failure"""
    return AlgebraRule('prop', {
        'choice': lambda i, k: Conj((beta(k, (TRUE_LIT,)), beta(k, (FALSE_LIT,)))),
        'fail': lambda i, k: TOP,
    })


def alpha_exists() -> AlgebraRule:
    """α^∃: disjunction over choices, ⊥ on failure"""
    return AlgebraRule('prop', {
        'choice': lambda i, k: Disj((beta(k, (TRUE_LIT,)), beta(k, (FALSE_LIT,)))),
        'fail': lambda i, k: BOT,
    })


def alpha_state(state_ty: Ty = INT) -> AlgebraRule:
    """α^St(f)(s) = (π1 (f s)) (π2 (f s)), presented per operation"""
    s0 = Var('s0', state_ty)
    return AlgebraRule('state', {
        'get': lambda i, k: beta(k, (s0, s0)),
        'put': lambda i, k: beta(k, (UNIT_LIT, i)),
    }, state_ty)


def from_algebra(sig: Signature, alg: AlgebraRule, name: str = 'algebra',
                 oracle: Optional[Oracle] = None, check_dom: Optional[DomainConfig] = None,
                 check_depth: int = 2) -> Observation:
    """
    Observation induced by an algebra: op ↦ λp ctx. α_op(i, λo. p o ctx)

    When check_dom is given, the algebra is checked against the runner
    oracle on every tree up to check_depth.

    Raises:
        AlgebraLawViolation: The induced observation separates runner-equal trees
    """
    if alg.answer == 'prop':
        target = wpure()
    elif alg.answer == 'state':
        target = WSt(alg.state_ty)
    else:
        raise AlgebraLawViolation(f"unsupported answer shape {alg.answer}")

    def gen_for(op: OpDecl) -> GenSpec:
        alpha = alg.ops[op.name]

        def gen(i: Term) -> SpecExpr:
            shape = target.shape(op.out)
            p = shape.posts[0]
            params = tuple(Var(fresh_name(n), ty) for n, ty in zip(('o', 's'), p.arg_tys))
            return SpecExpr(shape, alpha(i, PredLam(params, PApply(p, params))))
        return gen

    missing = [op.name for op in sig.ops if op.name not in alg.ops]
    if missing:
        raise UnhandledOp(", ".join(missing))
    obs = Observation(name, sig, target, {op.name: OpRule(op, gen_for(op)) for op in sig.ops}, oracle)
    if check_dom is not None and oracle is not None:
        report = check_morphism_laws(obs, check_dom, check_depth)
        if not report.passed:
            raise AlgebraLawViolation(f"algebra {name} violates the monad equations", report.witness)
    return obs


def recover_algebra(obs: Observation, op: str) -> AlgebraOp:
    """α_op(i, k) = θ(op⟨i, λo. ret o⟩) applied to k"""
    return lambda i, k: normalize(obs.gen_spec(op, i).instantiate((k,)))


# =============================================================================
# Operation lifting
# =============================================================================

def lift_op_to_spec(obs: Observation, op: str, i: Term, binder: Var, w: SpecExpr) -> SpecExpr:
    """
    op^W⟨i, w⟩ = join(θ(op⟨i, λo. ret (w o)⟩))

    The nested specification is θ of the generic effect with the family w
    selected by its output.
    """
    decl = obs.sig.op(op)
    o = Var(fresh_name('o'), decl.out)
    outer = obs.theta(Call(op, i, o, Ret(o)))
    nested = NestedSpec(outer, binder, w)
    return obs.target.join(nested)


def lift_op_direct(obs: Observation, op: str, i: Term, binder: Var, w: SpecExpr) -> SpecExpr:
    """The operation rule's template with κ := w"""
    return obs.call(op, i, binder, w)


# =============================================================================
# Law checking
# =============================================================================

@dataclass
class LawReport:
    """Outcome of check_morphism_laws"""
    observation: str
    checked: int = 0
    passed: bool = True
    law: Optional[str] = None
    witness: Optional[Tuple] = None

    def summary(self) -> str:
        if self.passed:
            return f"✓ {self.observation}: {self.checked} checks passed"
        return f"❌ {self.observation}: {self.law} fails on {self.witness}"


def small_values(dom: DomainConfig):
    """Closed literal terms per type for tree enumeration"""
    def values(ty: Ty):
        if ty == VOID:
            return []
        return [value_term(v, ty) for v in carrier(ty, dom)]
    return values


def check_morphism_laws(obs: Observation, dom: DomainConfig, depth: int = Config.LAW_CHECK_DEPTH,
                        result_ty: Ty = None, limit: Optional[int] = None) -> LawReport:
    """
    Check θ(ret v) = ret v, θ(bind m f) = bind (θ m) (θ ∘ f), and that
    runner-equal trees get extensionally equal specifications

    Args:
        obs: Observation under test (needs an oracle for the last law)
        dom: Carriers for values, contexts and post tables
        depth: Maximum tree depth
        result_ty: Result type of enumerated trees (the first input-free type by default)
        limit: Optional cap on enumerated trees

    Raises:
        CarrierTooLarge: Post tables exceed dom's caps
    """
    report = LawReport(obs.name)
    evaluator = Evaluator(dom)
    values = small_values(dom)
    result_ty = result_ty or (BOOL if obs.sig.name == 'ND' else INT)
    target = obs.target

    def holds(formula: Formula) -> bool:
        report.checked += 1
        return evaluator.run(formula, Env())

    def fail(law, witness):
        report.passed = False
        report.law = law
        report.witness = witness
        logger.info(f"Morphism law '{law}' fails for {obs.name}")
        return report

    for v in values(result_ty):
        if not holds(target.equiv(obs.theta(Ret(v)), target.ret(v))):
            return fail('ret', (v,))

    trees = list(itertools.islice(enumerate_trees(obs.sig, result_ty, values, depth), limit))
    x = Var('x', result_ty)
    conts = list(itertools.islice(enumerate_trees(obs.sig, result_ty, values, depth, (x,)), limit))
    for m in trees:
        w_m = obs.theta(m)
        for k in conts:
            composed = obs.theta(comp_bind(m, x, k))
            split = target.bind(w_m, x, obs.theta(k))
            if not holds(target.equiv(composed, split)):
                return fail('bind', (m, k))

    if obs.oracle is not None:
        groups: Dict[object, Comp] = {}
        for m in trees:
            key = _freeze(obs.oracle(m, dom))
            first = groups.setdefault(key, m)
            if first is not m and not holds(target.equiv(obs.theta(first), obs.theta(m))):
                return fail('well-defined', (first, m))
    logger.debug(f"{obs.name}: {report.checked} law checks over {len(trees)} trees")
    return report


def _freeze(outcome):
    if isinstance(outcome, (set, frozenset)):
        return frozenset(outcome)
    return outcome


if __name__ == "__main__":
    Config.setup_logging()
    for key in REGISTRY_KEYS:
        obs = build_observation(key)
        print(f"{key:12s} -> {obs.target.describe()} ops={list(obs.sig.op_names)}")
