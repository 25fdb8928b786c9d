#!/usr/bin/env python3
"""
Effects - Effect signatures, free-monad computation trees and their runners

A computation is a finite tree: ret leaves, operation calls whose
continuation binds the operation's output, pure conditionals and pure
let-bindings. Runners interpret trees in the concrete monads (state,
exceptions, finite nondeterminism, IO and IO with state) and serve as the
brute-force oracles the symbolic layers are tested against.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterator, Mapping, Optional, Sequence, Tuple

# Handle imports
try:
    from core.errors import InputExhausted, NonTermination, TypingError, UnhandledOp
    from core.logic import (
        BOOL, INT, UNIT, VOID, CtorVal, Env, Evaluator, FunDef, SumVal, Term, Ty, Var, VoidTy,
        event_type, fresh_name, subst_terms, typecheck, value_term, default_value,
    )
    from utils.config import Config, DomainConfig
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core.errors import InputExhausted, NonTermination, TypingError, UnhandledOp
    from core.logic import (
        BOOL, INT, UNIT, VOID, CtorVal, Env, Evaluator, FunDef, SumVal, Term, Ty, Var, VoidTy,
        event_type, fresh_name, subst_terms, typecheck, value_term, default_value,
    )
    from utils.config import Config, DomainConfig

logger = logging.getLogger(__name__)


# =============================================================================
# Signatures
# =============================================================================

@dataclass(frozen=True)
class OpDecl:
    """An algebraic operation op : inp ~> out"""
    name: str
    inp: Ty
    out: Ty

    def __str__(self):
        return f"{self.name} : {self.inp} ~> {self.out}"


@dataclass(frozen=True)
class Signature:
    """
    Named set of operations plus the carrier parameters they mention

    Attributes:
        name: Signature name (St, Exc, ND, IO, IOSt, GenRec, Pure or user-declared)
        ops: Operation declarations, names unique
        params: Fixed carrier parameters, e.g. (('S', int),)
    """
    name: str
    ops: Tuple[OpDecl, ...] = ()
    params: Tuple[Tuple[str, Ty], ...] = ()

    def __post_init__(self):
        names = [op.name for op in self.ops]
        if len(set(names)) != len(names):
            raise TypingError(f"signature {self.name}", "unique operation names", ", ".join(names))

    def op(self, name: str) -> OpDecl:
        for op in self.ops:
            if op.name == name:
                return op
        raise UnhandledOp(name)

    def has(self, name: str) -> bool:
        return any(op.name == name for op in self.ops)

    def param(self, key: str, default: Optional[Ty] = None) -> Ty:
        for k, ty in self.params:
            if k == key:
                return ty
        if default is None:
            raise TypingError(f"signature {self.name}", f"parameter {key}", "none")
        return default

    @property
    def op_names(self) -> Tuple[str, ...]:
        return tuple(op.name for op in self.ops)

    def union(self, other: 'Signature', name: Optional[str] = None) -> 'Signature':
        params = dict(self.params)
        params.update(dict(other.params))
        ops = self.ops + tuple(op for op in other.ops if not self.has(op.name))
        return Signature(name or f"{self.name}+{other.name}", ops, tuple(params.items()))

    def extend(self, op: OpDecl) -> 'Signature':
        return Signature(self.name, self.ops + (op,), self.params)


def pure_sig() -> Signature:
    return Signature('Pure')


def st_sig(state_ty: Ty = INT) -> Signature:
    return Signature('St', (OpDecl('get', UNIT, state_ty), OpDecl('put', state_ty, UNIT)),
                     (('S', state_ty),))


def exc_sig(exn_ty: Ty) -> Signature:
    return Signature('Exc', (OpDecl('throw', exn_ty, VOID),), (('E', exn_ty),))


def nd_sig() -> Signature:
    return Signature('ND', (OpDecl('choice', UNIT, BOOL), OpDecl('fail', UNIT, VOID)))


def io_sig(input_ty: Ty = INT, output_ty: Ty = INT) -> Signature:
    return Signature('IO', (OpDecl('read', UNIT, input_ty), OpDecl('write', output_ty, UNIT)),
                     (('I', input_ty), ('O', output_ty)))


def iost_sig(state_ty: Ty = INT, input_ty: Ty = INT, output_ty: Ty = INT) -> Signature:
    return st_sig(state_ty).union(io_sig(input_ty, output_ty), 'IOSt')


def genrec_sig(arg_ty: Ty, res_ty: Ty) -> Signature:
    """General recursion, monomorphic per fix site"""
    return Signature('GenRec', (OpDecl('call', arg_ty, res_ty),), (('A', arg_ty), ('B', res_ty)))


def free_sig(name: str, ops: Sequence[OpDecl]) -> Signature:
    return Signature(name, tuple(ops))


def sig_event_type(sig: Signature):
    return event_type(sig.param('I', INT), sig.param('O', INT))


# =============================================================================
# Computation trees
# =============================================================================

class Comp:
    """Base class of computation-tree nodes"""

    @cached_property
    def fv(self) -> FrozenSet[str]:
        raise NotImplementedError

    @cached_property
    def depth(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class Ret(Comp):
    value: Term

    @cached_property
    def fv(self):
        return self.value.fv

    @cached_property
    def depth(self):
        return 0


@dataclass(frozen=True)
class Call(Comp):
    op: str
    arg: Term
    binder: Var
    cont: Comp

    @cached_property
    def fv(self):
        return self.arg.fv | (self.cont.fv - {self.binder.name})

    @cached_property
    def depth(self):
        return 1 + self.cont.depth


@dataclass(frozen=True)
class Ite(Comp):
    cond: Term
    then: Comp
    orelse: Comp

    @cached_property
    def fv(self):
        return self.cond.fv | self.then.fv | self.orelse.fv

    @cached_property
    def depth(self):
        return 1 + max(self.then.depth, self.orelse.depth)


@dataclass(frozen=True)
class LetPure(Comp):
    var: Var
    value: Term
    body: Comp

    @cached_property
    def fv(self):
        return self.value.fv | (self.body.fv - {self.var.name})

    @cached_property
    def depth(self):
        return self.body.depth


def subst_comp(m: Comp, mapping: Mapping[str, Term]) -> Comp:
    """Capture-avoiding substitution of term variables inside a computation"""
    if not mapping or not (m.fv & mapping.keys()):
        return m
    if isinstance(m, Ret):
        return Ret(subst_terms(m.value, mapping))
    if isinstance(m, Ite):
        return Ite(subst_terms(m.cond, mapping), subst_comp(m.then, mapping),
                   subst_comp(m.orelse, mapping))
    if isinstance(m, Call):
        binder, cont = _under(m.binder, m.cont, mapping)
        return Call(m.op, subst_terms(m.arg, mapping), binder, cont)
    if isinstance(m, LetPure):
        var, body = _under(m.var, m.body, mapping)
        return LetPure(var, subst_terms(m.value, mapping), body)
    raise TypingError("computation", "a computation node", type(m).__name__)


def _under(var: Var, body: Comp, mapping):
    inner = {k: v for k, v in mapping.items() if k != var.name and k in body.fv}
    if not inner:
        return var, body
    avoid = frozenset().union(*(t.fv for t in inner.values()))
    if var.name in avoid:
        new = Var(fresh_name(var.name), var.vty)
        body = subst_comp(body, {var.name: new})
        var = new
    return var, subst_comp(body, inner)


def comp_ret(t: Term) -> Comp:
    typecheck(t)
    return Ret(t)


def comp_bind(m: Comp, binder: Var, k: Comp) -> Comp:
    """
    Graft k at every ret leaf of m, substituting the leaf value for binder

    Raises:
        TypingError: If a leaf value's type differs from the binder's
    """
    if isinstance(m, Ret):
        if m.value.ty != binder.ty and not isinstance(m.value.ty, VoidTy):
            raise TypingError(f"bind of {binder.name}", binder.ty, m.value.ty)
        return subst_comp(k, {binder.name: m.value})
    if isinstance(m, Ite):
        return Ite(m.cond, comp_bind(m.then, binder, k), comp_bind(m.orelse, binder, k))
    if isinstance(m, Call):
        b, cont = m.binder, m.cont
        if b.name in k.fv and b.name != binder.name:
            new = Var(fresh_name(b.name), b.vty)
            cont = subst_comp(cont, {b.name: new})
            b = new
        return Call(m.op, m.arg, b, comp_bind(cont, binder, k))
    if isinstance(m, LetPure):
        v, body = m.var, m.body
        if v.name in k.fv and v.name != binder.name:
            new = Var(fresh_name(v.name), v.vty)
            body = subst_comp(body, {v.name: new})
            v = new
        return LetPure(v, m.value, comp_bind(body, binder, k))
    raise TypingError("computation", "a computation node", type(m).__name__)


def gen_of_op(op: OpDecl, i: Term) -> Comp:
    """The generic effect of op: op(i, λo. ret o)"""
    if typecheck(i) != op.inp:
        raise TypingError(f"argument of {op.name}", op.inp, i.ty)
    o = Var(fresh_name('o'), op.out)
    return Call(op.name, i, o, Ret(o))


def op_of_gen(op: OpDecl, i: Term, binder: Var, k: Comp) -> Comp:
    """op(i, λbinder. k) rebuilt as bind (gen i) (λbinder. k)"""
    if binder.ty != op.out:
        raise TypingError(f"binder of {op.name}", op.out, binder.ty)
    return comp_bind(gen_of_op(op, i), binder, k)


def absurd(m: Comp, ty: Ty) -> Comp:
    """Retype a computation whose leaves are void-typed (after throw or fail)"""
    if isinstance(m, Ret):
        if isinstance(m.value.ty, VoidTy):
            return Ret(value_term(default_value(ty), ty))
        return m
    if isinstance(m, Call):
        return Call(m.op, m.arg, m.binder, absurd(m.cont, ty))
    if isinstance(m, Ite):
        return Ite(m.cond, absurd(m.then, ty), absurd(m.orelse, ty))
    if isinstance(m, LetPure):
        return LetPure(m.var, m.value, absurd(m.body, ty))
    return m


def join_types(a: Ty, b: Ty, where: str = "branches") -> Ty:
    if isinstance(a, VoidTy):
        return b
    if isinstance(b, VoidTy) or a == b:
        return a
    raise TypingError(where, a, b)


def comp_type(m: Comp, sig: Signature) -> Ty:
    """
    Result type of m over sig

    Raises:
        TypingError: ill-typed node
        UnhandledOp: operation not in sig
    """
    if isinstance(m, Ret):
        return typecheck(m.value)
    if isinstance(m, Call):
        op = sig.op(m.op)
        if typecheck(m.arg) != op.inp:
            raise TypingError(f"argument of {op.name}", op.inp, m.arg.ty)
        if m.binder.ty != op.out:
            raise TypingError(f"binder of {op.name}", op.out, m.binder.ty)
        return comp_type(m.cont, sig)
    if isinstance(m, Ite):
        if typecheck(m.cond) != BOOL:
            raise TypingError("if condition", BOOL, m.cond.ty)
        return join_types(comp_type(m.then, sig), comp_type(m.orelse, sig))
    if isinstance(m, LetPure):
        if typecheck(m.value) != m.var.ty:
            raise TypingError(f"let {m.var.name}", m.var.ty, m.value.ty)
        return comp_type(m.body, sig)
    raise TypingError("computation", "a computation node", type(m).__name__)


def comp_ops(m: Comp) -> FrozenSet[str]:
    """Operation names occurring in m"""
    if isinstance(m, Call):
        return frozenset([m.op]) | comp_ops(m.cont)
    if isinstance(m, Ite):
        return comp_ops(m.then) | comp_ops(m.orelse)
    if isinstance(m, LetPure):
        return comp_ops(m.body)
    return frozenset()


def comp_terms(m: Comp) -> Iterator[Term]:
    """Every term (values, arguments, conditions) syntactically present in m"""
    if isinstance(m, Ret):
        yield m.value
    elif isinstance(m, Call):
        yield m.arg
        yield from comp_terms(m.cont)
    elif isinstance(m, Ite):
        yield m.cond
        yield from comp_terms(m.then)
        yield from comp_terms(m.orelse)
    elif isinstance(m, LetPure):
        yield m.value
        yield from comp_terms(m.body)


# =============================================================================
# Runners
# =============================================================================

class Runner:
    """
    Shared evaluation core of the concrete interpreters

    Args:
        funs: Tables or callables for uninterpreted functions in the tree
        definitions: Defined logic functions
        dom: Domain used to evaluate terms (only defaults matter)
    """

    def __init__(self, funs: Optional[Mapping[str, object]] = None,
                 definitions: Optional[Mapping[str, FunDef]] = None,
                 dom: Optional[DomainConfig] = None):
        self.funs = dict(funs or {})
        self.evaluator = Evaluator(dom or DomainConfig(), definitions)

    def value(self, t: Term, env: Dict[str, object]):
        return self.evaluator.value(t, Env(vars=env, funs=self.funs))

    def walk(self, m: Comp, env: Dict[str, object], on_ret: Callable, on_op: Callable):
        """Run pure structure; hand ret leaves and calls to the effect-specific callbacks"""
        while True:
            if isinstance(m, Ret):
                return on_ret(self.value(m.value, env))
            if isinstance(m, LetPure):
                env = {**env, m.var.name: self.value(m.value, env)}
                m = m.body
            elif isinstance(m, Ite):
                m = m.then if self.value(m.cond, env) else m.orelse
            elif isinstance(m, Call):
                node, scope = m, env
                arg = self.value(node.arg, scope)

                def resume(out, node=node, scope=scope):
                    return self.walk(node.cont, {**scope, node.binder.name: out}, on_ret, on_op)

                return on_op(node.op, arg, resume)
            else:
                raise TypingError("computation", "a computation node", type(m).__name__)


def run_pure(m: Comp, env: Optional[Dict[str, object]] = None, **kwargs):
    """Value of an effect-free computation"""
    def on_op(op, arg, resume):
        raise UnhandledOp(op)
    return Runner(**kwargs).walk(m, dict(env or {}), lambda v: v, on_op)


def run_state(m: Comp, s0, env: Optional[Dict[str, object]] = None, **kwargs) -> Tuple[object, object]:
    """(value, final state) of m started in s0"""
    runner = Runner(**kwargs)

    def on_ret(v):
        return lambda s: (v, s)

    def on_op(op, arg, resume):
        if op == 'get':
            return lambda s: resume(s)(s)
        if op == 'put':
            return lambda s: resume(None)(arg)
        raise UnhandledOp(op)

    return runner.walk(m, dict(env or {}), on_ret, on_op)(s0)


def run_exc(m: Comp, env: Optional[Dict[str, object]] = None, **kwargs) -> SumVal:
    """inl value, or inr e for the first throw"""
    def on_op(op, arg, resume):
        if op == 'throw':
            return SumVal('r', arg)
        raise UnhandledOp(op)
    return Runner(**kwargs).walk(m, dict(env or {}), lambda v: SumVal('l', v), on_op)


def run_nd(m: Comp, env: Optional[Dict[str, object]] = None, **kwargs) -> FrozenSet:
    """Set of values reachable along choice paths that do not fail"""
    def on_op(op, arg, resume):
        if op == 'choice':
            return resume(True) | resume(False)
        if op == 'fail':
            return frozenset()
        raise UnhandledOp(op)
    return Runner(**kwargs).walk(m, dict(env or {}), lambda v: frozenset([v]), on_op)


def run_io(m: Comp, inputs: Sequence, env: Optional[Dict[str, object]] = None,
           **kwargs) -> Tuple[object, Tuple]:
    """
    (value, events) of m reading from a finite input stream

    Raises:
        InputExhausted: A read past the end of inputs
    """
    runner = Runner(**kwargs)

    def on_ret(v):
        return lambda pos, events: (v, events)

    def on_op(op, arg, resume):
        if op == 'read':
            def step(pos, events):
                if pos >= len(inputs):
                    raise InputExhausted(f"read #{pos + 1} with {len(inputs)} inputs")
                value = inputs[pos]
                return resume(value)(pos + 1, events + (CtorVal('In', (value,)),))
            return step
        if op == 'write':
            return lambda pos, events: resume(None)(pos, events + (CtorVal('Out', (arg,)),))
        raise UnhandledOp(op)

    return runner.walk(m, dict(env or {}), on_ret, on_op)(0, ())


def run_iost(m: Comp, s0, inputs: Sequence, env: Optional[Dict[str, object]] = None,
             **kwargs) -> Tuple[object, object, Tuple]:
    """(value, final state, events) of m"""
    runner = Runner(**kwargs)

    def on_ret(v):
        return lambda s, pos, events: (v, s, events)

    def on_op(op, arg, resume):
        if op == 'get':
            return lambda s, pos, events: resume(s)(s, pos, events)
        if op == 'put':
            return lambda s, pos, events: resume(None)(arg, pos, events)
        if op == 'read':
            def step(s, pos, events):
                if pos >= len(inputs):
                    raise InputExhausted(f"read #{pos + 1} with {len(inputs)} inputs")
                value = inputs[pos]
                return resume(value)(s, pos + 1, events + (CtorVal('In', (value,)),))
            return step
        if op == 'write':
            return lambda s, pos, events: resume(None)(s, pos, events + (CtorVal('Out', (arg,)),))
        raise UnhandledOp(op)

    return runner.walk(m, dict(env or {}), on_ret, on_op)(s0, 0, ())


def run_genrec(m: Comp, recurse: Callable[[object], object], env: Optional[Dict[str, object]] = None,
               max_depth: int = Config.MAX_DEFINITION_DEPTH, **kwargs):
    """
    Value of a recursive body whose call operation is answered by recurse

    Raises:
        NonTermination: Nesting exceeds max_depth
    """
    runner = Runner(**kwargs)
    depth = [0]

    def on_op(op, arg, resume):
        if op != 'call':
            raise UnhandledOp(op)
        if depth[0] >= max_depth:
            raise NonTermination(f"recursion deeper than {max_depth}")
        depth[0] += 1
        try:
            out = recurse(arg)
        finally:
            depth[0] -= 1
        return resume(out)

    return runner.walk(m, dict(env or {}), lambda v: v, on_op)


# =============================================================================
# Exhaustive tree enumeration
# =============================================================================

def enumerate_trees(sig: Signature, result_ty: Ty, values: Callable[[Ty], Sequence[Term]],
                    depth: int, scope: Tuple[Var, ...] = ()) -> Iterator[Comp]:
    """
    Every tree over sig up to depth, deterministically ordered

    Arguments and returned values range over values(ty) plus in-scope
    binders of the right type; conditionals branch on in-scope booleans.

    Args:
        sig: Operations available at call nodes
        result_ty: Type of ret leaves
        values: Closed literal terms per type
        depth: Maximum number of nested call/conditional nodes
    """
    def pool(ty: Ty):
        return list(values(ty)) + [v for v in scope if v.ty == ty]

    for v in pool(result_ty):
        yield Ret(v)
    if depth == 0:
        return
    for op in sig.ops:
        for arg in pool(op.inp):
            if isinstance(op.out, VoidTy):
                leaf = pool(result_ty)
                if leaf:
                    yield Call(op.name, arg, Var(f"o{len(scope)}", op.out), Ret(leaf[0]))
                continue
            binder = Var(f"x{len(scope)}", op.out)
            for cont in enumerate_trees(sig, result_ty, values, depth - 1, scope + (binder,)):
                yield Call(op.name, arg, binder, cont)
    for cond in [v for v in scope if v.ty == BOOL]:
        subtrees = list(enumerate_trees(sig, result_ty, values, depth - 1, scope))
        for then in subtrees:
            for orelse in subtrees:
                if then != orelse:
                    yield Ite(cond, then, orelse)


if __name__ == "__main__":
    from core.logic import Arith, int_lit
    sig = st_sig(INT)
    s = Var('s', INT)
    stmod = Call('get', value_term(None, UNIT), s,
                 Call('put', Arith('+', s, int_lit(1)), Var('u', UNIT), Ret(value_term(None, UNIT))))
    print(f"type: {comp_type(stmod, sig)}, run from 4: {run_state(stmod, 4)}")
