#!/usr/bin/env python3
"""
Specification Monads - Ordered specification monads as symbolic predicate transformers

A specification is a SpecExpr: a formula over post binders (predicate
variables such as p and q) and context binders (initial state s0, history h).
Descriptors give ret, bind and the order; bind is computed by predicate
substitution so every spec-level operation stays a formula.

Predicate-transformer monads are described by a stack of layers over
W^Pure (state, exceptions, update/writer). The named descriptors (wst,
wexc, whist, ...) implement their displayed formulas directly; the same
layers fed to apply_transformer give the generic transformed monad, and the
two are compared extensionally by the test-suite.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

# Handle imports
try:
    from core.errors import ShapeMismatch, TypingError
    from core.logic import (
        INT, UNIT, Append, Conj, Disj, Eq, Exists, Forall, ForallFun,
        ForallPred, Formula, Implies, ListLit, ListTy, Neg, PApply, Pair, PRedex, PredLam,
        PredVar, Proj, Term, Ty, UnitTy, Var, TOP, beta, conj, disj, event_type, exists,
        forall, forall_preds, fresh_name, implies, normalize, psubst, subst_terms,
    )
    from core.pretty import format_lambda
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core.errors import ShapeMismatch, TypingError
    from core.logic import (
        INT, UNIT, Append, Conj, Disj, Eq, Exists, Forall, ForallFun,
        ForallPred, Formula, Implies, ListLit, ListTy, Neg, PApply, Pair, PRedex, PredLam,
        PredVar, Proj, Term, Ty, UnitTy, Var, TOP, beta, conj, disj, event_type, exists,
        forall, forall_preds, fresh_name, implies, normalize, psubst, subst_terms,
    )
    from core.pretty import format_lambda

logger = logging.getLogger(__name__)


# =============================================================================
# Shapes and specifications
# =============================================================================

@dataclass(frozen=True)
class SpecShape:
    """
    Binders of a specification at one result type

    Attributes:
        name: Specification monad name
        result_ty: Result type A
        ctx: Context binders (initial state, history), in order
        posts: Post binders; posts[0] is the normal postcondition
    """
    name: str
    result_ty: Ty
    ctx: Tuple[Var, ...] = ()
    posts: Tuple[PredVar, ...] = ()

    @property
    def binders(self) -> Tuple[Union[PredVar, Var], ...]:
        return self.posts + self.ctx

    @property
    def post_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.posts)

    @property
    def ctx_names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.ctx)

    def post(self, name: str) -> PredVar:
        for p in self.posts:
            if p.name == name:
                return p
        raise ShapeMismatch(f"{self.name} has no post binder {name}")


@dataclass(frozen=True)
class SpecExpr:
    """A symbolic predicate transformer λ posts ctx. body"""
    shape: SpecShape
    body: Formula

    def instantiate(self, posts: Sequence = (), ctx: Sequence[Term] = ()) -> Formula:
        """Apply to postconditions (PredLam/PredVar) and context terms"""
        body = self.body
        if ctx:
            body = subst_terms(body, {v.name: t for v, t in zip(self.shape.ctx, ctx)})
        if posts:
            body = psubst(body, {p.name: q for p, q in zip(self.shape.posts, posts)})
        return body

    def normalized(self) -> 'SpecExpr':
        return SpecExpr(self.shape, normalize(self.body))

    def subst(self, mapping: Dict[str, Term]) -> 'SpecExpr':
        mapping = {k: v for k, v in mapping.items() if k not in self.shape.ctx_names}
        return SpecExpr(self.shape, subst_terms(self.body, mapping))

    def is_positive(self) -> bool:
        return is_positive(self.body, set(self.shape.post_names))

    def pretty(self) -> str:
        return format_lambda(self.shape.binders, self.body)

    def __str__(self):
        return self.pretty()


@dataclass(frozen=True)
class NestedSpec:
    """
    An element of W(W A): outer ranges over indices, inner is the family it selects

    join(NestedSpec(outer, x, inner)) = bind outer (λx. inner)
    """
    outer: SpecExpr
    binder: Var
    inner: SpecExpr


def is_positive(f: Formula, names: set, positive: bool = True) -> bool:
    """Every application of a predicate in names occurs in positive polarity"""
    if isinstance(f, PApply):
        return positive or f.pred.name not in names
    if isinstance(f, Implies):
        return is_positive(f.lhs, names, not positive) and is_positive(f.rhs, names, positive)
    if isinstance(f, Neg):
        return is_positive(f.arg, names, not positive)
    if isinstance(f, (Conj, Disj)):
        return all(is_positive(i, names, positive) for i in f.items)
    if isinstance(f, (Forall, Exists, ForallFun)):
        return is_positive(f.body, names, positive)
    if isinstance(f, ForallPred):
        return is_positive(f.body, names - {f.pred.name}, positive)
    if isinstance(f, PRedex):
        return is_positive(beta(f.lam, f.args), names, positive)
    return True


# =============================================================================
# Layers
# =============================================================================

@dataclass(frozen=True)
class Layer:
    """
    One transformer layer over W^Pure

    Attributes:
        kind: 'st' (state), 'exc' (exceptions) or 'upd' (update/writer log)
        ty: State type, exception type, or log element type
        name: Context binder (st, upd with history) or post binder (exc)
        history: For 'upd': the log is also available as a context binder
    """
    kind: str
    ty: Ty
    name: Optional[str] = None
    history: bool = False

    @property
    def extra_ty(self) -> Ty:
        return ListTy(self.ty) if self.kind == 'upd' else self.ty

    @property
    def has_ctx(self) -> bool:
        return self.kind == 'st' or (self.kind == 'upd' and self.history)


def StT(state_ty: Ty, name: str = 's0') -> Layer:
    return Layer('st', state_ty, name)


def ExcT(exn_ty: Ty, name: str = 'q') -> Layer:
    return Layer('exc', exn_ty, name)


def UpdateT(elem_ty: Ty, history: bool = False, name: str = 'h') -> Layer:
    """Writer (history=False) or update monad (history=True) over list elem_ty"""
    return Layer('upd', elem_ty, name, history)


@dataclass(frozen=True)
class Slot:
    name: str
    value_ty: Optional[Ty]       # None: the result type
    extras: Tuple[int, ...]      # layer indices, in argument order


def _layout(layers: Sequence[Layer]):
    ctx: List[int] = []
    main: List[int] = []
    exc_slots: List[Slot] = []
    for idx, layer in enumerate(layers):
        if layer.kind == 'st':
            ctx.insert(0, idx)
            main.insert(0, idx)
        elif layer.kind == 'upd':
            if layer.history:
                ctx.insert(0, idx)
            main.insert(0, idx)
        elif layer.kind == 'exc':
            exc_slots.append(Slot(layer.name, layer.ty, tuple(main)))
        else:
            raise ShapeMismatch(f"unknown layer kind {layer.kind}")
    return tuple(ctx), (Slot('p', None, tuple(main)),) + tuple(exc_slots)


# =============================================================================
# Descriptors
# =============================================================================

class SpecMonad:
    """
    Ordered specification monad over predicate transformers

    Subclasses provide ret and bind; shape and order come from the layers.
    """
    name = 'W'

    def __init__(self, layers: Sequence[Layer] = ()):
        self.layers: Tuple[Layer, ...] = tuple(layers)
        names = [l.name for l in self.layers if l.has_ctx or l.kind == 'exc']
        if len(set(names)) != len(names) or 'p' in names:
            raise ShapeMismatch(f"binder names clash in {self.name}: {names}")
        self.ctx_layers, self.slots = _layout(self.layers)

    # ---- shape ----

    def shape(self, result_ty: Ty) -> SpecShape:
        ctx = tuple(Var(self.layers[i].name, self.layers[i].extra_ty) for i in self.ctx_layers)
        posts = tuple(
            PredVar(slot.name, (slot.value_ty or result_ty,)
                    + tuple(self.layers[i].extra_ty for i in slot.extras))
            for slot in self.slots
        )
        return SpecShape(self.name, result_ty, ctx, posts)

    def ctx_var(self, layer_idx: int) -> Var:
        layer = self.layers[layer_idx]
        return Var(layer.name, layer.extra_ty)

    def ret_extra(self, layer_idx: int) -> Term:
        layer = self.layers[layer_idx]
        if layer.kind == 'st':
            return self.ctx_var(layer_idx)
        return ListLit((), layer.ty)

    @property
    def main_extras(self) -> Tuple[int, ...]:
        return self.slots[0].extras

    # ---- monad ----

    def ret(self, v: Term) -> SpecExpr:
        shape = self.shape(v.ty)
        p = shape.posts[0]
        return SpecExpr(shape, PApply(p, (v,) + tuple(self.ret_extra(i) for i in self.main_extras)))

    def bind(self, w: SpecExpr, binder: Var, f: SpecExpr) -> SpecExpr:
        raise NotImplementedError

    def _check_bind(self, w: SpecExpr, binder: Var, f: SpecExpr):
        if w.shape.name != self.name or f.shape.name != self.name:
            raise ShapeMismatch(f"bind in {self.name} of {w.shape.name} and {f.shape.name}")
        if binder.ty != w.shape.result_ty:
            raise TypingError(f"bind of {binder.name}", w.shape.result_ty, binder.ty)

    # ---- order ----

    def leq(self, w1: SpecExpr, w2: SpecExpr) -> Formula:
        """w1 ≤ w2: ∀posts ∀ctx. w2 ⇒ w1"""
        if w1.shape != w2.shape:
            raise ShapeMismatch(f"order between {w1.shape.name}/{w1.shape.result_ty} "
                                f"and {w2.shape.name}/{w2.shape.result_ty}")
        shape = w1.shape
        return forall_preds(shape.posts, forall(shape.ctx, Implies(w2.body, w1.body)))

    def equiv(self, w1: SpecExpr, w2: SpecExpr) -> Formula:
        return Conj((self.leq(w1, w2), self.leq(w2, w1)))

    def join(self, nested: NestedSpec) -> SpecExpr:
        return self.bind(nested.outer, nested.binder, nested.inner)

    def top(self, result_ty: Ty) -> SpecExpr:
        return SpecExpr(self.shape(result_ty), TOP)

    def describe(self) -> str:
        return f"{self.name}[{', '.join(l.kind for l in self.layers) or 'pure'}]"


def _cont_params(monad: SpecMonad, slot: Slot, binder: Var) -> Tuple[Var, ...]:
    extras = tuple(Var(fresh_name('s' if monad.layers[i].kind == 'st' else 'l'),
                       monad.layers[i].extra_ty) for i in slot.extras)
    return (binder,) + extras


class LayeredSpecMonad(SpecMonad):
    """Generic transformed monad: ret and bind derived from the layer stack"""

    def __init__(self, layers: Sequence[Layer], name: Optional[str] = None):
        self.name = name or 'W[' + ','.join(l.kind for l in layers) + ']'
        super().__init__(layers)

    def bind(self, w: SpecExpr, binder: Var, f: SpecExpr) -> SpecExpr:
        self._check_bind(w, binder, f)
        main = self.slots[0]
        params = _cont_params(self, main, binder)
        extra_of = dict(zip(main.extras, params[1:]))
        ctx_map: Dict[str, Term] = {}
        for idx, ev in extra_of.items():
            layer = self.layers[idx]
            if layer.kind == 'st':
                ctx_map[layer.name] = ev
            elif layer.history:
                ctx_map[layer.name] = Append(self.ctx_var(idx), ev)
        body = subst_terms(f.body, ctx_map)
        wraps = {}
        for slot, post in zip(self.slots, f.shape.posts):
            logs = [(pos, idx) for pos, idx in enumerate(slot.extras)
                    if self.layers[idx].kind == 'upd' and idx in extra_of]
            if not logs:
                continue
            args = tuple(Var(fresh_name('r'), ty) for ty in post.arg_tys)
            new_args = list(args)
            for pos, idx in logs:
                new_args[pos + 1] = Append(extra_of[idx], args[pos + 1])
            wraps[post.name] = PredLam(args, PApply(post, tuple(new_args)))
        body = psubst(body, wraps)
        cont = PredLam(params, body)
        return SpecExpr(f.shape, psubst(w.body, {main.name: cont}))


# ---- direct descriptors ----

class WPure(SpecMonad):
    """W^Pure A = (A → prop) → prop"""
    name = 'WPure'

    def __init__(self):
        super().__init__(())

    def bind(self, w, binder, f):
        self._check_bind(w, binder, f)
        return SpecExpr(f.shape, psubst(w.body, {'p': PredLam((binder,), f.body)}))


class WSt(SpecMonad):
    """W^St A = (A × S → prop) → S → prop"""
    name = 'WSt'

    def __init__(self, state_ty: Ty = INT, ctx_name: str = 's0'):
        self.state_ty = state_ty
        super().__init__((StT(state_ty, ctx_name),))

    def bind(self, w, binder, f):
        self._check_bind(w, binder, f)
        s0 = self.ctx_var(0)
        s1 = Var(fresh_name('s'), self.state_ty)
        cont = PredLam((binder, s1), subst_terms(f.body, {s0.name: s1}))
        return SpecExpr(f.shape, psubst(w.body, {'p': cont}))


class WExc(SpecMonad):
    """W^Exc A = (A → prop) → (E → prop) → prop"""
    name = 'WExc'

    def __init__(self, exn_ty: Ty):
        self.exn_ty = exn_ty
        super().__init__((ExcT(exn_ty),))

    def bind(self, w, binder, f):
        self._check_bind(w, binder, f)
        return SpecExpr(f.shape, psubst(w.body, {'p': PredLam((binder,), f.body)}))


class WML(SpecMonad):
    """((A + E) × S → prop) → S → prop, split into a normal and an exceptional post"""
    name = 'WML'

    def __init__(self, state_ty: Ty, exn_ty: Ty):
        self.state_ty = state_ty
        self.exn_ty = exn_ty
        super().__init__((StT(state_ty), ExcT(exn_ty)))

    def bind(self, w, binder, f):
        self._check_bind(w, binder, f)
        s1 = Var(fresh_name('s'), self.state_ty)
        cont = PredLam((binder, s1), subst_terms(f.body, {'s0': s1}))
        return SpecExpr(f.shape, psubst(w.body, {'p': cont}))


class WHist(SpecMonad):
    """
    W^Hist A = (A × list ℰ → prop) → list ℰ → prop

    bind w f = λp h. w (λ⟨x, ℓ'⟩. f x (λ⟨y, ℓ''⟩. p⟨y, ℓ' ++ ℓ''⟩) (h ++ ℓ')) h
    """
    name = 'WHist'

    def __init__(self, elem_ty: Ty = None):
        self.elem_ty = elem_ty or event_type()
        super().__init__((UpdateT(self.elem_ty, history=True),))

    def bind(self, w, binder, f):
        self._check_bind(w, binder, f)
        log_ty = ListTy(self.elem_ty)
        l1 = Var(fresh_name('l'), log_ty)
        l2 = Var(fresh_name('l'), log_ty)
        y = Var(fresh_name('y'), f.shape.result_ty)
        p = f.shape.posts[0]
        body = subst_terms(f.body, {'h': Append(Var('h', log_ty), l1)})
        body = psubst(body, {'p': PredLam((y, l2), PApply(p, (y, Append(l1, l2))))})
        return SpecExpr(f.shape, psubst(w.body, {'p': PredLam((binder, l1), body)}))


class WFr(SpecMonad):
    """W^Fr: W^Hist with the history taken to be unit"""
    name = 'WFr'

    def __init__(self, elem_ty: Ty = None):
        self.elem_ty = elem_ty or event_type()
        super().__init__((UpdateT(self.elem_ty, history=False),))

    def bind(self, w, binder, f):
        self._check_bind(w, binder, f)
        log_ty = ListTy(self.elem_ty)
        l1 = Var(fresh_name('l'), log_ty)
        l2 = Var(fresh_name('l'), log_ty)
        y = Var(fresh_name('y'), f.shape.result_ty)
        p = f.shape.posts[0]
        body = psubst(f.body, {'p': PredLam((y, l2), PApply(p, (y, Append(l1, l2))))})
        return SpecExpr(f.shape, psubst(w.body, {'p': PredLam((binder, l1), body)}))


class WHistSt(SpecMonad):
    """W^HistST: the history is state; bind hands the produced history to the continuation"""
    name = 'WHistSt'

    def __init__(self, elem_ty: Ty = None):
        self.elem_ty = elem_ty or event_type()
        super().__init__((StT(ListTy(self.elem_ty), 'h'),))

    def bind(self, w, binder, f):
        self._check_bind(w, binder, f)
        log = Var(fresh_name('l'), ListTy(self.elem_ty))
        cont = PredLam((binder, log), subst_terms(f.body, {'h': log}))
        return SpecExpr(f.shape, psubst(w.body, {'p': cont}))


class WIOSt(SpecMonad):
    """W^IOSt A = (A × S × list ℰ → prop) → S → list ℰ → prop"""
    name = 'WIOSt'

    def __init__(self, state_ty: Ty = INT, elem_ty: Ty = None):
        self.state_ty = state_ty
        self.elem_ty = elem_ty or event_type()
        super().__init__((UpdateT(self.elem_ty, history=True), StT(state_ty, 's')))

    def bind(self, w, binder, f):
        self._check_bind(w, binder, f)
        log_ty = ListTy(self.elem_ty)
        s1 = Var(fresh_name('s'), self.state_ty)
        l1 = Var(fresh_name('l'), log_ty)
        s2 = Var(fresh_name('s'), self.state_ty)
        l2 = Var(fresh_name('l'), log_ty)
        y = Var(fresh_name('y'), f.shape.result_ty)
        p = f.shape.posts[0]
        body = subst_terms(f.body, {'s': s1, 'h': Append(Var('h', log_ty), l1)})
        body = psubst(body, {'p': PredLam((y, s2, l2), PApply(p, (y, s2, Append(l1, l2))))})
        return SpecExpr(f.shape, psubst(w.body, {'p': PredLam((binder, s1, l1), body)}))


def wpure() -> WPure:
    return WPure()


def wst(state_ty: Ty = INT) -> WSt:
    return WSt(state_ty)


def wexc(exn_ty: Ty) -> WExc:
    return WExc(exn_ty)


def wml(state_ty: Ty, exn_ty: Ty) -> WML:
    return WML(state_ty, exn_ty)


def wfr(elem_ty: Ty = None) -> WFr:
    return WFr(elem_ty)


def whist(elem_ty: Ty = None) -> WHist:
    return WHist(elem_ty)


def whistst(elem_ty: Ty = None) -> WHistSt:
    return WHistSt(elem_ty)


def wiost(state_ty: Ty = INT, elem_ty: Ty = None) -> WIOSt:
    return WIOSt(state_ty, elem_ty)


def apply_transformer(layer: Layer, base: SpecMonad) -> LayeredSpecMonad:
    """
    The monad obtained by applying a transformer layer to a predicate-transformer base

    Raises:
        ShapeMismatch: base is not a predicate-transformer monad, or binder names clash
    """
    if not isinstance(base, SpecMonad):
        raise ShapeMismatch(f"{getattr(base, 'name', base)} does not admit transformer layers")
    return LayeredSpecMonad(base.layers + (layer,))


# =============================================================================
# Pred, PrePost, MonSP
# =============================================================================

class PredMonad:
    """Pred A = A → prop; a spec is a formula over its result binder y"""
    name = 'Pred'

    def shape(self, result_ty: Ty) -> SpecShape:
        return SpecShape(self.name, result_ty, (Var('y', result_ty),), ())

    def ret(self, v: Term) -> SpecExpr:
        shape = self.shape(v.ty)
        return SpecExpr(shape, Eq(shape.ctx[0], v))

    def bind(self, w: SpecExpr, binder: Var, f: SpecExpr) -> SpecExpr:
        a = Var(fresh_name(binder.name), binder.ty)
        left = subst_terms(w.body, {'y': a})
        right = subst_terms(f.body, {binder.name: a})
        return SpecExpr(f.shape, Exists(a, Conj((left, right))))

    def leq(self, w1: SpecExpr, w2: SpecExpr) -> Formula:
        if w1.shape != w2.shape:
            raise ShapeMismatch("Pred order between different result types")
        return forall(w1.shape.ctx, Implies(w1.body, w2.body))


@dataclass(frozen=True)
class PrePostPair:
    """
    (pre, post) with post over the result binder

    Attributes:
        pre: Precondition (no result binder)
        post: λa. post over the result
    """
    pre: Formula
    post: PredLam

    @property
    def result_ty(self) -> Ty:
        return self.post.params[0].ty

    def post_at(self, t: Term) -> Formula:
        return beta(self.post, (t,))

    def pretty(self) -> str:
        return f"⟨{format_lambda((), self.pre)}, {format_lambda(self.post.params, self.post.body)}⟩"


class PrePostMonad:
    """PrePost A = prop × (A → prop)"""
    name = 'PrePost'

    def ret(self, v: Term) -> PrePostPair:
        a = Var(fresh_name('a'), v.ty)
        return PrePostPair(TOP, PredLam((a,), Eq(a, v)))

    def bind(self, m: PrePostPair, binder: Var, f: PrePostPair) -> PrePostPair:
        a = Var(fresh_name(binder.name), binder.ty)
        pre = Conj((m.pre, Forall(a, Implies(m.post_at(a), subst_terms(f.pre, {binder.name: a})))))
        b = Var(fresh_name('b'), f.result_ty)
        inner = subst_terms(f.post_at(b), {binder.name: a})
        return PrePostPair(pre, PredLam((b,), Exists(a, Conj((m.post_at(a), inner)))))

    def leq(self, x: PrePostPair, y: PrePostPair) -> Formula:
        """Backward on pre, forward on post"""
        a = Var(fresh_name('a'), x.result_ty)
        return Conj((Implies(y.pre, x.pre), Forall(a, Implies(x.post_at(a), y.post_at(a)))))


class MonSPMonad:
    """
    MonSP A = (pre : prop) → A → prop, with pre a nullary predicate binder

    The refinement "body implies pre" is checked separately by monsp_side_condition.
    """
    name = 'MonSP'

    def shape(self, result_ty: Ty) -> SpecShape:
        return SpecShape(self.name, result_ty, (Var('y', result_ty),), (PredVar('pre', ()),))

    def ret(self, v: Term) -> SpecExpr:
        shape = self.shape(v.ty)
        return SpecExpr(shape, Conj((PApply(shape.posts[0], ()), Eq(shape.ctx[0], v))))

    def bind(self, m: SpecExpr, binder: Var, f: SpecExpr) -> SpecExpr:
        a = Var(fresh_name(binder.name), binder.ty)
        produced = PredLam((), subst_terms(m.body, {'y': a}))
        body = psubst(subst_terms(f.body, {binder.name: a}), {'pre': produced})
        return SpecExpr(f.shape, Exists(a, body))

    def leq(self, w1: SpecExpr, w2: SpecExpr) -> Formula:
        if w1.shape != w2.shape:
            raise ShapeMismatch("MonSP order between different result types")
        return forall_preds(w1.shape.posts, forall(w1.shape.ctx, Implies(w1.body, w2.body)))


def pred() -> PredMonad:
    return PredMonad()


def prepost() -> PrePostMonad:
    return PrePostMonad()


def monsp() -> MonSPMonad:
    return MonSPMonad()


def monsp_side_condition(w: SpecExpr) -> Formula:
    """∀pre y. body ⇒ pre"""
    pre = w.shape.posts[0]
    return ForallPred(pre, forall(w.shape.ctx, Implies(w.body, PApply(pre, ()))))


# =============================================================================
# Galois connections
# =============================================================================

def galois_prepost_to_wpure(pp: PrePostPair) -> SpecExpr:
    """λp. pre ∧ ∀a. post a ⇒ p a"""
    shape = WPure().shape(pp.result_ty)
    a = Var(fresh_name('a'), pp.result_ty)
    return SpecExpr(shape, Conj((pp.pre, Forall(a, Implies(pp.post_at(a), PApply(shape.posts[0], (a,)))))))


def wpure_to_prepost(w: SpecExpr) -> PrePostPair:
    """(w ⊤, λa. ∀p. w p ⇒ p a)"""
    p = w.shape.posts[0]
    a = Var(fresh_name('a'), w.shape.result_ty)
    top = PredLam((Var(fresh_name('x'), w.shape.result_ty),), TOP)
    pre = w.instantiate((top,))
    post = ForallPred(p, Implies(w.body, PApply(p, (a,))))
    return PrePostPair(pre, PredLam((a,), post))


def galois_pred_to_prepost(w: SpecExpr) -> PrePostPair:
    """Coerce p to (⊤, p)"""
    y = w.shape.ctx[0]
    return PrePostPair(TOP, PredLam((y,), w.body))


def galois_prepost_to_pred(pp: PrePostPair) -> SpecExpr:
    """Approximate (pre, post) by post"""
    shape = PredMonad().shape(pp.result_ty)
    return SpecExpr(shape, pp.post_at(shape.ctx[0]))


# =============================================================================
# Pre/post recognition
# =============================================================================

@dataclass
class PrePostView:
    """
    A transformer recognized as λposts ctx. pre ∧ ⋀_j ∀r. post_j r ⇒ p_j r

    Attributes:
        pre: Formula over the context binders
        posts: post binder name -> strongest postcondition it is applied with
    """
    pre: Formula
    posts: Dict[str, PredLam]


class _NotPrePost(Exception):
    pass


def prepost_view(w: SpecExpr) -> Optional[PrePostView]:
    """
    Recognize a pre/post-embedded transformer

    Returns:
        The view, or None when some post binder occurs outside the
        ∀ys. hyps ⇒ p(args) pattern
    """
    names = set(w.shape.post_names)
    pre_parts: List[Formula] = []
    clauses: Dict[str, List[Formula]] = {p.name: [] for p in w.shape.posts}
    params = {p.name: tuple(Var(fresh_name('r'), ty) for ty in p.arg_tys) for p in w.shape.posts}
    try:
        for ys, hyps, concl in _clauses(normalize(w.body), (), ()):
            if isinstance(concl, PApply) and concl.pred.name in names:
                clauses[concl.pred.name].append(
                    _clause_post(ys, hyps, concl.args, params[concl.pred.name]))
            else:
                pre_parts.append(forall(ys, implies_all(hyps, concl)))
    except _NotPrePost:
        return None
    posts = {name: PredLam(params[name], disj(*clauses[name]))
             for name in clauses}
    return PrePostView(conj(*pre_parts), posts)


def implies_all(hyps: Sequence[Formula], concl: Formula) -> Formula:
    return Implies(conj(*hyps), concl) if hyps else concl


def _clauses(f: Formula, ys: Tuple[Var, ...], hyps: Tuple[Formula, ...]):
    """Split f into clauses ∀ys. hyps ⇒ concl, each concl a post application or post-free"""
    if not f.preds:
        yield ys, hyps, f
        return
    if isinstance(f, Conj):
        for item in f.items:
            yield from _clauses(item, ys, hyps)
        return
    if isinstance(f, Forall):
        var = Var(fresh_name(f.var.name), f.var.vty)
        body = subst_terms(f.body, {f.var.name: var})
        yield from _clauses(body, ys + (var,), hyps)
        return
    if isinstance(f, Implies):
        if f.lhs.preds:
            raise _NotPrePost()
        yield from _clauses(f.rhs, ys, hyps + (f.lhs,))
        return
    if isinstance(f, PApply):
        yield ys, hyps, f
        return
    raise _NotPrePost()


def _clause_post(ys: Tuple[Var, ...], hyps: Tuple[Formula, ...], args: Sequence[Term],
                 params: Sequence[Var]) -> Formula:
    bound: Dict[str, Term] = {}
    pending: List[Tuple[Term, Term]] = []
    names = {y.name for y in ys}

    def match(pattern: Term, actual: Term):
        if isinstance(pattern, Var) and pattern.name in names and pattern.name not in bound:
            bound[pattern.name] = actual
        elif isinstance(pattern, Pair):
            match(pattern.fst, Proj(1, actual))
            match(pattern.snd, Proj(2, actual))
        elif isinstance(pattern.ty, UnitTy):
            return
        else:
            pending.append((actual, pattern))

    for pattern, param in zip(args, params):
        match(pattern, param)
    eqs = [Eq(actual, subst_terms(pattern, bound)) for actual, pattern in pending]
    body = conj(*(subst_terms(h, bound) for h in hyps), *eqs)
    leftover = [y for y in ys if y.name not in bound]
    return normalize(exists(leftover, body))


if __name__ == "__main__":
    from core.logic import Apply, FunSym
    from core.logic import UNIT_LIT
    W = wst(INT)
    x = Var('x', INT)
    get_spec = SpecExpr(W.shape(INT), PApply(W.shape(INT).posts[0], (Var('s0', INT), Var('s0', INT))))
    f = FunSym('f', INT, INT)
    put_spec = SpecExpr(W.shape(UNIT), PApply(W.shape(UNIT).posts[0], (UNIT_LIT, Apply(f, x))))
    print(W.bind(get_spec, x, put_spec).normalized().pretty())
