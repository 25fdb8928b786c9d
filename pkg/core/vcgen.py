#!/usr/bin/env python3
"""
VC Generation - Weakest preconditions and root verification conditions

wp folds an observation over a computation tree, recording division
guards as side conditions. root_vc assembles θ(m) ≤ w, instantiating the
post binders when the declared specification is pre/post shaped and
falling back to predicate quantification otherwise.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

# Handle imports
try:
    from core.effects import Call, Comp, Ite, LetPure, Ret
    from core.errors import ShapeMismatch, TypingError
    from core.logic import (
        Apply, Arith, Atom, Cmp, Formula, ForallFun, FunSym, Implies, ListLit, Neg, Top,
        Term, Var, collect_nodes, conj, forall, forall_preds, int_lit, normalize, subst_terms,
    )
    from core.observations import Observation
    from core.specmonads import SpecExpr, SpecMonad, prepost_view
    from utils.config import Config
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core.effects import Call, Comp, Ite, LetPure, Ret
    from core.errors import ShapeMismatch, TypingError
    from core.logic import (
        Apply, Arith, Atom, Cmp, Formula, ForallFun, FunSym, Implies, ListLit, Neg, Top,
        Term, Var, collect_nodes, conj, forall, forall_preds, int_lit, normalize, subst_terms,
    )
    from core.observations import Observation
    from core.specmonads import SpecExpr, SpecMonad, prepost_view
    from utils.config import Config

logger = logging.getLogger(__name__)

HISTORY_MODES = ('universal', 'empty')


@dataclass
class WpResult:
    """
    Inferred specification of a computation

    Attributes:
        spec: θ(m), normalized
        side_conditions: Divisor guards, each under its path condition and binders
    """
    spec: SpecExpr
    side_conditions: List[Formula] = field(default_factory=list)


def _division_guards(t: Term) -> List[Formula]:
    divisions = collect_nodes(t, lambda n: isinstance(n, Arith) and n.op in ('div', 'mod'))
    return [Neg(Atom(Cmp('=', d.right, int_lit(0)))) for d in divisions]


def wp(m: Comp, obs: Observation) -> WpResult:
    """
    θ(m) by structural recursion, normalized

    Raises:
        UnhandledOp: m uses an operation obs does not interpret
        TypingError: Ill-typed node
    """
    sides: List[Formula] = []

    def guard(t: Term, binders: Tuple[Var, ...], path: Tuple[Formula, ...]):
        for g in _division_guards(t):
            body = Implies(conj(*path), g) if path else g
            sides.append(forall(binders, body))

    def go(node: Comp, binders: Tuple[Var, ...], path: Tuple[Formula, ...]) -> SpecExpr:
        if isinstance(node, Ret):
            guard(node.value, binders, path)
            return obs.ret(node.value)
        if isinstance(node, Call):
            guard(node.arg, binders, path)
            k = go(node.cont, binders + (node.binder,), path)
            return obs.call(node.op, node.arg, node.binder, k)
        if isinstance(node, Ite):
            guard(node.cond, binders, path)
            c = Atom(node.cond)
            w1 = go(node.then, binders, path + (c,))
            w2 = go(node.orelse, binders, path + (Neg(c),))
            return obs.ite(node.cond, w1, w2)
        if isinstance(node, LetPure):
            guard(node.value, binders, path)
            bound = Atom(Cmp('=', node.var, node.value))
            body = go(node.body, binders + (node.var,), path + (bound,))
            return body.subst({node.var.name: node.value})
        raise TypingError("computation", "a computation node", type(node).__name__)

    spec = go(m, (), ()).normalized()
    sides = [s for s in (normalize(s) for s in sides) if not _is_top(s)]
    logger.debug(f"wp over {obs.name}: {spec.body.size} nodes, {len(sides)} side conditions")
    return WpResult(spec, sides)


def _is_top(f: Formula) -> bool:
    return isinstance(f, Top)


# =============================================================================
# Root verification conditions
# =============================================================================

def history_context(target: SpecMonad, shape_ctx: Sequence[Var], mode: str) -> Dict[str, Term]:
    """Context instantiation for the history binders under the chosen mode"""
    if mode not in HISTORY_MODES:
        raise ValueError(f"unknown history mode {mode}")
    if mode == 'universal':
        return {}
    mapping: Dict[str, Term] = {}
    for layer in target.layers:
        if layer.kind == 'upd' and layer.history:
            mapping[layer.name] = ListLit((), layer.ty)
    return {k: v for k, v in mapping.items() if k in {c.name for c in shape_ctx}}


def vc_leq(target: SpecMonad, inferred: SpecExpr, declared: SpecExpr,
           route: str = 'auto', history: str = Config.HISTORY_MODE) -> Formula:
    """
    inferred ≤ declared as a formula with the spec binders closed

    Args:
        route: 'first-order' (post instantiation), 'second-order'
            (quantify the post binders) or 'auto' (first-order when the
            declared spec is pre/post shaped)
        history: 'universal' or 'empty' treatment of history binders

    Raises:
        ShapeMismatch: Different shapes, or a forced first-order route on
            a declared spec that is not pre/post shaped
    """
    if inferred.shape != declared.shape:
        raise ShapeMismatch(f"inferred {inferred.shape.name}/{inferred.shape.result_ty} "
                            f"against declared {declared.shape.name}/{declared.shape.result_ty}")
    shape = declared.shape
    fixed = history_context(target, shape.ctx, history)
    ctx = tuple(v for v in shape.ctx if v.name not in fixed)
    lhs = subst_terms(inferred.body, fixed)
    rhs = subst_terms(declared.body, fixed)

    view = None
    if route != 'second-order':
        view = prepost_view(SpecExpr(shape, rhs))
        if view is None and route == 'first-order':
            raise ShapeMismatch("declared specification is not pre/post shaped")
    if view is not None:
        inst = SpecExpr(shape, lhs).instantiate(tuple(view.posts[name] for name in shape.post_names))
        return forall(ctx, Implies(view.pre, inst))
    return forall_preds(shape.posts, forall(ctx, Implies(rhs, lhs)))


def close_formula(f: Formula, bound_funs: Sequence[str] = ()) -> Formula:
    """Universally close f over its free term variables and free function symbols"""
    free = f.fv
    seen: Dict[str, Var] = {}
    for node in collect_nodes(f, lambda n: isinstance(n, Var) and n.name in free):
        seen.setdefault(node.name, node)
    body = forall(sorted(seen.values(), key=lambda v: v.name), f)
    funs: Dict[str, FunSym] = {}
    for node in collect_nodes(f, lambda n: isinstance(n, Apply) and n.fn.name in f.funs):
        if node.fn.name not in bound_funs:
            funs.setdefault(node.fn.name, node.fn)
    for name in sorted(funs, reverse=True):
        body = ForallFun(funs[name], body)
    return body


def root_vc(d, route: str = 'auto', history: str = Config.HISTORY_MODE,
            defined: Sequence[str] = ()) -> Formula:
    """
    θ(comp) ≤ declared for a Dijkstra computation, closed and normalized

    Args:
        d: DComp
        route: See vc_leq
        history: See vc_leq
        defined: Interpreted function names left free (their definitions travel
            with the obligation)
    """
    inferred = wp(d.comp, d.obs).spec
    formula = vc_leq(d.obs.target, inferred, d.declared, route, history)
    return normalize(close_formula(formula, defined))


if __name__ == "__main__":
    from core.logic import INT, UNIT, UNIT_LIT
    from core.observations import theta_st
    Config.setup_logging()
    f = FunSym('f', INT, INT)
    x = Var('x', INT)
    stmod = Call('get', UNIT_LIT, x, Call('put', Apply(f, x), Var('u', UNIT), Ret(UNIT_LIT)))
    print(wp(stmod, theta_st()).spec.pretty())
