#!/usr/bin/env python3
"""
Pretty Printer - Lambda notation for terms, formulas and specifications

Output is stable: generated names (x#17) are displayed by their base name,
primed when needed to stay unambiguous, so two runs print identically.
"""

from typing import Dict, Iterable, Optional, Sequence, Set, Union

# Handle imports
try:
    from core.logic import (
        Append, Apply, Arith, Atom, BoolOp, Bot, CaseSum, Cmp, Conj, Cons, Ctor, CtorVal, Disj,
        Elem, Eq, Exists, Forall, ForallFun, ForallPred, Formula, Implies, Inj, IteT, ListLit,
        ListOp, Lit, Neg, NotT, PApply, Pair, PairTy, PRedex, PredVar, Proj, SumVal, Term, Top,
        Ty, Var, base_name, collect_nodes, ListTy, SumTy,
    )
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core.logic import (
        Append, Apply, Arith, Atom, BoolOp, Bot, CaseSum, Cmp, Conj, Cons, Ctor, CtorVal, Disj,
        Elem, Eq, Exists, Forall, ForallFun, ForallPred, Formula, Implies, Inj, IteT, ListLit,
        ListOp, Lit, Neg, NotT, PApply, Pair, PairTy, PRedex, PredVar, Proj, SumVal, Term, Top,
        Ty, Var, base_name, collect_nodes, ListTy, SumTy,
    )


ARITH_SYMBOLS = {'+': '+', '-': '-', '*': '*', 'div': '/', 'mod': '%'}
CMP_SYMBOLS = {'=': '=', '<>': '≠', '<': '<', '<=': '≤'}

# Binding strength, higher binds tighter
_T_IF, _T_OR, _T_AND, _T_NOT, _T_CMP, _T_LIST, _T_ADD, _T_MUL, _T_APP, _T_ATOM = range(10)
_F_QUANT, _F_IMP, _F_OR, _F_AND, _F_NOT, _F_ATOM = range(6)

Binder = Union[Var, PredVar]


class Printer:
    """
    Stateful renderer: one instance per printed object

    Args:
        reserved: Names that generated variables must not be displayed as
    """

    def __init__(self, reserved: Iterable[str] = ()):
        self.used: Set[str] = set(reserved)
        self.scope: Dict[str, str] = {}

    @classmethod
    def for_nodes(cls, *nodes) -> 'Printer':
        names: Set[str] = set()
        for node in nodes:
            if node is None:
                continue
            for found in collect_nodes(node, lambda n: isinstance(n, (Var, Forall, Exists, PApply))):
                if isinstance(found, Var):
                    candidate = found.name
                elif isinstance(found, PApply):
                    candidate = found.pred.name
                else:
                    candidate = found.var.name
                if '#' not in candidate:
                    names.add(candidate)
        return cls(names)

    # ---- names ----

    def _pick(self, name: str) -> str:
        base = base_name(name)
        display = base
        while display in self.used:
            display += "'"
        self.used.add(display)
        return display

    def name(self, name: str) -> str:
        if name not in self.scope:
            self.scope[name] = name if '#' not in name else self._pick(name)
            self.used.add(self.scope[name])
        return self.scope[name]

    def bind(self, name: str) -> str:
        """Introduce a binder; returns its display name"""
        if '#' not in name and name not in self.scope.values():
            self.scope[name] = name
            self.used.add(name)
            return name
        display = self._pick(name)
        self.scope[name] = display
        return display

    def _scoped(self, thunk):
        saved = dict(self.scope)
        try:
            return thunk()
        finally:
            self.scope = saved

    # ---- terms ----

    def term(self, t: Term, ctx: int = _T_IF) -> str:
        text, level = self._term(t)
        return f"({text})" if level < ctx else text

    def _term(self, t: Term):
        if isinstance(t, Var):
            return self.name(t.name), _T_ATOM
        if isinstance(t, Lit):
            if t.value is None:
                return '*', _T_ATOM
            if isinstance(t.value, bool):
                return ('true' if t.value else 'false'), _T_ATOM
            return str(t.value), (_T_ATOM if t.value >= 0 else _T_ADD)
        if isinstance(t, Pair):
            return self.tuple_text(t), _T_ATOM
        if isinstance(t, Proj):
            return f"π{t.index} {self.term(t.arg, _T_ATOM)}", _T_APP
        if isinstance(t, Inj):
            return f"in{t.side} {self.term(t.arg, _T_ATOM)}", _T_APP
        if isinstance(t, CaseSum):
            scrut = self.term(t.scrut)

            def branch(var, body):
                return self._scoped(lambda: f"{self.bind(var.name)} -> {self.term(body)}")

            return (f"case {scrut} of inl {branch(t.lvar, t.lbody)} | inr {branch(t.rvar, t.rbody)}",
                    _T_IF)
        if isinstance(t, ListLit):
            return "[" + "; ".join(self.term(i) for i in t.items) + "]", _T_ATOM
        if isinstance(t, Cons):
            return f"{self.term(t.head, _T_LIST + 1)} :: {self.term(t.tail, _T_LIST)}", _T_LIST
        if isinstance(t, Append):
            return f"{self.term(t.left, _T_LIST + 1)} ++ {self.term(t.right, _T_LIST)}", _T_LIST
        if isinstance(t, ListOp):
            return f"{t.op} {self.term(t.arg, _T_ATOM)}", _T_APP
        if isinstance(t, Elem):
            return f"{self.term(t.item, _T_LIST + 1)} ∈ {self.term(t.lst, _T_LIST + 1)}", _T_CMP
        if isinstance(t, Ctor):
            if not t.args:
                return t.name, _T_ATOM
            args = " ".join(self.term(a, _T_ATOM) for a in t.args)
            return f"{t.name} {args}", _T_APP
        if isinstance(t, Arith):
            level = _T_ADD if t.op in ('+', '-') else _T_MUL
            return (f"{self.term(t.left, level)} {ARITH_SYMBOLS[t.op]} {self.term(t.right, level + 1)}",
                    level)
        if isinstance(t, Cmp):
            return (f"{self.term(t.left, _T_CMP + 1)} {CMP_SYMBOLS[t.op]} "
                    f"{self.term(t.right, _T_CMP + 1)}", _T_CMP)
        if isinstance(t, BoolOp):
            level, symbol = (_T_AND, '&&') if t.op == 'and' else (_T_OR, '||')
            return f"{self.term(t.left, level + 1)} {symbol} {self.term(t.right, level)}", level
        if isinstance(t, NotT):
            return f"not {self.term(t.arg, _T_NOT)}", _T_NOT
        if isinstance(t, IteT):
            return (f"if {self.term(t.cond)} then {self.term(t.then)} else {self.term(t.orelse)}",
                    _T_IF)
        if isinstance(t, Apply):
            return f"{self.name(t.fn.name)} {self.term(t.arg, _T_ATOM)}", _T_APP
        return repr(t), _T_ATOM

    def tuple_text(self, t: Term) -> str:
        parts = []
        while isinstance(t, Pair):
            parts.append(self.term(t.fst))
            t = t.snd
        parts.append(self.term(t))
        return "⟨" + ", ".join(parts) + "⟩"

    # ---- formulas ----

    def formula(self, f: Formula, ctx: int = _F_QUANT) -> str:
        text, level = self._formula(f)
        return f"({text})" if level < ctx else text

    def _formula(self, f: Formula):
        if isinstance(f, Top):
            return '⊤', _F_ATOM
        if isinstance(f, Bot):
            return '⊥', _F_ATOM
        if isinstance(f, Conj):
            return " ∧ ".join(self.formula(i, _F_AND + 1) for i in f.items), _F_AND
        if isinstance(f, Disj):
            return " ∨ ".join(self.formula(i, _F_OR + 1) for i in f.items), _F_OR
        if isinstance(f, Implies):
            return f"{self.formula(f.lhs, _F_IMP + 1)} ⇒ {self.formula(f.rhs, _F_IMP)}", _F_IMP
        if isinstance(f, Neg):
            return f"¬{self.formula(f.arg, _F_NOT)}", _F_NOT
        if isinstance(f, Atom):
            return self.term(f.term, _T_CMP), _F_ATOM
        if isinstance(f, Eq):
            return f"{self.term(f.left, _T_CMP + 1)} = {self.term(f.right, _T_CMP + 1)}", _F_ATOM
        if isinstance(f, (Forall, Exists)):
            return self._quantifier(f), _F_QUANT
        if isinstance(f, PApply):
            return self.papply(f.pred.name, f.args), _F_ATOM
        if isinstance(f, PRedex):
            def lam():
                params = " ".join(self.bind(p.name) for p in f.lam.params)
                return f"λ{params}. {self.formula(f.lam.body)}"
            args = " ".join(self.term(a, _T_ATOM) for a in f.args)
            return f"({self._scoped(lam)}) {args}", _F_ATOM
        if isinstance(f, ForallPred):
            return self._scoped(lambda: f"∀{self.bind(f.pred.name)}. {self.formula(f.body)}"), _F_QUANT
        if isinstance(f, ForallFun):
            return self._scoped(lambda: f"∀{self.bind(f.fn.name)}. {self.formula(f.body)}"), _F_QUANT
        return repr(f), _F_ATOM

    def _quantifier(self, f) -> str:
        def go():
            kind = type(f)
            symbol = '∀' if kind is Forall else '∃'
            names = []
            node = f
            while type(node) is kind:
                names.append(self.bind(node.var.name))
                node = node.body
            return f"{symbol}{' '.join(names)}. {self.formula(node)}"
        return self._scoped(go)

    def papply(self, name: str, args: Sequence[Term]) -> str:
        head = self.name(name)
        if not args:
            return head
        if len(args) == 1:
            arg = args[0]
            if isinstance(arg, Pair):
                return f"{head}{self.tuple_text(arg)}"
            return f"{head} {self.term(arg, _T_ATOM)}"
        return f"{head}⟨" + ", ".join(self.term(a) for a in args) + "⟩"

    def lam(self, binders: Sequence[Binder], body: Formula) -> str:
        """λ b1 b2. body"""
        def go():
            names = " ".join(self.bind(b.name) for b in binders)
            return f"λ{names}. {self.formula(body)}" if names else self.formula(body)
        return self._scoped(go)


def format_term(t: Term) -> str:
    return Printer.for_nodes(t).term(t)


def format_formula(f: Formula) -> str:
    """Render a formula in lambda notation"""
    return Printer.for_nodes(f).formula(f)


def format_lambda(binders: Sequence[Binder], body: Formula) -> str:
    return Printer.for_nodes(body).lam(binders, body)


def format_value(value, ty: Optional[Ty] = None) -> str:
    """Render a concrete value (as found in counterexamples and runner outcomes)"""
    if value is None:
        return '*'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, SumVal):
        inner = None
        if isinstance(ty, SumTy):
            inner = ty.left if value.side == 'l' else ty.right
        return f"in{value.side} {_wrap(format_value(value.value, inner))}"
    if isinstance(value, CtorVal):
        if not value.args:
            return value.name
        return value.name + " " + " ".join(_wrap(format_value(a)) for a in value.args)
    if isinstance(value, dict):
        items = sorted(value.items(), key=lambda kv: repr(kv[0]))
        return "{" + ", ".join(f"{format_value(k)} ↦ {format_value(v)}" for k, v in items) + "}"
    if isinstance(value, frozenset):
        shown = sorted((format_value(v[0] if len(v) == 1 else v) for v in value))
        return "{" + ", ".join(shown) + "}"
    if isinstance(value, tuple):
        if isinstance(ty, ListTy) or (ty is None and not _looks_like_pair(value)):
            elem = ty.elem if isinstance(ty, ListTy) else None
            return "[" + "; ".join(format_value(v, elem) for v in value) + "]"
        parts = []
        while isinstance(ty, PairTy) and isinstance(value, tuple) and len(value) == 2:
            parts.append(format_value(value[0], ty.fst))
            value, ty = value[1], ty.snd
        if ty is None and isinstance(value, tuple) and len(value) == 2:
            parts.extend(format_value(v) for v in value)
        else:
            parts.append(format_value(value, ty))
        return "⟨" + ", ".join(parts) + "⟩"
    return str(value)


def _looks_like_pair(value: tuple) -> bool:
    return len(value) == 2


def _wrap(text: str) -> str:
    return f"({text})" if ' ' in text and not text.startswith(('⟨', '[', '{')) else text


def format_type(ty: Ty) -> str:
    return str(ty)


if __name__ == "__main__":
    from core.logic import INT, UNIT, UNIT_LIT, FunSym
    s0 = Var('s0', INT)
    p = PredVar('p', (UNIT, INT))
    f = FunSym('f', INT, INT)
    print(format_lambda([p, s0], PApply(p, (UNIT_LIT, Apply(f, s0)))))
