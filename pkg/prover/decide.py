#!/usr/bin/env python3
"""
Finite-Domain Prover - Decide closed formulas by exhaustive enumeration

Quantifiers range over the carriers of a DomainConfig; predicate and
function variables range over their tables under the configured caps.
The answer is deterministic: on failure the counterexample is the first
falsifying assignment in enumeration order, found by descending through
universal quantifiers, conjunctions and implication conclusions.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Union

# Handle imports
try:
    from core.dijkstra import Obligation, ObligationStatus
    from core.errors import CarrierTooLarge
    from core.logic import (
        Conj, Env, Evaluator, Forall, ForallFun, ForallPred, Formula, FunDef, Implies, Neg,
        Exists, base_name, carrier, fun_tables, pred_tables,
    )
    from core.pretty import format_value
    from utils.config import DomainConfig
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core.dijkstra import Obligation, ObligationStatus
    from core.errors import CarrierTooLarge
    from core.logic import (
        Conj, Env, Evaluator, Forall, ForallFun, ForallPred, Formula, FunDef, Implies, Neg,
        Exists, base_name, carrier, fun_tables, pred_tables,
    )
    from core.pretty import format_value
    from utils.config import DomainConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Valid:
    """True under every assignment"""

    def __str__(self):
        return "valid"


@dataclass(frozen=True)
class CounterExample:
    """
    A falsifying assignment

    Attributes:
        assignment: Display name -> printed value, in binding order
    """
    assignment: Dict[str, str] = field(default_factory=dict)

    def __str__(self):
        if not self.assignment:
            return "counterexample (no free choices: the formula is false)"
        return "counterexample: " + ", ".join(f"{k} = {v}" for k, v in self.assignment.items())


@dataclass(frozen=True)
class ResourceExceeded:
    """An enumeration exceeded its cap; nothing is claimed"""
    detail: str = ""

    def __str__(self):
        return f"resource exceeded ({self.detail})"


Outcome = Union[Valid, CounterExample, ResourceExceeded]


class _Witness:
    """Collects the first falsifying bindings of a false formula"""

    def __init__(self, evaluator: Evaluator, dom: DomainConfig):
        self.evaluator = evaluator
        self.dom = dom
        self.found: List[tuple] = []

    def holds(self, f: Formula, env: Env) -> bool:
        return self.evaluator.run(f, env)

    def descend(self, f: Formula, env: Env):
        """f is false under env; record why"""
        if isinstance(f, Forall):
            for value in carrier(f.var.ty, self.dom):
                inner = env.bind(f.var.name, value)
                if not self.holds(f.body, inner):
                    self.found.append((f.var.name, format_value(value, f.var.ty)))
                    return self.descend(f.body, inner)
            return
        if isinstance(f, Neg) and isinstance(f.arg, Exists):
            var = f.arg.var
            for value in carrier(var.ty, self.dom):
                if self.holds(f.arg.body, env.bind(var.name, value)):
                    self.found.append((var.name, format_value(value, var.ty)))
                    return
            return
        if isinstance(f, ForallPred):
            for table in pred_tables(f.pred, self.dom):
                inner = Env(env.vars, {**env.preds, f.pred.name: table}, env.funs)
                if not self.holds(f.body, inner):
                    shown = "{" + ", ".join(format_value(pt[0] if len(pt) == 1 else pt)
                                            for pt in sorted(table, key=repr)) + "}"
                    self.found.append((f.pred.name, shown))
                    return self.descend(f.body, inner)
            return
        if isinstance(f, ForallFun):
            for table in fun_tables(f.fn, self.dom):
                inner = Env(env.vars, env.preds, {**env.funs, f.fn.name: table})
                if not self.holds(f.body, inner):
                    shown = "{" + ", ".join(f"{format_value(k, f.fn.dom)} ↦ {format_value(v, f.fn.cod)}"
                                            for k, v in table.items()) + "}"
                    self.found.append((f.fn.name, shown))
                    return self.descend(f.body, inner)
            return
        if isinstance(f, Conj):
            for item in f.items:
                if not self.holds(item, env):
                    return self.descend(item, env)
            return
        if isinstance(f, Implies):
            return self.descend(f.rhs, env)

    def assignment(self) -> Dict[str, str]:
        shown: Dict[str, str] = {}
        for name, value in self.found:
            display = base_name(name)
            while display in shown:
                display += "'"
            shown[display] = value
        return shown


def decide(f: Formula, dom: Optional[DomainConfig] = None,
           definitions: Optional[Mapping[str, FunDef]] = None) -> Outcome:
    """
    Decide a closed formula over finite carriers

    Args:
        f: Closed formula
        dom: Carriers and caps (Config defaults when absent)
        definitions: Interpreted logic functions

    Returns:
        Valid, CounterExample or ResourceExceeded; never raises on caps
    """
    dom = dom or DomainConfig.from_config()
    evaluator = Evaluator(dom, definitions)
    try:
        if evaluator.run(f, Env()):
            return Valid()
        witness = _Witness(evaluator, dom)
        witness.descend(f, Env())
        return CounterExample(witness.assignment())
    except CarrierTooLarge as e:
        logger.info(f"Enumeration cap hit: {e}")
        return ResourceExceeded(str(e))
    except RecursionError:
        return ResourceExceeded("formula nesting exceeds the interpreter stack")


def discharge(ob: Obligation, dom: Optional[DomainConfig] = None) -> Obligation:
    """Decide an obligation and record its status"""
    start = time.perf_counter()
    outcome = decide(ob.formula, dom, ob.definitions)
    elapsed = time.perf_counter() - start
    logger.debug(f"{ob.name}: {outcome} in {elapsed:.3f}s")
    if isinstance(outcome, Valid):
        return ob.with_status(ObligationStatus.VALID)
    if isinstance(outcome, CounterExample):
        return ob.with_status(ObligationStatus.COUNTEREXAMPLE, outcome.assignment)
    return ob.with_status(ObligationStatus.RESOURCE_EXCEEDED, detail=outcome.detail)


if __name__ == "__main__":
    from core.logic import INT, Atom, Cmp, Var, int_lit
    x = Var('x', INT)
    dom = DomainConfig(int_lo=0, int_hi=3)
    print(decide(Forall(x, Atom(Cmp('<=', int_lit(0), x))), dom))
    print(decide(Forall(x, Atom(Cmp('<', x, int_lit(2)))), dom))
