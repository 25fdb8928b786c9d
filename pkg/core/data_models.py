#!/usr/bin/env python3
"""
Data Models for the Verifier
Dataclasses for per-definition results and whole-file verification reports
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

# Handle imports
try:
    from core.dijkstra import Obligation, ObligationStatus
    from utils.config import Config
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core.dijkstra import Obligation, ObligationStatus
    from utils.config import Config


STATUS_MARKERS = {
    ObligationStatus.VALID: '✓',
    ObligationStatus.COUNTEREXAMPLE: '❌',
    ObligationStatus.RESOURCE_EXCEEDED: '⚠️',
    ObligationStatus.PENDING: '…',
}


@dataclass
class DefinitionReport:
    """
    Verification outcome of one top-level definition

    Attributes:
        name: Definition name
        label: Observation label the definition is typed with
        observation: Registry key the label resolved to
        result_type: Printed result type
        declared: Printed declared specification
        inferred: Printed inferred specification (wp)
        obligations: Discharged obligations in order
        timings: Phase name -> seconds
        outputs: Executable outputs of recursive definitions, argument -> value
    """
    name: str
    label: str
    observation: str
    result_type: str
    declared: str
    inferred: str
    obligations: List[Obligation] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)

    @property
    def status(self) -> str:
        """Worst status over the obligations"""
        statuses = {ob.status for ob in self.obligations}
        if ObligationStatus.COUNTEREXAMPLE in statuses:
            return ObligationStatus.COUNTEREXAMPLE.value
        if ObligationStatus.RESOURCE_EXCEEDED in statuses:
            return ObligationStatus.RESOURCE_EXCEEDED.value
        if ObligationStatus.PENDING in statuses:
            return ObligationStatus.PENDING.value
        return ObligationStatus.VALID.value

    def is_verified(self) -> bool:
        return all(ob.is_valid for ob in self.obligations)

    def to_dict(self, include_timings: bool = False) -> Dict:
        data = {
            'name': self.name,
            'label': self.label,
            'observation': self.observation,
            'result_type': self.result_type,
            'declared': self.declared,
            'inferred': self.inferred,
            'status': self.status,
            'obligations': [ob.to_dict() for ob in self.obligations],
        }
        if self.outputs:
            data['outputs'] = dict(self.outputs)
        if include_timings:
            data['timings'] = {k: round(v, 6) for k, v in self.timings.items()}
        return data

    def summary(self, dump_wp: bool = False) -> str:
        marker = STATUS_MARKERS[ObligationStatus(self.status)]
        lines = [f"{marker} {self.name} : {self.label} {self.result_type} ({self.observation})"]
        if dump_wp:
            lines.append(f"    inferred: {self.inferred}")
            lines.append(f"    declared: {self.declared}")
        for ob in self.obligations:
            line = f"    {STATUS_MARKERS[ob.status]} {ob.name} [{ob.kind}] {ob.status.value}"
            if ob.counterexample is not None:
                shown = ", ".join(f"{k} = {v}" for k, v in ob.counterexample.items()) or "formula is false"
                line += f": {shown}"
            if ob.detail:
                line += f" ({ob.detail})"
            lines.append(line)
        return "\n".join(lines)


@dataclass
class RunMetrics:
    """
    Counts over a verification run

    Attributes:
        definitions: Definitions verified
        obligations: Obligations discharged
        valid: Valid obligations
        counterexamples: Obligations with a counterexample
        resource_exceeded: Obligations that hit an enumeration cap
        warnings: Validator warnings carried into the report
    """
    definitions: int = 0
    obligations: int = 0
    valid: int = 0
    counterexamples: int = 0
    resource_exceeded: int = 0
    warnings: List[str] = field(default_factory=list)

    def add(self, report: DefinitionReport):
        self.definitions += 1
        for ob in report.obligations:
            self.obligations += 1
            if ob.status is ObligationStatus.VALID:
                self.valid += 1
            elif ob.status is ObligationStatus.COUNTEREXAMPLE:
                self.counterexamples += 1
            elif ob.status is ObligationStatus.RESOURCE_EXCEEDED:
                self.resource_exceeded += 1

    def add_warning(self, warning: str):
        if warning not in self.warnings:
            self.warnings.append(warning)

    def to_dict(self) -> Dict:
        return {
            'definitions': self.definitions,
            'obligations': self.obligations,
            'valid': self.valid,
            'counterexamples': self.counterexamples,
            'resource_exceeded': self.resource_exceeded,
            'warnings': list(self.warnings),
        }

    def get_summary(self) -> str:
        summary = [
            f"Definitions: {self.definitions}",
            f"Obligations: {self.obligations} ({self.valid} valid, {self.counterexamples} "
            f"counterexamples, {self.resource_exceeded} resource exceeded)",
        ]
        if self.warnings:
            summary.append(f"Warnings: {len(self.warnings)}")
        return "\n".join(summary)


@dataclass
class VerificationReport:
    """
    Result of checking one source file

    Attributes:
        source: Path of the checked file
        domain: Domain configuration used by the prover
        definitions: Per-definition reports in source order
        metrics: Run counts
    """
    source: str
    domain: Dict = field(default_factory=dict)
    definitions: List[DefinitionReport] = field(default_factory=list)
    metrics: RunMetrics = field(default_factory=RunMetrics)

    def add(self, report: DefinitionReport):
        self.definitions.append(report)
        self.metrics.add(report)

    @property
    def obligations(self) -> List[Obligation]:
        return [ob for d in self.definitions for ob in d.obligations]

    def exit_code(self) -> int:
        """0 all valid, 1 any counterexample, 2 any resource exceeded"""
        if self.metrics.counterexamples:
            return 1
        if self.metrics.resource_exceeded:
            return 2
        return 0

    def get_definition(self, name: str) -> Optional[DefinitionReport]:
        for d in self.definitions:
            if d.name == name:
                return d
        return None

    def to_dict(self, include_timings: bool = False) -> Dict:
        return {
            'schema_version': Config.JSON_SCHEMA_VERSION,
            'source': self.source,
            'domain': dict(self.domain),
            'definitions': [d.to_dict(include_timings) for d in self.definitions],
            'metrics': self.metrics.to_dict(),
            'exit_code': self.exit_code(),
        }

    def summary(self, dump_wp: bool = False) -> str:
        """Human-readable report"""
        lines = [f"=== Verification of {self.source} ==="]
        lines += [d.summary(dump_wp) for d in self.definitions]
        lines.append("")
        lines.append(self.metrics.get_summary())
        return "\n".join(lines)
