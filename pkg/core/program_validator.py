#!/usr/bin/env python3
"""
Program Validator - Static checks on parsed programs before elaboration
Critical issues stop the run with exit code 3; warnings are carried into the report
"""

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

# Handle imports
try:
    from core import surface_ast as ast
    from core.elaborator import OP_ALIASES, PRELUDE_LABELS
    from core.errors import UnknownObservation
    from core.logic import UNIT
    from core.observations import REGISTRY_KEYS, build_observation
except ModuleNotFoundError:
    import sys
    from pathlib import Path
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core import surface_ast as ast
    from core.elaborator import OP_ALIASES, PRELUDE_LABELS
    from core.errors import UnknownObservation
    from core.logic import UNIT
    from core.observations import REGISTRY_KEYS, build_observation


class ValidationSeverity(Enum):
    """Severity levels for validation issues"""
    CRITICAL = "critical"  # Stops the run before elaboration
    WARNING = "warning"    # Reported, verification continues
    INFO = "info"          # Informational only


@dataclass
class ValidationIssue:
    """Represents a validation issue"""
    location: str
    name: str
    severity: ValidationSeverity
    message: str
    line: int = 0
    column: int = 0
    suggested_action: Optional[str] = None

    @property
    def position(self) -> str:
        return f"{self.line}:{self.column}" if self.line else "-"


class ProgramValidator:
    """
    Validates parsed programs

    Critical (the program is not elaborated):
    - Duplicate definition, logic function, type, constructor or effect names
    - Unknown labels and observation keys
    - Specification lambdas binding the wrong number of names
    - let rec with other than one parameter
    - Parameters named like a specification binder of their label
    - Definitions named like an operation of their label
    - handle of an undeclared effect

    Warnings:
    - Specifications that never mention their postcondition
    - Observation overrides naming a label the program never uses

    Info:
    - Logic functions no definition mentions
    """

    def __init__(self, overrides: Optional[Mapping[str, str]] = None):
        """
        Args:
            overrides: Label -> observation key, as given on the command line
        """
        self.overrides = dict(overrides or {})
        self.issues: List[ValidationIssue] = []
        self._labels: Dict[str, str] = {}

    def validate(self, program: ast.Program) -> Tuple[bool, List[ValidationIssue]]:
        """
        Validate a program

        Args:
            program: Parsed program

        Returns:
            Tuple of (is_valid, list_of_issues)
            is_valid is False if any CRITICAL issues found
        """
        self.issues = []
        self._labels = dict(PRELUDE_LABELS)

        self._validate_names(program)
        self._validate_observations(program)
        self._validate_overrides(program)

        effects = {d.name for d in program.decls if isinstance(d, ast.EffectDecl)}
        for decl in program.definitions():
            self._validate_definition(decl, effects)
        self._validate_logic_usage(program)

        has_critical = any(issue.severity == ValidationSeverity.CRITICAL for issue in self.issues)
        return (not has_critical, self.issues)

    def _add(self, node, location: str, name: str, severity: ValidationSeverity, message: str,
             suggested_action: Optional[str] = None):
        line, column = getattr(node, 'span', None) or (0, 0)
        self.issues.append(ValidationIssue(location, name, severity, message, line, column,
                                           suggested_action))

    def _validate_names(self, program: ast.Program):
        """Duplicate names per namespace"""
        namespaces = {
            'definition': [d for d in program.decls if isinstance(d, ast.LetDecl)],
            'logic function': [d for d in program.decls if isinstance(d, ast.LogicDecl)],
            'type': [d for d in program.decls if isinstance(d, (ast.TypeAlias, ast.EnumDecl))],
            'effect': [d for d in program.decls if isinstance(d, ast.EffectDecl)],
            'observation label': [d for d in program.decls if isinstance(d, ast.ObservationDecl)],
        }
        for kind, decls in namespaces.items():
            names = [d.label if isinstance(d, ast.ObservationDecl) else d.name for d in decls]
            counts = Counter(names)
            for decl, name in zip(decls, names):
                if counts[name] > 1:
                    self._add(decl, f"{kind} {name}", name, ValidationSeverity.CRITICAL,
                              f"{kind} {name} is declared {counts[name]} times",
                              "Rename one of the declarations")
                    counts[name] = 1

        ctors = [(d, c.name) for d in program.decls if isinstance(d, ast.EnumDecl) for c in d.ctors]
        counts = Counter(name for _, name in ctors)
        for decl, name in ctors:
            if counts[name] > 1:
                self._add(decl, f"type {decl.name}", name, ValidationSeverity.CRITICAL,
                          f"constructor {name} is declared {counts[name]} times")
                counts[name] = 1

        logic = {d.name for d in namespaces['logic function']}
        for decl in namespaces['definition']:
            if decl.name in logic:
                self._add(decl, f"let {decl.name}", decl.name, ValidationSeverity.CRITICAL,
                          f"{decl.name} is both a definition and a logic function")

    def _validate_observations(self, program: ast.Program):
        for decl in program.decls:
            if not isinstance(decl, ast.ObservationDecl):
                continue
            if decl.key not in REGISTRY_KEYS and decl.key != 'pure':
                self._add(decl, f"observation {decl.label}", decl.key, ValidationSeverity.CRITICAL,
                          f"unknown observation {decl.key}",
                          f"Use one of: {', '.join(REGISTRY_KEYS)}")
                continue
            self._labels[decl.label] = decl.key
            unknown = [k for k, _ in decl.params if k not in ('S', 'E', 'I', 'O')]
            if unknown:
                self._add(decl, f"observation {decl.label}", ', '.join(unknown),
                          ValidationSeverity.CRITICAL, f"unknown carrier parameter {', '.join(unknown)}",
                          "Parameters are S, E, I and O")

    def _validate_overrides(self, program: ast.Program):
        used = {d.label for d in program.definitions()}
        for label, key in self.overrides.items():
            if key not in REGISTRY_KEYS and key != 'pure':
                self._add(None, "--obs", label, ValidationSeverity.CRITICAL,
                          f"unknown observation {key} for label {label}")
            elif label not in used:
                self._add(None, "--obs", label, ValidationSeverity.WARNING,
                          f"label {label} is not used by any definition")

    def _key(self, label: str) -> Optional[str]:
        if label not in self._labels:
            return None
        return self.overrides.get(label, self._labels[label])

    def _validate_definition(self, decl: ast.LetDecl, effects):
        location = f"let {decl.name}"
        key = self._key(decl.label)
        if key is None:
            self._add(decl, location, decl.label, ValidationSeverity.CRITICAL,
                      f"unknown label {decl.label}",
                      "Declare it with 'observation' or use a prelude label")
        else:
            self._validate_against_observation(decl, key)

        if decl.recursive and len(decl.params) != 1:
            self._add(decl, location, decl.name, ValidationSeverity.CRITICAL,
                      f"let rec {decl.name} takes {len(decl.params)} parameters",
                      "Pass a single (possibly tuple) parameter")

        for node in ast.walk(decl.body):
            if isinstance(node, ast.Handle) and node.effect not in effects:
                self._add(node, location, node.effect, ValidationSeverity.CRITICAL,
                          f"handle of undeclared effect {node.effect}")

    def _validate_against_observation(self, decl: ast.LetDecl, key: str):
        location = f"let {decl.name}"
        try:
            obs = build_observation(key)
        except UnknownObservation:
            self._add(decl, location, key, ValidationSeverity.CRITICAL, f"unknown observation {key}")
            return
        shape = obs.target.shape(UNIT)
        binders = shape.post_names + shape.ctx_names

        if isinstance(decl.spec, ast.SpecLambda) and len(decl.spec.binders) != len(binders):
            self._add(decl.spec, location, decl.label, ValidationSeverity.CRITICAL,
                      f"a {decl.label} specification binds {len(binders)} names, "
                      f"{len(decl.spec.binders)} given",
                      f"Write (fun {' '.join(binders)} -> ...)")
        for p in decl.params:
            if p.name in binders:
                self._add(decl, location, p.name, ValidationSeverity.CRITICAL,
                          f"parameter {p.name} has the name of a specification binder",
                          "Rename the parameter")
        ops = set(obs.sig.op_names) | {a for a, op in OP_ALIASES.items() if obs.sig.has(op)}
        if decl.name in ops:
            self._add(decl, location, decl.name, ValidationSeverity.CRITICAL,
                      f"{decl.name} is an operation of {decl.label}", "Rename the definition")

        if isinstance(decl.spec, ast.SpecLambda):
            posts = decl.spec.binders[:len(shape.post_names)]
            if sorted(decl.spec.binders) == sorted(binders):
                posts = list(shape.post_names)
            mentioned = {n.fn for n in ast.walk(decl.spec.body) if isinstance(n, ast.App)}
            if posts and posts[0] not in mentioned:
                self._add(decl.spec, location, posts[0], ValidationSeverity.WARNING,
                          f"specification of {decl.name} never applies its postcondition {posts[0]}",
                          "Such a specification only holds of computations that never return")

    def _validate_logic_usage(self, program: ast.Program):
        mentioned = set()
        for decl in program.decls:
            if isinstance(decl, (ast.LetDecl, ast.LogicDecl)):
                for node in ast.walk(decl):
                    if isinstance(node, ast.App):
                        mentioned.add(node.fn)
                    elif isinstance(node, ast.Name):
                        mentioned.add(node.name)
        for decl in program.decls:
            if isinstance(decl, ast.LogicDecl) and decl.name not in mentioned:
                self._add(decl, f"logic {decl.name}", decl.name, ValidationSeverity.INFO,
                          f"logic function {decl.name} is never used")

    def get_critical_issues(self) -> List[ValidationIssue]:
        """Get only critical issues"""
        return [issue for issue in self.issues if issue.severity == ValidationSeverity.CRITICAL]

    def get_warning_issues(self) -> List[ValidationIssue]:
        """Get only warning issues"""
        return [issue for issue in self.issues if issue.severity == ValidationSeverity.WARNING]

    def get_info_issues(self) -> List[ValidationIssue]:
        """Get only info issues"""
        return [issue for issue in self.issues if issue.severity == ValidationSeverity.INFO]

    def format_validation_report(self) -> str:
        """Format validation issues as human-readable report"""
        if not self.issues:
            return "✓ Program validation passed - no issues found"

        report_lines = ["=== Program Validation ===\n"]

        critical = self.get_critical_issues()
        if critical:
            report_lines.append(f"🔴 CRITICAL Issues ({len(critical)}):")
            for issue in critical:
                report_lines.append(f"  • {issue.position} {issue.message}")
                report_lines.append(f"    In: {issue.location}")
                if issue.suggested_action:
                    report_lines.append(f"    Action: {issue.suggested_action}")
            report_lines.append("")

        warnings = self.get_warning_issues()
        if warnings:
            report_lines.append(f"⚠️  Warnings ({len(warnings)}):")
            for issue in warnings:
                report_lines.append(f"  • {issue.position} {issue.message}")
                if issue.suggested_action:
                    report_lines.append(f"    Suggestion: {issue.suggested_action}")
            report_lines.append("")

        info = self.get_info_issues()
        if info:
            report_lines.append(f"ℹ️  Info ({len(info)}):")
            for issue in info:
                report_lines.append(f"  • {issue.message}")
            report_lines.append("")

        return "\n".join(report_lines)


# Example usage
if __name__ == "__main__":
    from core.surface_parser import parse_program

    print("=== Program Validator Test ===\n")
    program = parse_program("""
    let f (p : int) : St int (fun q s -> true) = get ()
    let f () : Nope int (fun p -> p 1) = 1
    """)
    validator = ProgramValidator()
    is_valid, issues = validator.validate(program)
    print(f"Valid: {is_valid}")
    print(validator.format_validation_report())
