#!/usr/bin/env python3
"""
Program Verifier - Main verification engine for .eff programs
Combines parsing, validation, elaboration and finite-domain discharge
"""

import logging
import time
from pathlib import Path
from typing import List, Mapping, Optional, Union

# Handle imports for both module and script execution
try:
    from core.data_models import DefinitionReport, VerificationReport
    from core.elaborator import ElaboratedDefinition, Elaborator
    from core.errors import ElaborationError
    from core.program_validator import ProgramValidator
    from core.surface_parser import parse_program
    from exporters.smtlib_exporter import SMTLibExporter
    from prover.decide import discharge
    from utils.config import Config, DomainConfig
except ModuleNotFoundError:
    import sys
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from core.data_models import DefinitionReport, VerificationReport
    from core.elaborator import ElaboratedDefinition, Elaborator
    from core.errors import ElaborationError
    from core.program_validator import ProgramValidator
    from core.surface_parser import parse_program
    from exporters.smtlib_exporter import SMTLibExporter
    from prover.decide import discharge
    from utils.config import Config, DomainConfig

logger = logging.getLogger(__name__)


class ProgramVerifier:
    """
    Main program verifier

    Parses a program, validates it, elaborates every definition in source
    order and discharges the resulting obligations over the finite domain.
    """

    def __init__(self, dom: Optional[DomainConfig] = None, overrides: Optional[Mapping[str, str]] = None,
                 history: str = Config.HISTORY_MODE):
        """
        Initialize the verifier

        Args:
            dom: Finite domain for discharge. If None, Config defaults.
            overrides: Label -> observation key replacing the program's choice
            history: Treatment of history binders ('universal' or 'empty')
        """
        self.dom = dom or DomainConfig.from_config()
        self.dom.validate()
        self.overrides = dict(overrides or {})
        self.history = history
        self.validator = ProgramValidator(self.overrides)

    def verify_file(self, path: Union[str, Path]) -> VerificationReport:
        """
        Verify a program file

        Raises:
            OSError: The file cannot be read
            ParseError: Malformed program
            ElaborationError: Critical validation issue or ill-typed definition
        """
        path = Path(path)
        text = path.read_text(encoding=Config.SOURCE_ENCODING)
        return self.verify_text(text, str(path))

    def verify_text(self, text: str, source: str = '<string>') -> VerificationReport:
        """
        Verify program text

        Args:
            text: Program source
            source: Name recorded in the report

        Returns:
            VerificationReport with one DefinitionReport per definition
        """
        report = VerificationReport(source=source, domain=self.dom.to_dict())

        start = time.perf_counter()
        program = parse_program(text)
        parse_time = time.perf_counter() - start
        logger.info(f"Parsed {source}: {len(program.decls)} declarations in {parse_time:.3f}s")

        is_valid, issues = self.validator.validate(program)
        if not is_valid:
            first = self.validator.get_critical_issues()[0]
            logger.error(self.validator.format_validation_report())
            raise ElaborationError(first.message, first.line, first.column)
        for issue in self.validator.get_warning_issues():
            report.metrics.add_warning(f"{issue.position} {issue.message}")

        elaborator = Elaborator(program, self.overrides, self.dom, self.history)
        elaborator.declare()
        for decl in program.definitions():
            start = time.perf_counter()
            elaborated = elaborator.elaborate_definition(decl)
            for warning in elaborated.warnings:
                report.metrics.add_warning(f"{decl.span[0]}:{decl.span[1]} {warning}")
            elaborate_time = time.perf_counter() - start
            definition = self._discharge(elaborated)
            definition.timings['elaborate'] = elaborate_time
            definition.timings['parse'] = parse_time
            report.add(definition)

        logger.info(f"Verified {source}: exit code {report.exit_code()}")
        return report

    def _discharge(self, elaborated: ElaboratedDefinition) -> DefinitionReport:
        """Decide the obligations of one definition"""
        start = time.perf_counter()
        obligations = [discharge(ob, self.dom) for ob in elaborated.obligations]
        elapsed = time.perf_counter() - start
        logger.debug(f"{elaborated.name}: {len(obligations)} obligations discharged in {elapsed:.3f}s")
        return DefinitionReport(
            name=elaborated.name,
            label=elaborated.label,
            observation=elaborated.obs_key,
            result_type=elaborated.result_type,
            declared=elaborated.declared.normalized().pretty(),
            inferred=elaborated.inferred.pretty(),
            obligations=obligations,
            timings={'discharge': elapsed},
            outputs=dict(elaborated.outputs),
        )

    @staticmethod
    def emit_smt(report: VerificationReport, directory: Union[str, Path]) -> List[Path]:
        """Write every obligation of report as an SMT-LIB query"""
        return SMTLibExporter().save_all(report.obligations, directory)


# Example usage and testing
if __name__ == "__main__":
    print("=== Program Verifier Test ===\n")

    sample = """
    (* adds x to the state *)
    let stmod (x : int) : St unit (fun p s0 -> p ((), s0 + x)) =
      let s = get () in
      put (s + x)
    """
    verifier = ProgramVerifier(DomainConfig(int_lo=0, int_hi=3))
    report = verifier.verify_text(sample, 'sample.eff')
    print(report.summary(dump_wp=True))
    print(f"\nExit code: {report.exit_code()}")
