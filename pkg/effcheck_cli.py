#!/usr/bin/env python3
"""
Effcheck CLI - Command-line interface for verifying .eff programs
Finite-domain discharge with JSON and SMT-LIB export
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

# Handle imports
try:
    from core.errors import ElaborationError, ParseError, VerifierError
    from core.verifier import ProgramVerifier
    from exporters.json_exporter import JSONExporter
    from utils.config import Config, DomainConfig
except ModuleNotFoundError:
    sys.path.insert(0, str(Path(__file__).parent))
    from core.errors import ElaborationError, ParseError, VerifierError
    from core.verifier import ProgramVerifier
    from exporters.json_exporter import JSONExporter
    from utils.config import Config, DomainConfig

logger = logging.getLogger(__name__)

EXIT_ERROR = 3


class CheckArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the parse/type error code"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def parse_overrides(items: Optional[List[str]]) -> Dict[str, str]:
    """
    LABEL=KEY pairs from --obs

    Raises:
        ValueError: An item without '='
    """
    overrides = {}
    for item in items or []:
        label, sep, key = item.partition('=')
        if not sep or not label or not key:
            raise ValueError(f"--obs expects LABEL=KEY, got {item!r}")
        overrides[label.strip()] = key.strip()
    return overrides


class EffcheckCLI:
    """
    Command-line interface for the verifier

    Features:
    - Verify a program and print per-definition results
    - Dump inferred and declared specifications
    - Export the report as JSON and obligations as SMT-LIB
    """

    def __init__(self, dom: DomainConfig, overrides: Optional[Dict[str, str]] = None,
                 history: str = Config.HISTORY_MODE, quiet: bool = False):
        self.verifier = ProgramVerifier(dom, overrides, history)
        self.quiet = quiet

    def check_file(self, input_file: Path, dump_wp: bool = False, json_path: Optional[Path] = None,
                   smt_dir: Optional[Path] = None, timings: bool = False) -> int:
        """
        Verify one program file

        Args:
            input_file: .eff program
            dump_wp: Print inferred and declared specifications
            json_path: Write the JSON report here
            smt_dir: Write one SMT-LIB query per obligation here
            timings: Include timings in the JSON report

        Returns:
            Exit code: 0 all valid, 1 counterexample, 2 resource exceeded, 3 error
        """
        try:
            if not self.quiet:
                print(f"\n📄 Reading: {input_file}")
            report = self.verifier.verify_file(input_file)
        except FileNotFoundError:
            print(f"❌ Error: File not found: {input_file}", file=sys.stderr)
            return EXIT_ERROR
        except ParseError as e:
            print(f"❌ {input_file}: parse error: {e}", file=sys.stderr)
            return EXIT_ERROR
        except ElaborationError as e:
            print(f"❌ {input_file}: {e}", file=sys.stderr)
            if self.verifier.validator.get_critical_issues():
                print(self.verifier.validator.format_validation_report(), file=sys.stderr)
            return EXIT_ERROR
        except VerifierError as e:
            print(f"❌ {input_file}: {type(e).__name__}: {e}", file=sys.stderr)
            return EXIT_ERROR

        print(report.summary(dump_wp=dump_wp))
        for definition in report.definitions:
            if definition.outputs and not self.quiet:
                shown = ", ".join(f"{k} ↦ {v}" for k, v in definition.outputs.items())
                print(f"  {definition.name} runs: {shown}")
        for warning in report.metrics.warnings:
            print(f"⚠️  {warning}", file=sys.stderr)

        if json_path is not None:
            JSONExporter(pretty=Config.EXPORT_PRETTY_JSON, include_timings=timings).save_to_file(report, json_path)
        if smt_dir is not None:
            written = self.verifier.emit_smt(report, smt_dir)
            if not self.quiet:
                print(f"✓ Wrote {len(written)} SMT-LIB file(s) to {smt_dir}")

        code = report.exit_code()
        if not self.quiet:
            marker = {0: '✓ All obligations valid', 1: '❌ Counterexample found',
                      2: '⚠️  Enumeration limits exceeded'}[code]
            print(f"\n{marker}")
        return code


def build_parser() -> argparse.ArgumentParser:
    parser = CheckArgumentParser(
        prog='effcheck',
        description="Effcheck - Verify effectful programs against their specifications",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Verify a program with the default domain (ints 0..7, lists up to 4)
  python effcheck_cli.py check programs/stmod.eff

  # Larger integer range, printing inferred specifications
  python effcheck_cli.py check programs/pyths.eff --int-range 0..10 --dump-wp

  # Rebind a label to another observation
  python effcheck_cli.py check programs/pickl.eff --obs ND=nd-angelic

  # Export the report and the obligations
  python effcheck_cli.py check programs/fib.eff --json out/fib.json --emit-smt out/smt

Exit codes:
  0  every obligation is valid
  1  some obligation has a counterexample
  2  some obligation exceeded an enumeration limit
  3  parse, type or elaboration error
        """
    )
    sub = parser.add_subparsers(dest='command', required=True)
    check = sub.add_parser('check', help='Verify a program file')
    check.add_argument('input_file', type=Path, metavar='FILE', help='Program file (.eff)')

    check.add_argument('--int-range', default=None, metavar='LO..HI',
                       help=f'Integer carrier (default: {Config.DEFAULT_INT_RANGE[0]}..{Config.DEFAULT_INT_RANGE[1]})')
    check.add_argument('--list-bound', type=int, default=Config.DEFAULT_LIST_BOUND, metavar='N',
                       help=f'Maximum list length (default: {Config.DEFAULT_LIST_BOUND})')
    check.add_argument('--pred-cap', type=int, default=Config.DEFAULT_PRED_CAP, metavar='N',
                       help=f'Largest carrier quantified by predicate tables (default: {Config.DEFAULT_PRED_CAP})')
    check.add_argument('--obs', action='append', metavar='LABEL=KEY',
                       help='Interpret LABEL with observation KEY (repeatable)')
    check.add_argument('--history', choices=['universal', 'empty'], default=Config.HISTORY_MODE,
                       help='History binder treatment in root obligations (default: universal)')

    check.add_argument('--dump-wp', action='store_true', help='Print inferred and declared specifications')
    check.add_argument('--json', type=Path, metavar='PATH', help='Write the JSON report to PATH')
    check.add_argument('--emit-smt', type=Path, metavar='DIR', help='Write DEF.N.smt2 queries to DIR')
    check.add_argument('--timings', action='store_true', help='Include timings in the JSON report')

    check.add_argument('-q', '--quiet', action='store_true', help='Reduce output verbosity')
    check.add_argument('-v', '--verbose', action='store_true', help='Log at DEBUG level')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    Config.setup_logging('DEBUG' if args.verbose else None)

    try:
        dom = DomainConfig(list_bound=args.list_bound, pred_cap=args.pred_cap)
        if args.int_range:
            dom = dom.with_int_range(*Config.parse_int_range(args.int_range))
        overrides = parse_overrides(args.obs)
    except ValueError as e:
        parser.error(str(e))

    cli = EffcheckCLI(dom, overrides, args.history, args.quiet)
    return cli.check_file(args.input_file, args.dump_wp, args.json, args.emit_smt, args.timings)


if __name__ == "__main__":
    sys.exit(main())
