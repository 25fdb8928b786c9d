#!/usr/bin/env python3
"""
Frontend Tests - Parser, printer, program validator and the verifier pipeline
"""

import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from core import surface_ast as ast
from core.errors import ElaborationError, ParseError
from core.program_validator import ProgramValidator, ValidationSeverity
from core.surface_parser import parse_file, parse_program
from core.surface_printer import format_program
from core.verifier import ProgramVerifier
from utils.config import DomainConfig


DOM = DomainConfig(int_lo=0, int_hi=3, list_bound=2)
PROGRAMS = Path(__file__).parent / "programs"

INCR = """
(* add x to the state *)
let incr (x : int) : St unit (fun p s0 -> p ((), s0 + x)) =
  let s = get () in
  put (s + x)
"""

CHOICE = """
effect Choose {
  | choice (u : unit) : (b : bool) ensures b = true
}

let always_true () : Pure bool (fun p -> p true) =
  handle Choose (choice ())
    returns fun x -> x = true
    ensures fun y -> y = true
  with
  | return x -> x
  | choice u k -> k true
  end
"""


def validate(text, overrides=None):
    validator = ProgramValidator(overrides)
    is_valid, issues = validator.validate(parse_program(text))
    for issue in issues:
        print(f"  {issue.severity.value}: {issue.message}")
    return is_valid, validator


# =============================================================================
# Parser
# =============================================================================

def test_parse_definition():
    program = parse_program(INCR)
    [decl] = program.definitions()
    assert decl.name == 'incr'
    assert decl.label == 'St'
    assert [p.name for p in decl.params] == ['x']
    assert isinstance(decl.spec, ast.SpecLambda)
    assert decl.spec.binders == ['p', 's0']
    assert not decl.recursive


def test_parse_effect_and_handler():
    program = parse_program(CHOICE)
    effects = [d for d in program.decls if isinstance(d, ast.EffectDecl)]
    assert [e.name for e in effects] == ['Choose']
    [decl] = program.definitions()
    assert any(isinstance(node, ast.Handle) for node in ast.walk(decl.body))


@pytest.mark.parametrize('text', ["", "   \n\n", "(* nothing (* nested *) here *)\n"])
def test_empty_program(text):
    assert parse_program(text).decls == []


def test_printer_output_parses_back():
    for text in (INCR, CHOICE):
        printed = format_program(parse_program(text))
        reparsed = parse_program(printed)
        assert [type(d) for d in reparsed.decls] == [type(d) for d in parse_program(text).decls]
        assert format_program(reparsed) == printed


@pytest.mark.parametrize('path', sorted(PROGRAMS.glob('*.eff')), ids=lambda p: p.stem)
def test_example_programs_parse_and_print(path):
    program = parse_file(path)
    assert program.definitions()
    printed = format_program(program)
    assert format_program(parse_program(printed)) == printed


def test_parse_error_has_position():
    text = "let f () : Pure int (fun p -> p 1) =\n  )"
    with pytest.raises(ParseError) as info:
        parse_program(text)
    print(f"\n  {info.value}")
    assert info.value.line == 2
    assert info.value.column == 3


def test_parse_error_at_end_of_input():
    with pytest.raises(ParseError) as info:
        parse_program("let f () : Pure int (fun p -> p 1) = 1 +")
    assert "end of input" in str(info.value)
    assert info.value.line == 1


def test_unterminated_comment():
    with pytest.raises(ParseError):
        parse_program("(* never closed\nlet f () : Pure int (fun p -> p 1) = 1")


# =============================================================================
# Validator
# =============================================================================

def test_valid_program_has_no_issues():
    is_valid, validator = validate(INCR)
    assert is_valid
    assert validator.issues == []


def test_duplicate_definitions():
    is_valid, validator = validate(INCR + INCR)
    assert not is_valid
    assert any('declared 2 times' in i.message for i in validator.get_critical_issues())


def test_unknown_label():
    is_valid, validator = validate("let f () : Foo int (fun p -> p 1) = 1")
    assert not is_valid
    assert validator.get_critical_issues()[0].name == 'Foo'


def test_unknown_observation_key():
    is_valid, validator = validate("observation R = nd-random\nlet f () : R int (fun p -> p 1) = 1")
    assert not is_valid
    assert any(i.name == 'nd-random' for i in validator.get_critical_issues())


def test_spec_lambda_arity():
    is_valid, validator = validate("let f () : St unit (fun p -> p ()) = ()")
    assert not is_valid
    assert 'binds 2 names' in validator.get_critical_issues()[0].message


def test_let_rec_takes_one_parameter():
    text = "let rec f (a : int) (b : int) : Pure int (fun p -> p 0) = 0"
    is_valid, validator = validate(text)
    assert not is_valid
    assert any('let rec f' in i.message for i in validator.get_critical_issues())


def test_handle_of_undeclared_effect():
    text = CHOICE.split("let", 1)[1]
    is_valid, validator = validate("let" + text)
    assert not is_valid
    assert any(i.name == 'Choose' for i in validator.get_critical_issues())


def test_spec_ignoring_its_post_is_a_warning():
    is_valid, validator = validate("let f () : Pure int (fun p -> false) = 1")
    assert is_valid
    [warning] = validator.get_warning_issues()
    assert warning.severity is ValidationSeverity.WARNING
    assert warning.name == 'p'


def test_unused_override_label_is_a_warning():
    is_valid, validator = validate(INCR, overrides={'ND': 'nd-angelic'})
    assert is_valid
    assert [i.name for i in validator.get_warning_issues()] == ['ND']


def test_unknown_override_key_is_critical():
    is_valid, _ = validate(INCR, overrides={'St': 'state'})
    assert not is_valid


def test_unused_logic_function_is_info():
    text = "logic twice (a : int) : int = a + a\n" + INCR
    is_valid, validator = validate(text)
    assert is_valid
    assert [i.name for i in validator.get_info_issues()] == ['twice']
    print(f"\n{validator.format_validation_report()}")


# =============================================================================
# Verifier pipeline
# =============================================================================

def test_verify_text_valid_definition():
    report = ProgramVerifier(DOM).verify_text(INCR)
    print(f"\n{report.summary()}")
    assert report.exit_code() == 0
    incr = report.get_definition('incr')
    assert incr is not None and incr.is_verified()
    assert incr.observation == 'st'


def test_verify_text_reports_counterexample():
    broken = INCR.replace("s0 + x", "s0")
    report = ProgramVerifier(DOM).verify_text(broken)
    assert report.exit_code() == 1
    root = report.get_definition('incr').obligations[-1]
    assert root.kind == 'root'
    assert root.counterexample


def test_verify_text_with_handler():
    report = ProgramVerifier(DOM).verify_text(CHOICE)
    assert report.exit_code() == 0
    kinds = [ob.kind for ob in report.get_definition('always_true').obligations]
    assert 'contract' in kinds and 'clause' in kinds


def test_verify_text_rejects_critical_issues():
    with pytest.raises(ElaborationError) as info:
        ProgramVerifier(DOM).verify_text(INCR + INCR)
    assert info.value.line > 0


def test_verify_text_rejects_ill_typed_body():
    with pytest.raises(ElaborationError):
        ProgramVerifier(DOM).verify_text("let f () : Pure int (fun p -> p 1) = true")


def test_override_changes_the_outcome():
    """Angelic choice fails when the list may be empty"""
    text = """
let pick_one (l : list int) : ND int (fun p -> forall x. elem x l ==> p x) =
  match l with
  | [] -> fail ()
  | h :: t -> h
"""
    demonic = ProgramVerifier(DOM).verify_text(text)
    angelic = ProgramVerifier(DOM, overrides={'ND': 'nd-angelic'}).verify_text(text)
    print(f"\n  demonic: {demonic.exit_code()}  angelic: {angelic.exit_code()}")
    assert demonic.exit_code() == 0
    assert angelic.exit_code() == 1


def test_non_monotone_spec_is_reported():
    report = ProgramVerifier(DOM).verify_text("let f () : Pure int (fun p -> p 0 ==> p 1) = 1")
    print(f"\n  {report.metrics.warnings}")
    assert any('not monotone' in w for w in report.metrics.warnings)
