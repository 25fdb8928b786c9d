#!/usr/bin/env python3
"""
Integration Test - End-to-end runs of the example programs through the CLI
Tests: Parsing → Validation → Elaboration → Discharge → JSON and SMT-LIB export
"""

import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from effcheck_cli import EXIT_ERROR, main
from core.verifier import ProgramVerifier
from exporters.json_exporter import load_report_dict
from utils.config import Config, DomainConfig


PROGRAMS = Config.PROGRAMS_DIR

# Programs with a deliberate defect; every other program verifies
EXPECTED_FAILURES = {
    'pyths_noguard': 'division by a value that may be zero',
    'print_increasing_broken': 'an output the history does not justify',
    'handle_choice_broken': 'a handler resuming against the contract',
    'fib_nondecreasing': 'a recursive call that does not decrease the measure',
}


def check(*args):
    return main(['check', *map(str, args), '--int-range', '0..10', '-q'])


def fib_oracle(k):
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


@pytest.mark.parametrize('path', Config.corpus_files(), ids=lambda p: p.stem)
def test_program_exit_codes(path):
    """Every example program ends with its expected exit code"""
    expected = 1 if path.stem in EXPECTED_FAILURES else 0
    print(f"\n{'=' * 80}\n{path.name}: expecting {expected}"
          f"{' (' + EXPECTED_FAILURES[path.stem] + ')' if expected else ''}\n{'=' * 80}")
    assert check(path) == expected


def test_fib_outputs_match_iteration():
    report = ProgramVerifier(DomainConfig(int_lo=0, int_hi=10)).verify_file(PROGRAMS / 'fib.eff')
    fib = report.get_definition('fib')
    assert fib.outputs, "fib should be executable"
    for arg, value in fib.outputs.items():
        print(f"  fib {arg} = {value}")
        assert int(value) == fib_oracle(int(arg))


def test_json_report_is_deterministic(tmp_path):
    first, second = tmp_path / 'first.json', tmp_path / 'second.json'
    assert check(PROGRAMS / 'stmod.eff', '--json', first) == 0
    assert check(PROGRAMS / 'stmod.eff', '--json', second) == 0
    assert first.read_bytes() == second.read_bytes()

    data = load_report_dict(first)
    names = [d['name'] for d in data['definitions']]
    assert names == ['stmod', 'incr']
    assert all('timings' not in d for d in data['definitions'])


def test_emit_smt_writes_one_file_per_obligation(tmp_path):
    smt_dir = tmp_path / 'smt'
    assert check(PROGRAMS / 'stmod.eff', '--emit-smt', smt_dir) == 0
    written = sorted(path.name for path in smt_dir.glob('*.smt2'))
    print(f"\n  {written}")
    assert 'stmod.1.smt2' in written and 'incr.1.smt2' in written
    text = (smt_dir / 'incr.1.smt2').read_text(encoding='utf-8')
    assert text.startswith("; obligation incr.1")
    assert "(check-sat)" in text


def test_observation_override_on_the_command_line():
    assert check(PROGRAMS / 'nondet.eff') == 0
    assert check(PROGRAMS / 'nondet.eff', '--obs', 'NDD=nd-angelic') == 1


def test_missing_file_is_an_error(tmp_path):
    assert check(tmp_path / 'absent.eff') == EXIT_ERROR


def test_parse_error_is_an_error(tmp_path):
    bad = tmp_path / 'bad.eff'
    bad.write_text("let f () : Pure int (fun p -> p 1) =\n", encoding='utf-8')
    assert check(bad) == EXIT_ERROR


def test_critical_validation_issue_is_an_error(tmp_path):
    bad = tmp_path / 'dup.eff'
    text = "let f () : Pure int (fun p -> p 1) = 1\n"
    bad.write_text(text + text, encoding='utf-8')
    assert check(bad) == EXIT_ERROR


@pytest.mark.parametrize('argv', [
    ['check', 'programs/stmod.eff', '--no-such-flag'],
    ['check', 'programs/stmod.eff', '--int-range', '5..1'],
    ['check', 'programs/stmod.eff', '--obs', 'NDD'],
])
def test_usage_errors_exit_with_error_code(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == EXIT_ERROR


def test_with_int_range_keeps_other_settings():
    base = DomainConfig(list_bound=2, pred_cap=8)
    wide = base.with_int_range(*Config.parse_int_range('-3..3'))
    assert (wide.int_lo, wide.int_hi) == (-3, 3)
    assert (wide.list_bound, wide.pred_cap) == (2, 8)
    assert (base.int_lo, base.int_hi) == Config.DEFAULT_INT_RANGE
    with pytest.raises(ValueError):
        base.with_int_range(5, 1)
    with pytest.raises(ValueError):
        Config.parse_int_range('3')


if __name__ == "__main__":
    print("=" * 80)
    print("EFFCHECK INTEGRATION TEST")
    print("=" * 80)
    failures = []
    for program in Config.corpus_files():
        expected = 1 if program.stem in EXPECTED_FAILURES else 0
        code = check(program)
        mark = "✓" if code == expected else "❌"
        print(f"{mark} {program.name}: exit {code} (expected {expected})")
        if code != expected:
            failures.append(program.name)

    print("\n" + "=" * 80)
    if failures:
        print(f"❌ INTEGRATION TEST FAILED: {', '.join(failures)}")
        sys.exit(1)
    print("✅ INTEGRATION TEST COMPLETED SUCCESSFULLY")
    print("=" * 80)
    sys.exit(0)
