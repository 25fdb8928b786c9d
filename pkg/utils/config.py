#!/usr/bin/env python3
"""
Configuration Module - System configuration and settings
"""

import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Tuple


class Config:
    """
    Global configuration for the effect verifier
    """

    # Base directories
    BASE_DIR = Path(__file__).parent.parent
    PROGRAMS_DIR = BASE_DIR / 'programs'

    # Source files
    PROGRAM_EXTENSION = '.eff'
    SOURCE_ENCODING = 'utf-8'

    # Finite-domain discharge defaults
    DEFAULT_INT_RANGE: Tuple[int, int] = (0, 7)
    DEFAULT_LIST_BOUND = 4
    DEFAULT_PRED_CAP = 6              # max carrier size for 2^n predicate tables
    DEFAULT_FUN_CAP = 4096            # max number of function tables
    DEFAULT_CARRIER_CAP = 200_000     # max size of any enumerated carrier

    # Recursion unfolding (fix): extra iterations beyond |carrier|
    UNFOLD_SLACK = 1

    # Evaluation of defined logic functions
    MAX_DEFINITION_DEPTH = 2_000

    # Arguments at which a recursive definition is run for the report
    MAX_REPORTED_OUTPUTS = 16

    # Law checkers
    LAW_CHECK_DEPTH = 3

    # Export settings
    EXPORT_PRETTY_JSON = True
    JSON_SCHEMA_VERSION = "1.0"
    SMT_LOGIC_LINEAR = "UFDTLIA"
    SMT_LOGIC_NONLINEAR = "UFDTNIA"
    SMT_FILE_SUFFIX = '.smt2'

    # W^Hist treatment of the declared spec's history variable: universal | empty
    HISTORY_MODE = 'universal'

    # Logging
    LOG_LEVEL = os.getenv('EFFCHECK_LOG_LEVEL', 'WARNING')
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    @classmethod
    def setup_logging(cls, level: Optional[str] = None) -> None:
        """Configure root logging once from the class settings"""
        logging.basicConfig(
            level=getattr(logging, (level or cls.LOG_LEVEL).upper(), logging.WARNING),
            format=cls.LOG_FORMAT
        )

    @classmethod
    def corpus_files(cls):
        """All example programs shipped with the verifier, sorted by name"""
        return sorted(cls.PROGRAMS_DIR.glob(f'*{cls.PROGRAM_EXTENSION}'))

    @classmethod
    def parse_int_range(cls, text: str) -> Tuple[int, int]:
        """
        Parse an interval written LO..HI

        Args:
            text: e.g. "0..10" or "-3..3"

        Returns:
            (lo, hi) tuple

        Raises:
            ValueError: If the text is not an interval
        """
        lo_text, sep, hi_text = text.partition('..')
        if not sep:
            raise ValueError(f"Invalid interval (expected LO..HI): {text}")
        return int(lo_text), int(hi_text)


@dataclass(frozen=True)
class DomainConfig:
    """
    Finite carriers used when discharging obligations

    Attributes:
        int_lo: Smallest int in the quantifier carrier
        int_hi: Largest int in the quantifier carrier
        list_bound: Maximum length of enumerated lists
        pred_cap: Maximum carrier size whose 2^n predicate tables are enumerated
        fun_cap: Maximum number of uninterpreted-function tables
        carrier_cap: Maximum size of any single enumerated carrier
    """
    int_lo: int = Config.DEFAULT_INT_RANGE[0]
    int_hi: int = Config.DEFAULT_INT_RANGE[1]
    list_bound: int = Config.DEFAULT_LIST_BOUND
    pred_cap: int = Config.DEFAULT_PRED_CAP
    fun_cap: int = Config.DEFAULT_FUN_CAP
    carrier_cap: int = Config.DEFAULT_CARRIER_CAP

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.int_lo > self.int_hi:
            raise ValueError(f"Empty int interval: {self.int_lo}..{self.int_hi}")
        if self.list_bound < 0:
            raise ValueError(f"List bound must be nonnegative: {self.list_bound}")
        for name in ('pred_cap', 'fun_cap', 'carrier_cap'):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    @property
    def int_range(self) -> range:
        return range(self.int_lo, self.int_hi + 1)

    @classmethod
    def from_config(cls) -> 'DomainConfig':
        return cls()

    def with_int_range(self, lo: int, hi: int) -> 'DomainConfig':
        """Copy with the int carrier set to lo..hi (validated)"""
        return replace(self, int_lo=lo, int_hi=hi)

    def to_dict(self) -> dict:
        return {
            'int_range': [self.int_lo, self.int_hi],
            'list_bound': self.list_bound,
            'pred_cap': self.pred_cap,
            'fun_cap': self.fun_cap,
            'carrier_cap': self.carrier_cap,
        }


# Example usage
if __name__ == "__main__":
    Config.setup_logging()
    print(f"Programs directory: {Config.PROGRAMS_DIR}")
    print(f"Default domain: {DomainConfig.from_config().to_dict()}")
    for path in Config.corpus_files():
        print(f"  - {path.name}")
