#!/usr/bin/env python3
"""
JSON Exporter - Export verification reports to versioned JSON
"""

import json
import logging
from pathlib import Path
from typing import Dict, Union

# Handle imports
try:
    from core.data_models import VerificationReport
except ModuleNotFoundError:
    import sys
    from pathlib import Path as PathLib
    sys.path.insert(0, str(PathLib(__file__).parent.parent))
    from core.data_models import VerificationReport

logger = logging.getLogger(__name__)


class JSONExporter:
    """
    Export a VerificationReport to JSON

    Keys are sorted and timings are omitted unless requested, so two runs
    over the same input give byte-identical documents.
    """

    def __init__(self, pretty: bool = True, include_timings: bool = False):
        """
        Initialize JSON Exporter

        Args:
            pretty: Pretty-print JSON with indentation
            include_timings: Include per-phase timings
        """
        self.pretty = pretty
        self.include_timings = include_timings

    def export_report(self, report: VerificationReport) -> str:
        """
        Export a report to a JSON string

        Args:
            report: Verification report

        Returns:
            JSON string
        """
        return self._dumps(report.to_dict(self.include_timings))

    def _dumps(self, data: Dict) -> str:
        indent = 2 if self.pretty else None
        return json.dumps(data, indent=indent, ensure_ascii=False, sort_keys=True)

    def save_to_file(self, data: Union[str, Dict, VerificationReport], filepath: Union[str, Path]):
        """
        Save JSON data to file

        Args:
            data: JSON string, dictionary or report
            filepath: Output file path
        """
        filepath = Path(filepath)
        filepath.parent.mkdir(parents=True, exist_ok=True)

        if isinstance(data, VerificationReport):
            data = self.export_report(data)
        elif isinstance(data, dict):
            data = self._dumps(data)

        with open(filepath, 'w', encoding='utf-8') as f:
            f.write(data)
            f.write("\n")

        logger.info(f"Saved JSON report to {filepath}")
        print(f"✓ Saved JSON to {filepath}")


def load_report_dict(filepath: Union[str, Path]) -> Dict:
    """Read back a saved report as a dictionary"""
    with open(filepath, 'r', encoding='utf-8') as f:
        return json.load(f)
