#!/usr/bin/env python3
"""Run the acceptance suite, printing one PASS/FAIL line per criterion.

Exit status is nonzero when any criterion fails.
"""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(pytest.main([
        str(ROOT / "tests" / "test_acceptance.py"), "-q", "-s", "--no-header",
    ]))
