"""
Shared pytest setup: import paths, isolated log/output directories and the
small scenario documents used by the experiment and CLI tests.
"""

import json
import os
import sys
import tempfile
from pathlib import Path

import pytest

BACKEND_DIR = Path(__file__).resolve().parent.parent

# Log and output directories must be set before general_utils is imported
_SESSION_DIR = Path(tempfile.mkdtemp(prefix="tdcm-tests-"))
os.environ.setdefault("TDCM_LOG_DIR", str(_SESSION_DIR / "logs"))
os.environ.setdefault("TDCM_OUTPUT_DIR", str(_SESSION_DIR / "results"))

sys.path.insert(0, str(BACKEND_DIR / "src"))
sys.path.insert(0, str(BACKEND_DIR))


BENT_45 = [{"length_mm": 800.0}, {"r_mm": 150.0, "alpha_deg": 45.0, "theta_deg": 0.0}]
BENT_90 = [{"length_mm": 700.0}, {"r_mm": 150.0, "alpha_deg": 90.0, "theta_deg": 0.0}]
STRAIGHT = [{"length_mm": 1000.0}]


def scenario_doc(name: str, segments: list[dict], **overrides) -> dict:
    """A fast periodic scenario (three 5 s cycles, two trials)."""
    doc = {
        "name": name,
        "shape": {"segments": segments},
        "dof": "one_ap",
        "input": {"kind": "periodic", "amplitudes_deg": [60.0], "frequencies_hz": [0.2], "duration_s": 15.0},
        "controllers": ["NoCompensation", "CompensationOnly", "CompensationShift"],
        "trials": 2,
        "seed": 11,
    }
    doc.update(overrides)
    return doc


@pytest.fixture
def write_config(tmp_path):
    """Write {"scenarios": [...]} to a temp file and return its path."""
    def _write(*scenarios: dict, filename: str = "scenarios.json") -> Path:
        path = tmp_path / filename
        path.write_text(json.dumps({"scenarios": list(scenarios)}, indent=2), encoding="utf-8")
        return path
    return _write


GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture
def golden():
    """
    Compare a written file byte for byte with tests/golden/<name>.

    TDCM_UPDATE_GOLDEN=1 records the file instead; a file never recorded skips.
    """
    update = os.environ.get("TDCM_UPDATE_GOLDEN") == "1"

    def _check(actual: Path, name: str) -> None:
        expected = GOLDEN_DIR / name
        if update:
            expected.write_bytes(Path(actual).read_bytes())
            return
        if not expected.exists():
            pytest.skip(f"golden/{name} not recorded (TDCM_UPDATE_GOLDEN=1 pytest records it)")
        assert Path(actual).read_bytes() == expected.read_bytes()
    return _check
