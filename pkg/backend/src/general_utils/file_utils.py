"""
File Utilities

Shared functions for locating, reading and atomically writing the toolkit's
files: simulation traces, detection logs, parameter documents and reports.
"""

import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable

import pandas as pd
from dotenv import load_dotenv

from .logger import get_logger

logger = get_logger("file_utils")

# =============================================================================
# Path Configuration
# =============================================================================

BASE_DIR = Path(__file__).resolve().parent.parent.parent.parent

# Load .env from project root before reading any TDCM_* variable
load_dotenv(BASE_DIR / ".env", override=False)

CONFIGS_DIR = BASE_DIR / "configs"
RESULTS_DIR = Path(os.environ.get("TDCM_OUTPUT_DIR", BASE_DIR / "results"))

TRACE_COLUMNS = ["t", "axis", "q_desired", "q_commanded", "y_true", "current", "branch_id"]
FLOAT_FORMAT = "%.9g"


def default_output_dir() -> Path:
    """Output directory from TDCM_OUTPUT_DIR (re-read so tests can override it)."""
    return Path(os.environ.get("TDCM_OUTPUT_DIR", RESULTS_DIR))


def ensure_dirs(*dirs: Path) -> None:
    """Ensure output directories exist."""
    for d in dirs:
        Path(d).mkdir(parents=True, exist_ok=True)


# =============================================================================
# Atomic Writing
# =============================================================================

def write_text_atomic(path: Path, text: str) -> Path:
    """
    Write text to `path` through a temporary file in the same directory.

    The final rename is atomic on POSIX and Windows, so readers never see a
    half-written file.
    """
    path = Path(path)
    ensure_dirs(path.parent)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug(f"Wrote {path} ({len(text)} chars)")
    return path


def write_csv_atomic(df: pd.DataFrame, path: Path, float_format: str = FLOAT_FORMAT) -> Path:
    """Serialize a DataFrame as CSV (no index, '\\n' line endings) and write it atomically."""
    text = df.to_csv(index=False, float_format=float_format, lineterminator="\n")
    return write_text_atomic(path, text)


def write_json_atomic(path: Path, payload: Any) -> Path:
    """Write a JSON document atomically (2-space indent, trailing newline)."""
    text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    return write_text_atomic(path, text)


def read_json(path: Path) -> Any:
    """Load a JSON document."""
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


# =============================================================================
# File Reading
# =============================================================================

TABLE_DELIMITERS = {".csv": ",", ".tsv": "\t"}


def detect_delimiter(file_path: str) -> str:
    """
    Delimiter of a trace or report table.

    .csv and .tsv files written here are fixed; any other extension (e.g. a
    .txt exported from a logger or spreadsheet) is sniffed from its header
    line, falling back to ','.
    """
    suffix = Path(file_path).suffix.lower()
    if suffix in TABLE_DELIMITERS:
        return TABLE_DELIMITERS[suffix]
    with open(file_path, 'r', encoding='utf-8') as f:
        header = f.readline()
    try:
        delimiter = csv.Sniffer().sniff(header, delimiters=',;\t').delimiter
    except csv.Error:
        logger.warning(f"Could not sniff the delimiter of {Path(file_path).name}, defaulting to ','")
        return ','
    logger.debug(f"Sniffed delimiter {delimiter!r} in {Path(file_path).name}")
    return delimiter


def read_tabular_file(file_path: str, required_columns: Iterable[str] = ()) -> pd.DataFrame:
    """
    Read a delimited text table and check that the required columns exist.

    Args:
        file_path: Path to a .csv / .tsv / .txt file
        required_columns: Columns that must be present

    Returns:
        DataFrame with the file contents

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If a required column is missing
    """
    logger.info(f"Reading tabular file: {file_path}")
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    delimiter = detect_delimiter(str(path))
    df = pd.read_csv(path, delimiter=delimiter)
    logger.info(f"Read {path.name}: {df.shape[0]} rows, {df.shape[1]} columns, delimiter='{delimiter}'")

    missing = [c for c in required_columns if c not in df.columns]
    if missing:
        raise ValueError(f"{path.name} is missing columns: {', '.join(missing)}")
    return df


def read_trace_file(file_path: str) -> pd.DataFrame:
    """Read a simulation trace CSV (columns as written by the plant simulator)."""
    return read_tabular_file(file_path, required_columns=TRACE_COLUMNS)


def list_result_files(results_dir: Path, pattern: str) -> list[Path]:
    """
    List files under `results_dir` matching a glob pattern, recursively and sorted.

    Returns:
        Sorted list of paths (empty if the directory does not exist)
    """
    results_dir = Path(results_dir)
    if not results_dir.exists():
        return []
    files = sorted(p for p in results_dir.rglob(pattern) if p.is_file())
    logger.debug(f"Found {len(files)} files matching {pattern} in {results_dir}")
    return files
