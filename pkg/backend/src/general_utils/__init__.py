from .logger import get_logger, set_console_level
from .file_utils import (
    # Path configuration
    BASE_DIR,
    CONFIGS_DIR,
    RESULTS_DIR,
    TRACE_COLUMNS,
    FLOAT_FORMAT,
    default_output_dir,
    ensure_dirs,
    # Atomic writing
    write_text_atomic,
    write_csv_atomic,
    write_json_atomic,
    read_json,
    # File reading
    detect_delimiter,
    read_tabular_file,
    read_trace_file,
    list_result_files,
)

__all__ = [
    # Logger
    "get_logger",
    "set_console_level",
    # Paths
    "BASE_DIR",
    "CONFIGS_DIR",
    "RESULTS_DIR",
    "TRACE_COLUMNS",
    "FLOAT_FORMAT",
    "default_output_dir",
    "ensure_dirs",
    # Atomic writing
    "write_text_atomic",
    "write_csv_atomic",
    "write_json_atomic",
    "read_json",
    # File reading
    "detect_delimiter",
    "read_tabular_file",
    "read_trace_file",
    "list_result_files",
]
