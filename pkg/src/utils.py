"""
Utility functions for logging, configuration loading, and TSV helpers.
"""

import csv
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from src.exceptions import ConfigError, CorpusFormatError

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger("passivelens")
logger.addHandler(logging.NullHandler())

PathLike = Union[str, Path]

# records logged with extra={FILE_ONLY: True} reach the run log but not stderr
FILE_ONLY = "file_only"


def setup_logging(log_path: Optional[PathLike] = None, verbose: bool = False) -> None:
    """
    Configure the package logger.

    Args:
        log_path: Optional run-log file; receives every INFO record with timestamps
        verbose: Whether stderr shows INFO records (WARNING otherwise)
    """
    teardown_logging()
    logger.setLevel(logging.INFO)
    formatter = logging.Formatter(LOG_FORMAT)

    stream_handler = logging.StreamHandler()
    stream_handler.setLevel(logging.INFO if verbose else logging.WARNING)
    stream_handler.setFormatter(formatter)
    stream_handler.addFilter(lambda record: not getattr(record, FILE_ONLY, False))
    logger.addHandler(stream_handler)

    if log_path is not None:
        log_path = Path(log_path)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path, encoding='utf-8')
        file_handler.setLevel(logging.INFO)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)


def teardown_logging() -> None:
    """Detach and close every handler added by setup_logging."""
    for handler in list(logger.handlers):
        if not isinstance(handler, logging.NullHandler):
            logger.removeHandler(handler)
            handler.close()


def get_project_root() -> Path:
    """Get the project root directory."""
    return Path(__file__).parent.parent


def get_mini_corpus_dir() -> Path:
    """Directory of the bundled hand-parsed mini-corpus."""
    return get_project_root() / "data" / "mini"


def load_config(config_path: PathLike = None) -> Dict[str, Any]:
    """Load configuration from JSON file."""
    if config_path is None:
        config_path = get_project_root() / "config.json"

    if not os.path.exists(config_path):
        raise ConfigError(f"config file not found: {config_path}")
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            config = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{config_path}: invalid JSON ({e.msg} at line {e.lineno})") from None
    if not isinstance(config, dict):
        raise ConfigError(f"{config_path}: top level must be a JSON object")
    return config


def read_tsv(path: PathLike, expected_header: Sequence[str], min_columns: Optional[int] = None) -> List[Dict[str, str]]:
    """
    Read a UTF-8 TSV file with a header row.

    Args:
        path: TSV file
        expected_header: Column names the header must start with
        min_columns: Number of leading columns every row must carry
            (defaults to the full header; trailing optional columns may be absent)

    Returns:
        One dict per data row, with ``_line`` holding the 1-based line number
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file not found: {path}")

    required = len(expected_header) if min_columns is None else min_columns
    rows: List[Dict[str, str]] = []
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f, delimiter='\t', quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if header is None:
            return rows
        header = [column.strip() for column in header]
        if not required <= len(header) <= len(expected_header) or header != list(expected_header)[:len(header)]:
            raise CorpusFormatError(
                f"unexpected header {header}, expected {list(expected_header)}", str(path), 1
            )
        for line_number, fields in enumerate(reader, start=2):
            if not fields or all(not field.strip() for field in fields):
                continue
            if len(fields) < required or len(fields) > len(expected_header):
                raise CorpusFormatError(
                    f"expected {required}-{len(expected_header)} columns, got {len(fields)}",
                    str(path), line_number,
                )
            row = {name: value.strip() for name, value in zip(expected_header, fields)}
            row['_line'] = str(line_number)
            rows.append(row)
    return rows


def _tsv_field(value: Any) -> str:
    text = "" if value is None else str(value)
    # fields never carry the delimiter or a line break
    return " ".join(text.replace("\t", " ").splitlines()) if ("\t" in text or "\n" in text or "\r" in text) else text


def write_tsv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write rows to a UTF-8 TSV file with ``\\n`` line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write("\t".join(header) + "\n")
        for row in rows:
            f.write("\t".join(_tsv_field(value) for value in row) + "\n")
    logger.info(f"Wrote {path}")
    return path


def write_json(path: PathLike, document: Any) -> Path:
    """Write a JSON document in insertion order with a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(document, f, ensure_ascii=False, indent=2)
        f.write('\n')
    logger.info(f"Wrote {path}")
    return path
