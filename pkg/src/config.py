"""
Run configuration (JSON) and annotator configuration (key-value text).
"""

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from src.exceptions import ConfigError
from src.utils import PathLike, load_config, logger

ZH_RULES: Tuple[str, ...] = (
    "marked", "lexical", "resultative", "topic_you", "topic_shi_de", "light_verb", "causative", "notional",
)
EN_PRECEDENCE_LABELS: Tuple[str, ...] = ("BE", "GET", "HAVE", "BECOME")
DEFAULT_VERB_TAG_PATTERN = r"^V"

REPORT_FORMATS = ("json", "md", "csv")
TOKENIZER_POLICIES = ("en_simple", "zh_char", "pretokenized")


@dataclass(frozen=True)
class AnnotatorConfig:
    """Rule precedence and the verb tag pattern used by the strategy annotator."""

    zh_precedence: Tuple[str, ...] = ZH_RULES
    en_precedence: Tuple[str, ...] = EN_PRECEDENCE_LABELS
    verb_tag_pattern: str = DEFAULT_VERB_TAG_PATTERN

    def __post_init__(self):
        _check_ordering(self.zh_precedence, ZH_RULES, "precedence.zh")
        _check_ordering(self.en_precedence, EN_PRECEDENCE_LABELS, "precedence.en")
        try:
            re.compile(self.verb_tag_pattern)
        except re.error as e:
            raise ConfigError(f"verb_tag_pattern is not a valid regex: {e}") from None

    @property
    def verb_tag_regex(self):
        return re.compile(self.verb_tag_pattern)


def _check_ordering(values: Tuple[str, ...], allowed: Tuple[str, ...], key: str) -> None:
    unknown = [value for value in values if value not in allowed]
    if unknown:
        raise ConfigError(f"{key}: unknown entries {unknown}; allowed: {', '.join(allowed)}")
    if len(set(values)) != len(values):
        raise ConfigError(f"{key}: entries must not repeat")
    if set(values) != set(allowed):
        missing = [value for value in allowed if value not in values]
        raise ConfigError(f"{key}: missing entries {missing}")


def load_annotator_config(path: Optional[PathLike]) -> AnnotatorConfig:
    """
    Load the annotator key-value file.

    Args:
        path: File with ``key = value`` lines and whole-line ``#`` comments; ``None`` gives the defaults

    Returns:
        AnnotatorConfig
    """
    if path is None:
        return AnnotatorConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"annotator config not found: {path}")

    values: Dict[str, str] = {}
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            # only whole-line comments: values such as verb_tag_pattern may contain '#'
            if not line or line.startswith("#"):
                continue
            key, separator, value = line.partition("=")
            key = key.strip()
            if not separator:
                raise ConfigError(f"{path}:{line_number}: expected 'key = value'")
            if key not in ("precedence.zh", "precedence.en", "verb_tag_pattern"):
                raise ConfigError(f"{path}:{line_number}: unknown key {key!r}")
            values[key] = value.strip()

    kwargs = {}
    if "precedence.zh" in values:
        kwargs["zh_precedence"] = tuple(v.strip() for v in values["precedence.zh"].split(",") if v.strip())
    if "precedence.en" in values:
        kwargs["en_precedence"] = tuple(v.strip().upper() for v in values["precedence.en"].split(",") if v.strip())
    if "verb_tag_pattern" in values:
        kwargs["verb_tag_pattern"] = values["verb_tag_pattern"]
    config = AnnotatorConfig(**kwargs)
    logger.info(f"Annotator precedence zh={','.join(config.zh_precedence)} en={','.join(config.en_precedence)}")
    return config


@dataclass(frozen=True)
class ParsedFileSpec:
    path: Path
    language: str


@dataclass(frozen=True)
class RunConfig:
    parsed_files: Tuple[ParsedFileSpec, ...]
    manifest: Path
    register_map: Path
    output_dir: Path
    annotator_config: Optional[Path] = None
    corrections: Optional[Path] = None
    subsets: Tuple[str, ...] = ()
    tokenizers: Dict[str, str] = field(default_factory=dict)
    formats: Tuple[str, ...] = ("json",)
    systems: Dict[str, Path] = field(default_factory=dict)


DEFAULT_TOKENIZERS = {
    "bleu_zh": "zh_char",
    "chrf_zh": "pretokenized",
    "en": "en_simple",
}


def _resolve(base: Path, value, key: str, must_exist: bool = True) -> Path:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{key} must be a non-empty path string")
    path = Path(value)
    if not path.is_absolute():
        path = base / path
    if must_exist and not path.exists():
        raise ConfigError(f"{key}: path does not exist: {path}")
    return path


def load_run_config(config_path: PathLike) -> RunConfig:
    """
    Load and validate a RunConfig JSON file.

    Args:
        config_path: JSON file; relative paths inside it resolve against its directory

    Returns:
        RunConfig with absolute paths
    """
    config_path = Path(config_path)
    raw = load_config(config_path)
    base = config_path.resolve().parent

    for key in ("parsed_files", "manifest", "register_map", "output_dir"):
        if key not in raw:
            raise ConfigError(f"{config_path}: missing required key {key!r}")

    parsed_files: List[ParsedFileSpec] = []
    for position, entry in enumerate(raw["parsed_files"]):
        if not isinstance(entry, dict) or "path" not in entry or "language" not in entry:
            raise ConfigError(f"parsed_files[{position}] needs 'path' and 'language'")
        if entry["language"] not in ("zh", "en"):
            raise ConfigError(f"parsed_files[{position}].language must be 'zh' or 'en'")
        parsed_files.append(ParsedFileSpec(_resolve(base, entry["path"], f"parsed_files[{position}].path"),
                                           entry["language"]))

    tokenizers = dict(DEFAULT_TOKENIZERS)
    for key, policy in raw.get("tokenizers", {}).items():
        if key not in DEFAULT_TOKENIZERS:
            raise ConfigError(f"tokenizers: unknown key {key!r}")
        if policy not in TOKENIZER_POLICIES:
            raise ConfigError(f"tokenizers.{key}: unknown policy {policy!r}")
        tokenizers[key] = policy

    formats = tuple(raw.get("formats", ["json"]))
    for report_format in formats:
        if report_format not in REPORT_FORMATS:
            raise ConfigError(f"formats: unknown format {report_format!r}")

    output_dir = _resolve(base, raw["output_dir"], "output_dir", must_exist=False)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"output_dir is not writable: {output_dir} ({e.strerror})") from None

    optional_paths = {}
    for key in ("annotator_config", "corrections"):
        if raw.get(key):
            optional_paths[key] = _resolve(base, raw[key], key)

    systems = {name: _resolve(base, path, f"systems.{name}") for name, path in raw.get("systems", {}).items()}

    return RunConfig(
        parsed_files=tuple(parsed_files),
        manifest=_resolve(base, raw["manifest"], "manifest"),
        register_map=_resolve(base, raw["register_map"], "register_map"),
        output_dir=output_dir,
        annotator_config=optional_paths.get("annotator_config"),
        corrections=optional_paths.get("corrections"),
        subsets=tuple(raw.get("subsets", ())),
        tokenizers=tokenizers,
        formats=formats,
        systems=systems,
    )
