import json
import shutil
from pathlib import Path

import pytest

from src.corpus import index_sentences, load_manifest, load_parsed_file, load_register_map
from src.utils import get_mini_corpus_dir, read_tsv, teardown_logging


@pytest.fixture(autouse=True)
def _detach_log_handlers():
    yield
    teardown_logging()


@pytest.fixture(scope="session")
def mini_dir() -> Path:
    return get_mini_corpus_dir()


@pytest.fixture(scope="session")
def mini_sentences(mini_dir):
    return index_sentences(
        load_parsed_file(mini_dir / "zh.conllu", "zh"),
        load_parsed_file(mini_dir / "en.conllu", "en"),
    )


@pytest.fixture(scope="session")
def mini_pairs(mini_dir, mini_sentences):
    register_map = load_register_map(mini_dir / "register_map.tsv")
    return load_manifest(mini_dir / "manifest.tsv", register_map, mini_sentences)


@pytest.fixture(scope="session")
def golden_labels(mini_dir):
    rows = read_tsv(mini_dir / "golden_labels.tsv", ("sentence_id", "label"))
    return {row["sentence_id"]: row["label"] for row in rows}


@pytest.fixture
def mini_run(tmp_path, mini_dir) -> Path:
    """Copy of the mini-corpus whose run config writes into tmp_path/out."""
    data = tmp_path / "data"
    shutil.copytree(mini_dir, data)
    config_path = data / "config.json"
    config = json.loads(config_path.read_text(encoding="utf-8"))
    config["output_dir"] = str(tmp_path / "out")
    config_path.write_text(json.dumps(config, ensure_ascii=False, indent=2), encoding="utf-8")
    return config_path
