from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def toy_dir() -> Path:
    return REPO_ROOT / "data" / "toy"


@pytest.fixture(scope="session")
def toy_manifest(toy_dir) -> Path:
    return toy_dir / "manifest.csv"


@pytest.fixture(scope="session")
def toy_embeddings(toy_dir) -> Path:
    return toy_dir / "embeddings.jsonl"


@pytest.fixture(scope="session")
def toy_config(toy_dir) -> Path:
    return toy_dir / "config.toml"
