from pathlib import Path

import pytest

from copa.kb import load_dataset

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def sample_dataset():
    return load_dataset(DATA / "sample_dataset.json")
