from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA


def case_path(name: str) -> Path:
    return DATA / f"pglib_opf_{name}.m"
