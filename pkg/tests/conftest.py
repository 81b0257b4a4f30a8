import sys
from pathlib import Path

import numpy as np
import pytest

from xq.tabular import ColumnMeta, from_columns

MODELS_DIR = Path(__file__).parent / "models"
LINE_MODEL = [sys.executable, str(MODELS_DIR / "line_model.py")]
GOLDEN_DIR = Path(__file__).parent / "golden"


def numeric_dataset(name, target=None, **cols):
    """Dataset from keyword column arrays, all numeric."""
    entries = [(ColumnMeta(key, "numeric"), np.asarray(vals, dtype=np.float64))
               for key, vals in cols.items()]
    return from_columns(name, entries, target=target)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
