import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))


@pytest.fixture
def seasonal_dataset():
    """300 行、2 特征的季节性合成序列，窗口 8。"""
    from sparsetime.pipeline.dataset import build_split_dataset
    from sparsetime.pipeline.synthetic import synth_series

    return build_split_dataset(synth_series("seasonal", 300, 2, seed=0), window=8, smooth_window=3)
