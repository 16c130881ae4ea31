import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from gicdlc import fixtures


def emnist_paths():
    """Locate the EMNIST ByClass test files, if the environment provides them.

    Set GICDLC_DATA_DIR to a directory holding the idx3/idx1 files
    (gzipped or plain) to enable the dataset-dependent tests.
    """
    root = os.environ.get("GICDLC_DATA_DIR")
    if not root:
        return None
    candidates = [
        ("emnist-byclass-test-images-idx3-ubyte", "emnist-byclass-test-labels-idx1-ubyte"),
        ("emnist-byclass-test-images-idx3-ubyte.gz", "emnist-byclass-test-labels-idx1-ubyte.gz"),
    ]
    for img_name, lbl_name in candidates:
        img = os.path.join(root, img_name)
        lbl = os.path.join(root, lbl_name)
        if os.path.exists(img):
            return img, (lbl if os.path.exists(lbl) else None)
    return None


requires_emnist = pytest.mark.skipif(
    emnist_paths() is None,
    reason="EMNIST dataset not available (set GICDLC_DATA_DIR to the idx files)",
)


@pytest.fixture(scope="session")
def fixture_models():
    """Standard (ups, arm) fixture pair, levels=2, kernel=3."""
    return fixtures.fixture_pair(levels=2)


@pytest.fixture(scope="session")
def fixture_models_by_level():
    return {L: fixtures.fixture_pair(levels=L) for L in range(4)}


@pytest.fixture()
def rng():
    return np.random.default_rng(0xC0DEC)
