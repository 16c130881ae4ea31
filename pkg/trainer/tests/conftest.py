import os
import shutil
import struct
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def rng():
    return np.random.default_rng(0x7A41)


def write_idx(images: np.ndarray) -> bytes:
    images = np.asarray(images, dtype=np.uint8)
    return struct.pack(">IIII", 0x00000803, *images.shape) + images.tobytes()


requires_codec_cli = pytest.mark.skipif(
    shutil.which("gicdlc") is None,
    reason="gicdlc codec CLI not on PATH",
)


def wire_passthrough_bit0(net, layer):
    """Make every node's subnet sign-follow its first selected input.

    z = 10 * tanh(2 * tanh(2 * (b0 - 0.5))): about +9.1 when bit 0 is 1
    and -9.1 when it is 0, so the node output is saturated on every one
    of the 64 binary combinations.
    """
    import torch

    with torch.no_grad():
        net.w1[layer].zero_()
        net.b1[layer].zero_()
        net.w2[layer].zero_()
        net.b2[layer].zero_()
        net.w3[layer].zero_()
        net.b3[layer].zero_()
        net.w1[layer][:, 0, 0] = 2.0
        net.b1[layer][:, 0] = -1.0
        net.w2[layer][:, 0, 0] = 2.0
        net.w3[layer][:, 0] = 10.0


def full_run_gates():
    """The full-scale reproduction needs datasets and hours of compute.

    Returns (data_dir, enabled); tests using it skip unless both the
    dataset directory and the opt-in flag are present.
    """
    return os.environ.get("GICDLC_DATA_DIR"), os.environ.get("GICDLC_TRAINER_FULL") == "1"
