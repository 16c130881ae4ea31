"""Lossless grayscale image codec built from hardened lookup-table networks.

Images are decomposed into a resolution pyramid by 2x2 average pooling.
Decoding walks the pyramid coarse to fine: an upsampling network predicts
each finer level from the coarser one, and an autoregressive network
refines those predictions pixel by pixel into discretized Laplace
distributions that drive a bit-exact rANS entropy coder.  Encoding
simulates the decoder and writes the symbol stream in reverse.
"""

from .codec import (
    BitstreamContainer,
    CodecConfig,
    decode_image,
    encode_image,
    global_decode_order,
    parse_container,
    predict_ups_level,
    theoretical_report,
)
from .errors import (
    ContainerError,
    CorruptStreamError,
    DataFormatError,
    GicdlcError,
    ModelFormatError,
    ModelMismatchError,
)
from .lutnet import HardLutNetwork, load_model, save_model
from .pyramid import decompose, downsample_once

__version__ = "0.1.0"

__all__ = [
    "BitstreamContainer",
    "CodecConfig",
    "ContainerError",
    "CorruptStreamError",
    "DataFormatError",
    "GicdlcError",
    "HardLutNetwork",
    "ModelFormatError",
    "ModelMismatchError",
    "decode_image",
    "decompose",
    "downsample_once",
    "encode_image",
    "global_decode_order",
    "load_model",
    "parse_container",
    "predict_ups_level",
    "save_model",
    "theoretical_report",
    "__version__",
]
