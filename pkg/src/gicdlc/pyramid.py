"""Multi-resolution image pyramid built by 2x2 average pooling.

The pyramid is the structural backbone of the codec: level 0 is the input
image, each coarser level halves both dimensions (ceil division) by
averaging 2x2 blocks with round-half-up.  Odd dimensions are handled by
replicating the last row / column before pooling, so every pixel of the
coarser level is the average of a full 2x2 block.
"""

import numpy as np

from .errors import DataFormatError


def as_image(arr) -> np.ndarray:
    """Validate and convert an array to a 2-D uint8 image.

    Accepts anything array-like holding integers in [0, 255].  Raises
    DataFormatError for wrong rank, empty images, or out-of-range values.
    """
    a = np.asarray(arr)
    if a.ndim != 2:
        raise DataFormatError(f"expected a 2-D image, got shape {a.shape}")
    if a.size == 0:
        raise DataFormatError("image has zero pixels")
    if a.dtype == np.uint8:
        return a
    if not np.issubdtype(a.dtype, np.integer):
        if np.issubdtype(a.dtype, np.floating) and np.all(a == np.floor(a)):
            a = a.astype(np.int64)
        else:
            raise DataFormatError(f"image dtype {a.dtype} is not integral")
    if a.min() < 0 or a.max() > 255:
        raise DataFormatError("pixel values outside [0, 255]")
    return a.astype(np.uint8)


def downsample_once(img: np.ndarray) -> np.ndarray:
    """Average-pool one level: 2x2 blocks, round half up, edge replication.

    Output shape is (ceil(H/2), ceil(W/2)).  Rounding is floor(x + 0.5),
    done in integer arithmetic as (sum + 2) >> 2 so there is no float
    round-to-even surprise.
    """
    img = as_image(img)
    h, w = img.shape
    if h % 2:
        img = np.concatenate([img, img[-1:, :]], axis=0)
    if w % 2:
        img = np.concatenate([img, img[:, -1:]], axis=1)
    s = img.astype(np.uint16)
    total = (
        s[0::2, 0::2].astype(np.uint32)
        + s[0::2, 1::2]
        + s[1::2, 0::2]
        + s[1::2, 1::2]
    )
    return ((total + 2) >> 2).astype(np.uint8)


def decompose(img: np.ndarray, levels: int) -> list[np.ndarray]:
    """Return [level0, level1, ..., levelL] with level0 == img.

    `levels` is the number of downsampling steps L; the list has L + 1
    entries.  Rejects L < 0 and pyramids that try to pool a 1x1 level.
    """
    img = as_image(img)
    if levels < 0:
        raise ValueError(f"levels must be >= 0, got {levels}")
    out = [img]
    for _ in range(levels):
        cur = out[-1]
        if cur.shape == (1, 1):
            raise ValueError(
                f"levels={levels} too deep for image of shape {img.shape}"
            )
        out.append(downsample_once(cur))
    return out


def level_shapes(shape: tuple[int, int], levels: int) -> list[tuple[int, int]]:
    """Shapes of decompose() output without touching pixel data."""
    h, w = shape
    if h < 1 or w < 1:
        raise DataFormatError(f"bad image shape {shape}")
    if levels < 0:
        raise ValueError(f"levels must be >= 0, got {levels}")
    out = [(h, w)]
    for _ in range(levels):
        if out[-1] == (1, 1):
            raise ValueError(f"levels={levels} too deep for shape {shape}")
        h, w = out[-1]
        out.append(((h + 1) // 2, (w + 1) // 2))
    return out
