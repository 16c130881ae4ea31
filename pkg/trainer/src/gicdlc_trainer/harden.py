"""Turn a trained soft network into the discrete artifact the codec runs.

Wiring: each of a node's six inputs becomes the argmax of its connection
logits (ties break to the lowest index).  Truth table: all 64 binary
input combinations are pushed through the node's subnet at zero noise
and thresholded at sigmoid >= 0.5, i.e. pre-activation >= 0, with the
tie mapping to 1.
"""

import numpy as np
import torch

from .glc1 import HardModel
from .soft import SoftLutNetwork


def unsaturated_fraction(net: SoftLutNetwork,
                         lo: float = 0.4, hi: float = 0.6) -> float:
    """Fraction of nodes whose output can land near the 0.5 threshold.

    A node counts as unsaturated when any of its 64 exact binary input
    combinations puts the sigmoid inside [lo, hi]; those are the nodes
    where thresholding actually changes behaviour, so this bounds the
    soft/hard disagreement.  Well-annealed networks should report only
    a few percent.
    """
    total, unsat = 0, 0
    with torch.no_grad():
        for l in range(len(net.layer_sizes)):
            s = torch.sigmoid(net.binary_combo_z(l))   # (64, n)
            near = ((s >= lo) & (s <= hi)).any(dim=0)
            unsat += int(near.sum())
            total += s.shape[1]
    return unsat / total


def harden(net: SoftLutNetwork) -> HardModel:
    layer_inputs, layer_tables = [], []
    with torch.no_grad():
        for l in range(len(net.layer_sizes)):
            layer_inputs.append(net.wiring(l))
            z = net.binary_combo_z(l).cpu().numpy()   # (64, n)
            bits = (z >= 0.0).astype(np.uint64)
            table = np.zeros(net.layer_sizes[l], dtype=np.uint64)
            for t in range(64):
                table |= bits[t] << np.uint64(t)
            layer_tables.append(table)
    return HardModel(net.role, net.kernel, 1, net.levels,
                     layer_inputs, layer_tables, net.group_slices())
