"""Soft relaxation of the lookup-table networks.

Each hard node (6 wires in, one truth-table bit out) is relaxed into a
small per-node subnet 6 -> 16 -> 8 -> 1 with tanh hidden layers, and the
discrete wiring is relaxed into a softmax mixture over the feeding
layer's activations, sharpened by the connection temperature.  During
training, logistic noise scaled by the node temperature is added to the
pre-activation before the sigmoid, pushing nodes to saturate so the
final thresholding loses as little as possible.

All nodes of one layer are evaluated together as batched einsums; a
layer is four weight tensors plus the connection logits.
"""

import math

import numpy as np
import torch

from .encoding import THRESHOLDS

FAN_IN = 6
GROUPS_BY_ROLE = {"UPS": 4, "ARM": 2}
Z_CLIP = 12.0


def _ste_clip(z: torch.Tensor) -> torch.Tensor:
    # cap pre-activations where the sigmoid is already saturated (about
    # 6e-6 from its rail) but keep the backward pass an identity: a node
    # that overshoots during the noisy phase stays recoverable instead
    # of freezing with a float-zero sigmoid gradient. The cap preserves
    # sign, so hardened truth tables are unaffected.
    return z + (z.clamp(-Z_CLIP, Z_CLIP) - z).detach()


class SoftLutNetwork(torch.nn.Module):
    """Differentiable stand-in for a HardModel, same geometry metadata."""

    def __init__(self, role: str, kernel: int, levels: int, layer_sizes,
                 seed: int = 0, hidden=(16, 8), dtype=torch.float32):
        super().__init__()
        if role not in GROUPS_BY_ROLE:
            raise ValueError(f"role must be UPS or ARM, got {role!r}")
        self.role = role
        self.kernel = int(kernel)
        self.levels = int(levels)
        self.layer_sizes = [int(n) for n in layer_sizes]
        self.input_width = self.kernel * self.kernel * THRESHOLDS
        self.n_groups = GROUPS_BY_ROLE[role]
        if self.layer_sizes[-1] % self.n_groups:
            raise ValueError(
                f"last layer size {self.layer_sizes[-1]} not divisible "
                f"into {self.n_groups} groups"
            )
        self.hidden = tuple(hidden)
        self.tau_connections = 1.0
        self.tau_node = 10.0

        g = torch.Generator().manual_seed(seed)
        h1, h2 = self.hidden

        def rand(*shape, scale=1.0):
            return torch.nn.Parameter(
                torch.randn(*shape, generator=g, dtype=dtype) * scale
            )

        self.conn_logits = torch.nn.ParameterList()
        self.w1, self.b1 = torch.nn.ParameterList(), torch.nn.ParameterList()
        self.w2, self.b2 = torch.nn.ParameterList(), torch.nn.ParameterList()
        self.w3, self.b3 = torch.nn.ParameterList(), torch.nn.ParameterList()
        feed = self.input_width
        for n in self.layer_sizes:
            self.conn_logits.append(rand(n, FAN_IN, feed))
            self.w1.append(rand(n, h1, FAN_IN, scale=1.0 / math.sqrt(FAN_IN)))
            self.b1.append(torch.nn.Parameter(torch.zeros(n, h1, dtype=dtype)))
            self.w2.append(rand(n, h2, h1, scale=1.0 / math.sqrt(h1)))
            self.b2.append(torch.nn.Parameter(torch.zeros(n, h2, dtype=dtype)))
            self.w3.append(rand(n, h2, scale=1.0 / math.sqrt(h2)))
            self.b3.append(torch.nn.Parameter(torch.zeros(n, dtype=dtype)))
            feed = n

    def group_slices(self) -> list:
        size = self.layer_sizes[-1] // self.n_groups
        return [(g * size, size) for g in range(self.n_groups)]

    def node_z(self, layer: int, six: torch.Tensor) -> torch.Tensor:
        """Subnet pre-activations for layer `layer`; six is (..., n, 6)."""
        a = torch.tanh(torch.einsum("noi,tni->tno", self.w1[layer], six)
                       + self.b1[layer])
        a = torch.tanh(torch.einsum("noi,tni->tno", self.w2[layer], a)
                       + self.b2[layer])
        z = torch.einsum("ni,tni->tn", self.w3[layer], a) + self.b3[layer]
        return _ste_clip(z)

    def forward(self, x: torch.Tensor, training: bool = False,
                generator=None) -> torch.Tensor:
        """Group averages for a batch of input bit vectors (as reals)."""
        if x.dim() == 1:
            x = x[None, :]
        if x.shape[-1] != self.input_width:
            raise ValueError(
                f"input has {x.shape[-1]} bits, network expects {self.input_width}"
            )
        acts = x
        for l in range(len(self.layer_sizes)):
            weights = torch.softmax(self.conn_logits[l] / self.tau_connections, dim=-1)
            six = torch.einsum("nkw,bw->bnk", weights, acts)
            z = self.node_z(l, six)
            if training:
                u = torch.rand(z.shape, generator=generator, dtype=z.dtype)
                u = u.clamp(1e-7, 1.0 - 1e-7)
                z = z + self.tau_node * (torch.log(u) - torch.log1p(-u))
            acts = torch.sigmoid(z)
        size = self.layer_sizes[-1] // self.n_groups
        return acts.reshape(acts.shape[0], self.n_groups, size).mean(dim=-1)

    def binary_combo_z(self, layer: int) -> torch.Tensor:
        """Pre-activations on all 64 exact binary input combinations.

        Returns (64, n) where row t feeds bit k of t into input k; this is
        the enumeration hardening stores as the truth table.
        """
        dtype = self.w3[layer].dtype
        combos = torch.tensor(
            [[(t >> k) & 1 for k in range(FAN_IN)] for t in range(64)], dtype=dtype
        )
        n = self.layer_sizes[layer]
        six = combos[:, None, :].expand(64, n, FAN_IN)
        return self.node_z(layer, six)

    def wiring(self, layer: int) -> np.ndarray:
        """Hard tap choices: argmax per connection-logit row, ties lowest."""
        logits = self.conn_logits[layer].detach().cpu().numpy()
        return np.argmax(logits, axis=-1).astype(np.int64)


def soft_forward(net: SoftLutNetwork, bits, training: bool = False, rng=None):
    """Functional wrapper: numpy bits in, numpy group averages out."""
    if isinstance(rng, int):
        rng = torch.Generator().manual_seed(rng)
    dtype = net.w3[0].dtype
    x = torch.as_tensor(np.asarray(bits), dtype=dtype)
    single = x.dim() == 1
    out = net(x, training=training, generator=rng)
    out = out.detach().cpu().numpy()
    return out[0] if single else out
