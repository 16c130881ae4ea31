"""Training loops for the upsampler and the autoregressive model.

One seeded numpy generator drives all sampling and one seeded torch
generator drives the logistic noise, so a run is reproducible end to
end: same seed, same platform, same loss curve.  The optimizer is Adam
at the configured learning rate; both temperatures follow step-decay
schedules clamped at their configured endpoints.

The ARM is trained against a hardened upsampler so that it optimizes
for exactly the priors the decoder will compute.
"""

import numpy as np
import torch

from .data import SampleSource, TrainConfig, arm_batch, tau_at, ups_batch
from .glc1 import HardModel
from .losses import mse_loss, rate_loss
from .soft import SoftLutNetwork


def _check(cfg: TrainConfig):
    bad = cfg.validate()
    if bad:
        raise ValueError("; ".join(bad))


def _loop(net: SoftLutNetwork, src: SampleSource, cfg: TrainConfig,
          batch_fn, loss_fn, seed: int):
    rng = np.random.default_rng(seed)
    gen = torch.Generator().manual_seed(seed)
    opt = torch.optim.Adam(net.parameters(), lr=cfg.lr,
                           betas=(cfg.adam_beta1, cfg.adam_beta2))
    records = []
    for it in range(cfg.iterations):
        net.tau_connections = tau_at(cfg.tau_conn_start, cfg.tau_conn_end, it, cfg)
        net.tau_node = tau_at(cfg.tau_node_start, cfg.tau_node_end, it, cfg)
        ctxs, targets = batch_fn(src, rng)
        avgs = net(torch.from_numpy(ctxs), training=True, generator=gen)
        loss = loss_fn(avgs, torch.from_numpy(targets))
        opt.zero_grad()
        loss.backward()
        opt.step()
        records.append({
            "iteration": it,
            "loss": float(loss.detach()),
            "tau_node": net.tau_node,
            "tau_connections": net.tau_connections,
        })
    return records


def train_ups(images: np.ndarray, cfg: TrainConfig):
    """Fit the soft upsampler; returns (network, per-iteration records)."""
    _check(cfg)
    if cfg.levels < 1:
        raise ValueError("upsampler training needs at least one pyramid level")
    if min(images.shape[1:]) < 2 ** cfg.levels:
        raise ValueError(f"images smaller than {2 ** cfg.levels} per side")
    net = SoftLutNetwork("UPS", cfg.kernel, cfg.levels, cfg.layer_sizes,
                         seed=cfg.seed, hidden=cfg.hidden)
    src = SampleSource(images, cfg)
    records = _loop(net, src, cfg, ups_batch, mse_loss, cfg.seed)
    return net, records


def train_arm(images: np.ndarray, ups_hard: HardModel, cfg: TrainConfig):
    """Fit the soft ARM against a hardened upsampler's priors.

    With levels = 0 no upsampler is consulted and ups_hard may be None.
    Returns (network, per-iteration records).
    """
    _check(cfg)
    if cfg.levels > 0 and ups_hard is None:
        raise ValueError("levels > 0 needs a hardened upsampler for priors")
    net = SoftLutNetwork("ARM", cfg.kernel, cfg.levels, cfg.layer_sizes,
                         seed=cfg.seed + 1, hidden=cfg.hidden)
    src = SampleSource(images, cfg, ups=ups_hard)
    records = _loop(net, src, cfg, arm_batch, rate_loss, cfg.seed + 1)
    return net, records
