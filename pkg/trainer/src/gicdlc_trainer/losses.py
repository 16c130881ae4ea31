"""Training losses.

The upsampler minimizes mean squared error between its 255-scaled group
averages and the true 2x2 block pixels.  The autoregressive model
minimizes the expected code length: the negative log2 probability of
the true pixel under a Laplace density discretized over unit intervals,
tails folded into 0 and 255 - the same distribution the codec feeds to
its entropy coder, kept differentiable through mu and b.
"""

import torch

AVG_EPS = 1.0 / 1024.0
PROB_FLOOR = 1e-22


def mse_loss(avgs: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """avgs (b, 4) in [0,1]; targets (b, 4) in intensity units."""
    return ((255.0 * avgs - targets) ** 2).mean()


def _ste_clamp(x: torch.Tensor, lo: float, hi: float) -> torch.Tensor:
    # hard clamp in the forward pass, identity in the backward pass; a
    # plain clamp has zero gradient once saturated, which permanently
    # freezes scale nodes that overshoot during the noisy warmup
    return x + (x.clamp(lo, hi) - x).detach()


def laplace_params(avgs: torch.Tensor):
    """Map ARM group averages (b, 2) to (mu, b) per sample."""
    mu = 255.0 * avgs[:, 0]
    y = _ste_clamp(avgs[:, 1], AVG_EPS, 1.0 - AVG_EPS)
    return mu, y / (1.0 - y)


def _laplace_cdf(t: torch.Tensor, mu: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    d = (t - mu) / b
    # evaluate each branch on a clamped argument so the unused side
    # cannot overflow and poison the backward pass
    lo = 0.5 * torch.exp(d.clamp(max=0.0))
    hi = 1.0 - 0.5 * torch.exp(-d.clamp(min=0.0))
    return torch.where(d < 0.0, lo, hi)


def laplace_bits(mu: torch.Tensor, b: torch.Tensor, values: torch.Tensor) -> torch.Tensor:
    """-log2 of the discretized-Laplace mass at each integer value."""
    v = values.to(mu.dtype)
    right = torch.where(values >= 255, torch.ones_like(mu),
                        _laplace_cdf(v + 0.5, mu, b))
    left = torch.where(values <= 0, torch.zeros_like(mu),
                       _laplace_cdf(v - 0.5, mu, b))
    p = (right - left).clamp(min=PROB_FLOOR)
    return -torch.log2(p)


def rate_loss(avgs: torch.Tensor, values: torch.Tensor) -> torch.Tensor:
    """Mean theoretical bits per pixel for a batch of ARM outputs."""
    mu, b = laplace_params(avgs)
    return laplace_bits(mu, b, values).mean()
