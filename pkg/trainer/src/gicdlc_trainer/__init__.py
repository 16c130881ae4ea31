"""Trainer for gicdlc lookup-table models.

Trains a continuous relaxation of the codec's UPS/ARM networks and
hardens the result into GLC1 model files the codec loads directly.
"""

from .data import TrainConfig, load_idx
from .glc1 import HardModel, load_model, save_model
from .harden import harden, unsaturated_fraction
from .soft import SoftLutNetwork, soft_forward
from .train import train_arm, train_ups

__all__ = [
    "TrainConfig", "load_idx", "HardModel", "load_model", "save_model",
    "harden", "unsaturated_fraction", "SoftLutNetwork", "soft_forward",
    "train_arm", "train_ups",
]
