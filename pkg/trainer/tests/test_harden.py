import numpy as np
import pytest
import torch

from gicdlc_trainer import (SoftLutNetwork, harden, load_model, save_model,
                            unsaturated_fraction)
from conftest import wire_passthrough_bit0
from test_soft import _numpy_node_z

BIT0_TABLE = np.uint64(0xAAAAAAAAAAAAAAAA)  # entry t = t & 1


def test_passthrough_bit0_truth_table():
    net = SoftLutNetwork("ARM", 3, 0, (8,), seed=0)
    wire_passthrough_bit0(net, 0)
    hard = harden(net)
    assert (hard.layer_tables[0] == BIT0_TABLE).all()


def test_all_zero_subnet_ties_to_one():
    net = SoftLutNetwork("ARM", 3, 0, (8,), seed=0)
    with torch.no_grad():
        for p in net.parameters():
            p.zero_()
    hard = harden(net)
    # z = 0 exactly on every combination: sigmoid 0.5, tie maps to 1
    assert (hard.layer_tables[0] == np.uint64(0xFFFFFFFFFFFFFFFF)).all()


def test_wiring_ties_take_lowest_index():
    net = SoftLutNetwork("ARM", 3, 0, (8,), seed=0)
    with torch.no_grad():
        net.conn_logits[0].fill_(0.25)
    assert (harden(net).layer_inputs[0] == 0).all()


def test_wiring_matches_argmax(rng):
    net = SoftLutNetwork("UPS", 3, 1, (16, 8), seed=2)
    hard = harden(net)
    for layer in range(2):
        logits = net.conn_logits[layer].detach().numpy()
        np.testing.assert_array_equal(hard.layer_inputs[layer],
                                      logits.argmax(axis=-1))


def test_truth_tables_match_numpy_oracle():
    # exhaustive 64-way enumeration per node, subnet recomputed in numpy
    net = SoftLutNetwork("UPS", 3, 1, (16, 8), seed=5, dtype=torch.float64)
    hard = harden(net)
    for layer in range(2):
        n = net.layer_sizes[layer]
        for t in range(64):
            six = np.tile([(t >> k) & 1 for k in range(6)], (n, 1)).astype(float)
            z = _numpy_node_z(net, layer, six)
            want = (z >= 0.0).astype(np.uint64)
            got = (hard.layer_tables[layer] >> np.uint64(t)) & np.uint64(1)
            np.testing.assert_array_equal(got, want)


def test_harden_save_load_stable(tmp_path):
    net = SoftLutNetwork("ARM", 5, 2, (24, 8), seed=8)
    hard = harden(net)
    path = tmp_path / "m.glc"
    save_model(hard, path)
    back = load_model(path)
    assert back.serialize() == hard.serialize()
    assert back.role == "ARM" and back.kernel == 5 and back.levels == 2
    # hardening is deterministic: a second pass emits identical bytes
    assert harden(net).serialize() == hard.serialize()


def test_metadata_and_groups_copied():
    net = SoftLutNetwork("UPS", 3, 2, (16, 16), seed=1)
    hard = harden(net)
    assert hard.role == "UPS" and hard.channels == 1
    assert hard.kernel == 3 and hard.levels == 2
    assert hard.groups == [(0, 4), (4, 4), (8, 4), (12, 4)]


def test_unsaturated_fraction_counts_threshold_nodes():
    net = SoftLutNetwork("ARM", 3, 0, (16, 8), seed=12)
    wire_passthrough_bit0(net, 0)
    wire_passthrough_bit0(net, 1)
    # every node sits at |z| ~ 9, far outside the [0.4, 0.6] band
    assert unsaturated_fraction(net) == 0.0
    # zeroing four second-layer subnets parks them at sigmoid(0) = 0.5
    with torch.no_grad():
        for p in (net.w1[1], net.b1[1], net.w2[1], net.b2[1],
                  net.w3[1], net.b3[1]):
            p[:4] = 0.0
    assert unsaturated_fraction(net) == pytest.approx(4 / 24)


def test_unsaturated_fraction_all_zero_net_is_one():
    net = SoftLutNetwork("ARM", 3, 0, (8,), seed=0)
    with torch.no_grad():
        for p in net.parameters():
            p.zero_()
    assert unsaturated_fraction(net) == 1.0
