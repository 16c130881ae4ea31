"""Command line trainer: fits a soft network, hardens it, writes GLC1.

    gicdlc-train ups  DATA.idx OUT.glc [options]
    gicdlc-train arm  DATA.idx UPS.glc OUT.glc [options]

Training-log records (iteration, loss, temperatures) stream to --log as
JSON lines when requested.
"""

import argparse
import json
import sys

from .data import TrainConfig, load_idx
from .glc1 import load_model, save_model
from .harden import harden, unsaturated_fraction
from .train import train_arm, train_ups


def _sizes(text: str) -> tuple:
    return tuple(int(p) for p in text.split(","))


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--kernel", type=int, default=None)
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--layers", type=_sizes, default=None,
                   help="comma-separated layer sizes, e.g. 1024,1024")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--limit", type=int, default=0,
                   help="train on only the first N dataset images")
    p.add_argument("--no-augment", action="store_true")
    p.add_argument("--log", default=None, help="write JSONL training records here")


def _config(args) -> TrainConfig:
    cfg = TrainConfig()
    for name in ("iterations", "batch", "lr", "kernel", "levels", "seed"):
        value = getattr(args, name)
        if value is not None:
            setattr(cfg, name, value)
    if args.layers is not None:
        cfg.layer_sizes = args.layers
    if args.no_augment:
        cfg.augment = False
    cfg.total_samples = cfg.batch * cfg.iterations
    return cfg


def _finish(net, records, out_path, log_path):
    save_model(harden(net), out_path)
    if log_path:
        with open(log_path, "w") as f:
            for rec in records:
                f.write(json.dumps(rec) + "\n")
    unsat = unsaturated_fraction(net)
    print(f"wrote {out_path} after {len(records)} iterations "
          f"(final loss {records[-1]['loss']:.4f}, "
          f"{100.0 * unsat:.2f}% of nodes unsaturated)", file=sys.stderr)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gicdlc-train")
    sub = parser.add_subparsers(dest="command", required=True)

    u = sub.add_parser("ups", help="train and harden an upsampler")
    u.add_argument("data")
    u.add_argument("output")
    _add_common(u)

    a = sub.add_parser("arm", help="train and harden an autoregressive model")
    a.add_argument("data")
    a.add_argument("ups_model")
    a.add_argument("output")
    _add_common(a)

    args = parser.parse_args(argv)
    try:
        images = load_idx(args.data)
        if args.limit:
            images = images[:args.limit]
        cfg = _config(args)
        if args.command == "ups":
            net, records = train_ups(images, cfg)
        else:
            ups_hard = load_model(args.ups_model) if cfg.levels > 0 else None
            net, records = train_arm(images, ups_hard, cfg)
        _finish(net, records, args.output, args.log)
        return 0
    except (OSError, ValueError) as e:
        print(f"gicdlc-train: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
