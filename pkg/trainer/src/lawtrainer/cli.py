"""Command line for the offline pipeline: sample the law, fit the network,
export the weight file."""

from __future__ import annotations

import argparse
import sys

from .dataset import DatasetSpec, generate_dataset
from .training import TrainSpec, TrainingDiverged, export_weight_file, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lawtrainer", description=__doc__)
    parser.add_argument("--out", required=True, help="weight file to write")
    parser.add_argument("--seed", type=int, default=0)
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("--noise", dest="noise", action="store_true",
                       default=True)
    noise.add_argument("--no-noise", dest="noise", action="store_false",
                       help="sample the law exactly (uses a longer patience)")
    parser.add_argument("--points", type=int, default=1000)
    parser.add_argument("--eps-limit", type=float, default=0.0054)
    parser.add_argument("--y0", type=float, default=2e11)
    parser.add_argument("--p", type=float, default=1e-4)
    parser.add_argument("--learning-rate", type=float, default=6e-5)
    parser.add_argument("--max-epochs", type=int, default=10_000)
    parser.add_argument("--patience", type=int, default=None,
                        help="early-stopping patience (default 1000 noisy, "
                             "5000 noise-free)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    patience = args.patience
    if patience is None:
        patience = 1_000 if args.noise else 5_000
    dataset_spec = DatasetSpec(n_points=args.points, eps_limit=args.eps_limit,
                               y0=args.y0, p=args.p, noise=args.noise,
                               seed=args.seed)
    train_spec = TrainSpec(learning_rate=args.learning_rate,
                           max_epochs=args.max_epochs, patience=patience,
                           seed=args.seed)
    points = generate_dataset(dataset_spec)
    try:
        result = train(points, train_spec)
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    doc = export_weight_file(result, args.out, y0=args.y0)
    n_params = sum(len(layer["b"]) * (len(layer["w"][0]) + 1)
                   for layer in doc["layers"])
    print(f"wrote {args.out}: {len(doc['layers'])} layers, {n_params} "
          f"parameters, train/val loss {result.train_loss:.3e}/"
          f"{result.val_loss:.3e} after {result.epochs_run} epochs")
    return 0


if __name__ == "__main__":
    sys.exit(main())
