"""Command-line interface: generate / train / eval / render / oracle.

Every flag has a reproducible default matching the reference experiment
setup, can be overridden by an environment variable ``LACUNET_<DEST>``
(upper-cased flag name, e.g. ``LACUNET_MAX_RADIUS``), and is echoed in the
resolved-config block printed before any work starts.  Explicit flags win
over environment values, which win over defaults.

Exit codes: 0 success, 1 runtime/format/I-O error, 2 flag parse error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import dataset as ds
from . import evaluate as ev
from . import oracle, trainer
from .grid import DomainConfig, build_grid
from .neuralnet import forward_batch
from .rng import Xoshiro256StarStar, derive_seed

# Stream indices for subcommands that need several independent streams.
SPLIT_STREAM = 1

_DOMAIN_DEFAULTS = {
    "xmin": -20.0, "xmax": 20.0, "tmax": 20.0,
    "q_xmin": -10.0, "q_xmax": 10.0, "q_tmin": 0.0, "q_tmax": 10.0,
    "wave_speed": 1.0, "nx": 64, "nt": 64,
}


def _add_domain_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("domain")
    g.add_argument("--xmin", type=float, default=_DOMAIN_DEFAULTS["xmin"],
                   help="left spatial bound of the computational box")
    g.add_argument("--xmax", type=float, default=_DOMAIN_DEFAULTS["xmax"],
                   help="right spatial bound")
    g.add_argument("--tmax", type=float, default=_DOMAIN_DEFAULTS["tmax"],
                   help="final time")
    g.add_argument("--q-xmin", type=float, default=_DOMAIN_DEFAULTS["q_xmin"],
                   help="left bound of the source box")
    g.add_argument("--q-xmax", type=float, default=_DOMAIN_DEFAULTS["q_xmax"],
                   help="right bound of the source box")
    g.add_argument("--q-tmin", type=float, default=_DOMAIN_DEFAULTS["q_tmin"],
                   help="start time of the source box")
    g.add_argument("--q-tmax", type=float, default=_DOMAIN_DEFAULTS["q_tmax"],
                   help="end time of the source box")
    g.add_argument("--wave-speed", type=float, default=_DOMAIN_DEFAULTS["wave_speed"],
                   help="characteristic speed c")
    g.add_argument("--nx", type=int, default=_DOMAIN_DEFAULTS["nx"],
                   help="spatial node count")
    g.add_argument("--nt", type=int, default=_DOMAIN_DEFAULTS["nt"],
                   help="time node count")


def _domain_from_args(args) -> DomainConfig:
    return DomainConfig(
        a=args.xmin, b=args.xmax, T=args.tmax,
        a1=args.q_xmin, b1=args.q_xmax, T0=args.q_tmin, T1=args.q_tmax,
        c=args.wave_speed, Nx=args.nx, Nt=args.nt,
    )


def _add_gen_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-disks", type=int, default=1,
                   help="smallest disk count per support")
    p.add_argument("--max-disks", type=int, default=4,
                   help="largest disk count per support")
    p.add_argument("--max-radius", type=float, default=5.0,
                   help="upper bound of the uniform radius draw")


def _parse_disk(text: str) -> oracle.Disk:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"disk must be cx,ct,r (three comma-separated numbers), got {text!r}"
        )
    try:
        cx, ct, r = (float(v) for v in parts)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad disk {text!r}: {e}") from None
    return oracle.Disk(cx, ct, r)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lacunet",
        description="Label, learn, and render wave-equation lacunae on a 1D space-time grid.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = {"formatter_class": argparse.ArgumentDefaultsHelpFormatter}

    p_gen = sub.add_parser("generate", help="generate a labeled dataset (LACD file)", **fmt)
    _add_domain_flags(p_gen)
    _add_gen_flags(p_gen)
    p_gen.add_argument("--samples", type=int, default=10000, help="number of samples")
    p_gen.add_argument("--seed", type=int, default=42, help="master generation seed")
    p_gen.add_argument("--threads", type=int, default=1,
                       help="worker threads (output is thread-count independent)")
    p_gen.add_argument("--out", required=True, help="output LACD path")

    p_tr = sub.add_parser("train", help="train a network on a LACD file", **fmt)
    p_tr.add_argument("--data", required=True, help="input LACD path")
    p_tr.add_argument("--epochs", type=int, default=200, help="training epochs")
    p_tr.add_argument("--batch", type=int, default=32, help="batch size")
    p_tr.add_argument("--lr", type=float, default=1e-4, help="Adam learning rate")
    p_tr.add_argument("--layers", type=int, default=3, help="hidden layer count")
    p_tr.add_argument("--width", type=int, default=256, help="hidden layer width")
    p_tr.add_argument("--split", type=float, default=0.8, help="training fraction")
    p_tr.add_argument("--seed", type=int, default=7, help="split/init/shuffle seed")
    p_tr.add_argument("--out", required=True, help="output LACM checkpoint path")
    p_tr.add_argument("--metrics", default=None, help="per-epoch metrics CSV path")
    p_tr.add_argument("--zero-timing", action="store_true",
                      help="write 0 in the CSV seconds column (reproducible logs)")

    p_ev = sub.add_parser("eval", help="evaluate a checkpoint on test data", **fmt)
    _add_domain_flags(p_ev)
    _add_gen_flags(p_ev)
    p_ev.add_argument("--model", required=True, help="LACM checkpoint path")
    p_ev.add_argument("--data", default=None,
                      help="stored LACD test set (overrides --test-samples)")
    p_ev.add_argument("--test-samples", type=int, default=1000,
                      help="freshly generated test sample count")
    p_ev.add_argument("--seed", type=int, default=99, help="test generation seed")
    p_ev.add_argument("--threads", type=int, default=1,
                      help="worker threads (output is thread-count independent)")

    p_rd = sub.add_parser("render", help="render reference/prediction panels for one support", **fmt)
    _add_domain_flags(p_rd)
    p_rd.add_argument("--model", required=True, help="LACM checkpoint path")
    p_rd.add_argument("--disk", action="append", type=_parse_disk, required=True,
                      metavar="CX,CT,R", help="support disk, repeatable")
    p_rd.add_argument("--out-prefix", required=True, help="output path prefix")
    p_rd.add_argument("--pixel-size", type=int, default=4, help="pixels per node")

    p_or = sub.add_parser("oracle", help="render reference fields without a network", **fmt)
    _add_domain_flags(p_or)
    p_or.add_argument("--disk", action="append", type=_parse_disk, required=True,
                      metavar="CX,CT,R", help="support disk, repeatable")
    p_or.add_argument("--out-prefix", required=True, help="output path prefix")
    p_or.add_argument("--secondary", action="store_true",
                      help="also render the secondary-lacuna field")
    p_or.add_argument("--pixel-size", type=int, default=4, help="pixels per node")
    return parser


def _apply_env_overrides(parser: argparse.ArgumentParser) -> None:
    """Rewrite subparser defaults from LACUNET_<DEST> environment variables."""
    for action in parser._subparsers._group_actions[0].choices.values():
        for a in action._actions:
            if a.dest in ("help", "command"):
                continue
            env = os.environ.get(f"LACUNET_{a.dest.upper()}")
            if env is None:
                continue
            if isinstance(a.const, bool) or isinstance(a.default, bool):
                a.default = env.lower() in ("1", "true", "yes", "on")
            elif a.type is not None:
                a.default = a.type(env)
            else:
                a.default = env


def _print_config(args) -> None:
    print("resolved configuration:")
    for key in sorted(vars(args)):
        if key == "command":
            continue
        print(f"  {key} = {getattr(args, key)}")
    if hasattr(args, "seed"):
        print(f"seed in effect: {args.seed}")


def _cmd_generate(args) -> int:
    grid = build_grid(_domain_from_args(args))
    data = ds.generate(
        grid, args.samples, args.min_disks, args.max_disks,
        args.max_radius, args.seed, threads=args.threads,
    )
    ds.save_dataset(data, args.out)
    print(f"wrote {len(data.samples)} samples to {args.out}")
    return 0


def _cmd_train(args) -> int:
    data = ds.load_dataset(args.data)
    x, y = ds.inputs_targets(data)
    m = x.shape[0]
    widths = (
        x.shape[1],
        *([args.width] * args.layers),
        y.shape[1],
    )
    cfg = trainer.TrainConfig(
        epochs=args.epochs, batch_size=args.batch, learning_rate=args.lr,
        widths=widths, seed=args.seed, split_ratio=args.split,
    )
    split_rng = Xoshiro256StarStar(derive_seed(args.seed, SPLIT_STREAM))
    idx = ds.split(m, args.split, split_rng)
    tr = np.array(idx.train_idx) - 1
    va = np.array(idx.val_idx) - 1
    print(f"training on {len(tr)} samples, validating on {len(va)}")
    kwargs = {"timer": lambda: 0.0} if args.zero_timing else {}
    best, history = trainer.train(
        (x[tr], y[tr]), (x[va], y[va]), cfg,
        metrics_path=args.metrics, log=print, **kwargs,
    )
    trainer.save_checkpoint(best, history, args.out)
    top = trainer.best_entry(history)
    print(f"kept epoch {top.epoch} (validation loss {top.val_loss:.6f}) in {args.out}")
    return 0


def _load_model_for_grid(path, grid):
    ckpt = trainer.load_checkpoint(path)
    want_in = grid.nx_sub * grid.nt_sub
    want_out = grid.Nx * grid.Nt
    if ckpt.params.widths[0] != want_in or ckpt.params.widths[-1] != want_out:
        raise ValueError(
            f"checkpoint maps {ckpt.params.widths[0]} -> {ckpt.params.widths[-1]} "
            f"but the grid needs {want_in} -> {want_out}"
        )
    return ckpt


def _cmd_eval(args) -> int:
    if args.data is not None:
        data = ds.load_dataset(args.data)
        grid = data.grid
    else:
        grid = build_grid(_domain_from_args(args))
        data = ds.generate(
            grid, args.test_samples, args.min_disks, args.max_disks,
            args.max_radius, args.seed, threads=args.threads,
        )
    ckpt = _load_model_for_grid(args.model, grid)
    x, y = ds.inputs_targets(data)
    preds = []
    for i in range(0, x.shape[0], 512):
        out, _ = forward_batch(ckpt.params, x[i : i + 512])
        preds.append(out)
    pred_rows = np.concatenate(preds)
    report = ev.accuracy(list(pred_rows), list(y))
    per_sample = ev.per_sample_accuracy(list(pred_rows), list(y))
    print(ev.format_report(report))
    print(f"per-sample mean   : {per_sample:.6f}")
    print(ev.report_record(report, per_sample))
    return 0


def _cmd_render(args) -> int:
    grid = build_grid(_domain_from_args(args))
    ckpt = _load_model_for_grid(args.model, grid)
    support = oracle.SourceSupport.for_grid(grid, args.disk)
    phi = oracle.build_phi(grid, support)
    psi_ref = oracle.build_psi(grid, support)
    vec = ds.flatten_phi(phi).astype(np.float64)
    out, _ = forward_batch(ckpt.params, vec[None, :])
    psi_nn = ds.unflatten_psi(out[0], grid)
    paths = ev.render_panel(phi, psi_ref, psi_nn, args.out_prefix, scale=args.pixel_size)
    for p in paths:
        print(f"wrote {p}")
    return 0


def _cmd_oracle(args) -> int:
    grid = build_grid(_domain_from_args(args))
    support = oracle.SourceSupport.for_grid(grid, args.disk)
    phi = oracle.build_phi(grid, support)
    psi_ref = oracle.build_psi(grid, support)
    prefix = args.out_prefix
    written = [prefix + "_qf.ppm", prefix + "_ref.ppm"]
    ev.render_field(phi, written[0], scale=args.pixel_size)
    ev.render_field(psi_ref, written[1], scale=args.pixel_size)
    if args.secondary:
        sec = oracle.build_psi_secondary(grid, support)
        written.append(prefix + "_secondary.ppm")
        ev.render_field(sec, written[2], scale=args.pixel_size)
    for p in written:
        print(f"wrote {p}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "render": _cmd_render,
    "oracle": _cmd_oracle,
}


def run(argv=None) -> int:
    parser = build_parser()
    _apply_env_overrides(parser)
    args = parser.parse_args(argv)
    _print_config(args)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, trainer.TrainingDivergedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
