"""Epoch/batch training loop with validation-based parameter selection.

Each epoch reshuffles the training set into ceil(M_tr / batch) batches and
takes one Adam step per batch; the gradient of a short final batch is the
mean over its actual size.  After every epoch the loss is evaluated on the
full validation set and the parameters with the smallest validation loss
seen so far are kept (strict improvement, ties keep the earlier epoch).

Metrics go to a CSV (header ``epoch,train_loss,val_loss,seconds,best``)
appended row by row so an interrupted run keeps its history.  Floats are
printed with 17 significant digits.  Wall time is measured by an
injectable ``timer`` so fully reproducible logs are possible.

LACM checkpoint format, version 1 (little-endian):

    magic "LACM", u16 version, u32 K (hidden layer count),
    u32 x (K+2) widths, u8 hidden activation tag, u8 output activation tag,
    per layer: weights row-major f64, bias f64,
    footer: u32 best epoch, f64 best validation loss.
"""

from __future__ import annotations

import math
import struct
import time
from dataclasses import dataclass

import numpy as np

from .neuralnet import (
    ACTIVATION_TAGS,
    TAG_ACTIVATIONS,
    LayerParams,
    NetworkParams,
    adam_step,
    backward_batch,
    forward_batch,
    init_adam,
    init_params,
    residual_norms,
)
from .rng import Xoshiro256StarStar

CHECKPOINT_MAGIC = b"LACM"
CHECKPOINT_VERSION = 1

CSV_HEADER = "epoch,train_loss,val_loss,seconds,best"


class CheckpointFormatError(ValueError):
    """Malformed or truncated LACM data."""


class TrainingDivergedError(RuntimeError):
    """Raised when a non-finite loss appears during training."""


@dataclass
class TrainConfig:
    epochs: int
    batch_size: int
    learning_rate: float
    widths: tuple[int, ...]
    seed: int
    split_ratio: float = 0.8

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"need at least one epoch, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be positive, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if not 0 < self.split_ratio < 1:
            raise ValueError(f"split ratio must be in (0, 1), got {self.split_ratio}")


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    val_loss: float
    seconds: float
    best: bool


def batch_partition(order: list[int], batch_size: int) -> list[list[int]]:
    """Cut a shuffled index list into ceil(len/batch) consecutive batches."""
    n = len(order)
    beta = math.ceil(n / batch_size)
    return [order[i * batch_size : (i + 1) * batch_size] for i in range(beta)]


def validate(params: NetworkParams, val_set, chunk: int = 512) -> float:
    """Mean residual norm over the validation set; no state is touched."""
    x, y = val_set
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"{x.shape[0]} inputs vs {y.shape[0]} targets")
    total = 0.0
    for i in range(0, x.shape[0], chunk):
        out, _ = forward_batch(params, x[i : i + chunk])
        total += float(np.sum(residual_norms(out, y[i : i + chunk])))
    return total / x.shape[0]


def _metrics_row(m: EpochMetrics) -> str:
    return (
        f"{m.epoch},{m.train_loss:.17g},{m.val_loss:.17g},"
        f"{m.seconds:.17g},{int(m.best)}"
    )


def train(
    train_set,
    val_set,
    cfg: TrainConfig,
    metrics_path=None,
    timer=time.perf_counter,
    log=None,
) -> tuple[NetworkParams, list[EpochMetrics]]:
    """Run the full training loop and return (best params, history)."""
    x_tr, y_tr = train_set
    x_val, y_val = val_set
    m_tr = x_tr.shape[0]
    if m_tr < 1 or x_val.shape[0] < 1:
        raise ValueError("training and validation sets must be nonempty")
    if cfg.batch_size > m_tr:
        raise ValueError(f"batch size {cfg.batch_size} exceeds training size {m_tr}")
    if x_tr.shape[1] != cfg.widths[0] or y_tr.shape[1] != cfg.widths[-1]:
        raise ValueError(
            f"data shapes ({x_tr.shape[1]} -> {y_tr.shape[1]}) do not match "
            f"widths ({cfg.widths[0]} -> {cfg.widths[-1]})"
        )

    rng = Xoshiro256StarStar(cfg.seed)
    params = init_params(cfg.widths, rng)
    adam = init_adam(params, cfg.learning_rate)

    if metrics_path is not None:
        with open(metrics_path, "w") as f:
            f.write(CSV_HEADER + "\n")

    best_params = params.copy()
    best_val = math.inf
    history: list[EpochMetrics] = []
    for epoch in range(1, cfg.epochs + 1):
        started = timer()
        order = list(range(m_tr))
        rng.shuffle(order)
        norm_sum = 0.0
        for b_idx, batch in enumerate(batch_partition(order, cfg.batch_size), start=1):
            xb = x_tr[batch]
            yb = y_tr[batch]
            out, cache = forward_batch(params, xb)
            norms = residual_norms(out, yb)
            batch_loss = float(np.mean(norms))
            if not math.isfinite(batch_loss):
                raise TrainingDivergedError(
                    f"non-finite loss {batch_loss} at epoch {epoch}, batch {b_idx}"
                )
            norm_sum += float(np.sum(norms))
            grads = backward_batch(params, cache, yb)
            params, adam = adam_step(params, grads, adam)
        train_loss = norm_sum / m_tr
        val_loss = validate(params, (x_val, y_val))
        if not math.isfinite(val_loss):
            raise TrainingDivergedError(
                f"non-finite validation loss {val_loss} at epoch {epoch}"
            )
        is_best = val_loss < best_val
        if is_best:
            best_val = val_loss
            best_params = params.copy()
        metrics = EpochMetrics(epoch, train_loss, val_loss, timer() - started, is_best)
        history.append(metrics)
        if metrics_path is not None:
            with open(metrics_path, "a") as f:
                f.write(_metrics_row(metrics) + "\n")
        if log is not None:
            star = " *" if is_best else ""
            log(
                f"epoch {epoch}/{cfg.epochs}  train {train_loss:.6f}  "
                f"val {val_loss:.6f}  {metrics.seconds:.1f}s{star}"
            )
    return best_params, history


def best_entry(history: list[EpochMetrics]) -> EpochMetrics:
    """The epoch whose parameters were kept (earliest strict minimum)."""
    if not history:
        raise ValueError("empty history")
    best = history[0]
    for m in history[1:]:
        if m.val_loss < best.val_loss:
            best = m
    return best


@dataclass
class Checkpoint:
    params: NetworkParams
    best_epoch: int
    best_val_loss: float


def checkpoint_to_bytes(params: NetworkParams, best_epoch: int, best_val_loss: float) -> bytes:
    k_hidden = len(params.widths) - 2
    parts = [
        CHECKPOINT_MAGIC,
        struct.pack("<HI", CHECKPOINT_VERSION, k_hidden),
        struct.pack(f"<{len(params.widths)}I", *params.widths),
        struct.pack(
            "<2B",
            ACTIVATION_TAGS[params.hidden_activation],
            ACTIVATION_TAGS[params.output_activation],
        ),
    ]
    for layer in params.layers:
        parts.append(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
    parts.append(struct.pack("<Id", best_epoch, best_val_loss))
    return b"".join(parts)


def save_checkpoint(params: NetworkParams, history: list[EpochMetrics], path) -> None:
    best = best_entry(history)
    with open(path, "wb") as f:
        f.write(checkpoint_to_bytes(params, best.epoch, best.val_loss))


def checkpoint_from_bytes(data: bytes) -> Checkpoint:
    pos = 0

    def take(n: int, what: str) -> bytes:
        nonlocal pos
        if pos + n > len(data):
            raise CheckpointFormatError(
                f"truncated checkpoint: wanted {n} bytes for {what} at offset {pos}"
            )
        chunk = data[pos : pos + n]
        pos += n
        return chunk

    magic = take(4, "magic")
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointFormatError(
            f"bad magic {magic!r} at offset 0, expected {CHECKPOINT_MAGIC!r}"
        )
    version, k_hidden = struct.unpack("<HI", take(6, "version/depth"))
    if version != CHECKPOINT_VERSION:
        raise CheckpointFormatError(
            f"unsupported checkpoint version {version}, expected {CHECKPOINT_VERSION}"
        )
    n_widths = k_hidden + 2
    widths = struct.unpack(f"<{n_widths}I", take(4 * n_widths, "widths"))
    hidden_tag, output_tag = struct.unpack("<2B", take(2, "activation tags"))
    if hidden_tag not in TAG_ACTIVATIONS or output_tag not in TAG_ACTIVATIONS:
        raise CheckpointFormatError(
            f"unknown activation tags ({hidden_tag}, {output_tag})"
        )
    layers = []
    for k in range(len(widths) - 1):
        rows, cols = widths[k + 1], widths[k]
        w = np.frombuffer(
            take(8 * rows * cols, f"weights of layer {k + 1}"), dtype="<f8"
        ).reshape(rows, cols)
        b = np.frombuffer(take(8 * rows, f"bias of layer {k + 1}"), dtype="<f8")
        layers.append(LayerParams(w.copy(), b.copy()))
    best_epoch, best_val = struct.unpack("<Id", take(12, "footer"))
    if pos != len(data):
        raise CheckpointFormatError(
            f"{len(data) - pos} unexpected trailing bytes at offset {pos}"
        )
    params = NetworkParams(
        layers, tuple(int(w) for w in widths),
        TAG_ACTIVATIONS[hidden_tag], TAG_ACTIVATIONS[output_tag],
    )
    return Checkpoint(params, best_epoch, best_val)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as f:
        return checkpoint_from_bytes(f.read())
