"""Node classification, accuracy counting, and P6 image rendering.

A node counts as lacuna when its score is <= 0 (reference fields use the
exact value -1).  Accuracy pools every node of every sample:

    accuracy = (# nodes labeled correctly) / (total # nodes).

Fields render as binary P6 pixmaps with a diverging color map
(-1 -> blue, 0 -> white, +1 -> red, linear per channel) and one pixel per
node, time increasing upward.  Rendering is a pure function of the values,
so identical fields give byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .oracle import PhiField, PsiField


class NodeLabel(Enum):
    LACUNA = "lacuna"
    NOT_LACUNA = "not_lacuna"


@dataclass(frozen=True)
class EvalReport:
    """Pooled confusion counts over all nodes of all compared samples."""

    accuracy: float
    correct_lacuna: int
    correct_not: int
    false_lacuna: int
    missed_lacuna: int
    nodes_total: int


def classify(v: float) -> NodeLabel:
    """Score threshold: lacuna iff v <= 0 (0 itself counts as lacuna)."""
    if not math.isfinite(v):
        raise ValueError(f"cannot classify non-finite score {v}")
    return NodeLabel.LACUNA if v <= 0 else NodeLabel.NOT_LACUNA


def _values(f) -> np.ndarray:
    if isinstance(f, (PhiField, PsiField)):
        return f.values
    return np.asarray(f)


def _pair_counts(pred, ref) -> tuple[int, int, int, int]:
    p = _values(pred).astype(np.float64)
    r = _values(ref)
    if p.shape != r.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {r.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("non-finite prediction values")
    pred_lac = p <= 0
    ref_lac = r == -1
    return (
        int(np.sum(pred_lac & ref_lac)),
        int(np.sum(~pred_lac & ~ref_lac)),
        int(np.sum(pred_lac & ~ref_lac)),
        int(np.sum(~pred_lac & ref_lac)),
    )


def accuracy(preds, refs) -> EvalReport:
    """Pooled accuracy of predictions against +-1 references."""
    if isinstance(preds, (PhiField, PsiField)) or (
        hasattr(preds, "ndim") and getattr(preds, "ndim", 0) == 2
    ):
        preds, refs = [preds], [refs]
    if len(preds) != len(refs):
        raise ValueError(f"{len(preds)} predictions vs {len(refs)} references")
    if len(preds) == 0:
        raise ValueError("nothing to evaluate")
    cl = cn = fl = ml = 0
    for p, r in zip(preds, refs):
        a, b, c, d = _pair_counts(p, r)
        cl += a
        cn += b
        fl += c
        ml += d
    total = cl + cn + fl + ml
    return EvalReport((cl + cn) / total, cl, cn, fl, ml, total)


def per_sample_accuracy(preds, refs) -> float:
    """Mean over samples of each sample's own node accuracy."""
    if len(preds) != len(refs) or len(preds) == 0:
        raise ValueError("need matching, nonempty prediction/reference lists")
    accs = []
    for p, r in zip(preds, refs):
        a, b, c, d = _pair_counts(p, r)
        accs.append((a + b) / (a + b + c + d))
    return float(np.mean(accs))


def format_report(report: EvalReport) -> str:
    lines = [
        f"nodes total      : {report.nodes_total}",
        f"correct lacuna   : {report.correct_lacuna}",
        f"correct non-lac. : {report.correct_not}",
        f"false lacuna     : {report.false_lacuna}",
        f"missed lacuna    : {report.missed_lacuna}",
        f"pooled accuracy  : {report.accuracy:.6f}",
    ]
    return "\n".join(lines)


def report_record(report: EvalReport, per_sample: float | None = None) -> str:
    """Single-line machine-readable key=value record."""
    rec = (
        f"accuracy={report.accuracy:.17g} correct_lacuna={report.correct_lacuna} "
        f"correct_not={report.correct_not} false_lacuna={report.false_lacuna} "
        f"missed_lacuna={report.missed_lacuna} nodes_total={report.nodes_total}"
    )
    if per_sample is not None:
        rec += f" per_sample_accuracy={per_sample:.17g}"
    return rec


def diverging_rgb(values: np.ndarray) -> np.ndarray:
    """Map values in [-1, 1] to RGB: blue -> white -> red, linear."""
    v = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(v)) or np.any(np.abs(v) > 1):
        raise ValueError("renderable values must be finite in [-1, 1]")
    low = np.clip(v, None, 0.0) + 1.0  # 0 at v=-1, 1 at v>=0
    high = 1.0 - np.clip(v, 0.0, None)  # 1 at v<=0, 0 at v=+1
    rgb = np.empty(v.shape + (3,), dtype=np.uint8)
    rgb[..., 0] = np.floor(255.0 * low + 0.5)
    rgb[..., 1] = np.floor(255.0 * np.minimum(low, high) + 0.5)
    rgb[..., 2] = np.floor(255.0 * high + 0.5)
    return rgb


def write_ppm(path, rgb: np.ndarray) -> None:
    """Write an 8-bit binary P6 pixmap, rows top to bottom."""
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise ValueError("expected a (height, width, 3) uint8 array")
    height, width = rgb.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        f.write(rgb.tobytes())


def render_field(field, path, scale: int = 1) -> None:
    """Render a field to a P6 file, t upward, one scale^2 block per node."""
    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    values = _values(field).astype(np.float64)
    # values[j, n]: j spatial (image column), n time (bottom row = first level)
    rgb = diverging_rgb(values.T[::-1, :])
    if scale > 1:
        rgb = rgb.repeat(scale, axis=0).repeat(scale, axis=1)
    write_ppm(path, rgb)


PANEL_SUFFIXES = ("_ref.ppm", "_nn.ppm", "_qf.ppm", "_diff.ppm")


def render_panel(phi, psi_ref, psi_nn, path_prefix, scale: int = 1) -> list[str]:
    """Render the four standard views; returns the written paths.

    The difference view shows (reference - prediction), rescaled from
    [-2, 2] onto the same color map.
    """
    ref_v = _values(psi_ref).astype(np.float64)
    nn_v = _values(psi_nn).astype(np.float64)
    if ref_v.shape != nn_v.shape:
        raise ValueError(f"shape mismatch {ref_v.shape} vs {nn_v.shape}")
    prefix = str(path_prefix)
    paths = [prefix + s for s in PANEL_SUFFIXES]
    render_field(psi_ref, paths[0], scale)
    render_field(psi_nn, paths[1], scale)
    render_field(phi, paths[2], scale)
    diff = (ref_v - nn_v) / 2.0
    render_field(diff, paths[3], scale)
    return paths
