"""Training-corpus generation, splitting, flattening, and LACD file I/O.

A dataset is a list of (Phi, Psi, support) samples over one grid.  Samples
are generated from independent per-sample streams (master seed XOR the
1-based sample index), so any sample can be regenerated in isolation and
generation order does not matter.

LACD binary format, version 1 (all little-endian):

    magic   "LACD"
    u16     format version
    u32 x5  M, Nx, Nt, nx_sub, nt_sub
    f64 x9  a, b, T, a1, b1, T0, T1, c, max_radius
    u64     seed
    u8 x2   min_disks, max_disks
    per sample:
        u8      disk count I
        f64 x3  cx, ct, r        (I times)
        i8      Phi entries, sub-grid flattening order
        i8      Psi entries, full-grid flattening order

Flattening order (frozen in the format): spatial index major, time index
fastest, i.e. element ``(l - 1) * nt_sub + (p - 1)`` holds node (l, p).
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grid import DomainConfig, GridSpec, build_grid
from .oracle import (
    Disk,
    PhiField,
    PsiField,
    SourceSupport,
    build_phi,
    build_psi,
    sample_support,
)
from .rng import Xoshiro256StarStar, derive_seed

MAGIC = b"LACD"
FORMAT_VERSION = 1


class DatasetFormatError(ValueError):
    """Malformed or truncated LACD data."""


@dataclass(eq=False)
class Sample:
    phi: PhiField
    psi: PsiField
    support: SourceSupport


@dataclass(eq=False)
class Dataset:
    grid: GridSpec
    min_disks: int
    max_disks: int
    max_radius: float
    seed: int
    samples: list[Sample]

    def __post_init__(self):
        if len(self.samples) < 1:
            raise ValueError("dataset needs at least one sample")


@dataclass
class SplitIndices:
    """Disjoint 1-based index lists covering 1..M."""

    train_idx: list[int]
    val_idx: list[int]


def make_sample(
    grid: GridSpec,
    min_disks: int,
    max_disks: int,
    max_radius: float,
    seed: int,
    index: int,
) -> Sample:
    """Build sample ``index`` (1-based) of the stream for ``seed``."""
    rng = Xoshiro256StarStar(derive_seed(seed, index))
    support = sample_support(rng, min_disks, max_disks, max_radius, grid)
    return Sample(build_phi(grid, support), build_psi(grid, support), support)


def generate(
    grid: GridSpec,
    m_samples: int,
    min_disks: int,
    max_disks: int,
    max_radius: float,
    seed: int,
    threads: int = 1,
) -> Dataset:
    """Generate M samples; identical output for any thread count."""
    if m_samples < 1:
        raise ValueError(f"need at least one sample, got {m_samples}")

    def job(m: int) -> Sample:
        return make_sample(grid, min_disks, max_disks, max_radius, seed, m)

    indices = range(1, m_samples + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(job, indices))
    else:
        samples = [job(m) for m in indices]
    return Dataset(grid, min_disks, max_disks, max_radius, seed, samples)


def split(m: int, ratio: float, rng: Xoshiro256StarStar) -> SplitIndices:
    """Shuffle 1..M and cut at round(ratio * M) (half away from zero)."""
    if not 0 < ratio < 1:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    n_train = int(math.floor(ratio * m + 0.5))
    if n_train == 0 or n_train == m:
        raise ValueError(f"degenerate split: {n_train}/{m - n_train} of {m}")
    perm = list(range(1, m + 1))
    rng.shuffle(perm)
    return SplitIndices(perm[:n_train], perm[n_train:])


def flatten_phi(phi: PhiField) -> np.ndarray:
    """Sub-grid field to vector, spatial-major / time-fastest order."""
    return phi.values.reshape(-1)


def flatten_psi(psi: PsiField) -> np.ndarray:
    """Full-grid field to vector, same ordering rule as flatten_phi."""
    return psi.values.reshape(-1)


def unflatten_phi(v: np.ndarray, grid: GridSpec) -> PhiField:
    """Inverse of flatten_phi for the given grid."""
    expected = grid.nx_sub * grid.nt_sub
    if v.size != expected:
        raise ValueError(f"expected {expected} entries, got {v.size}")
    return PhiField(np.asarray(v).reshape(grid.nx_sub, grid.nt_sub))


def unflatten_psi(v: np.ndarray, grid: GridSpec) -> PsiField:
    """Inverse of flatten_psi for the given grid."""
    expected = grid.Nx * grid.Nt
    if v.size != expected:
        raise ValueError(f"expected {expected} entries, got {v.size}")
    return PsiField(np.asarray(v).reshape(grid.Nx, grid.Nt))


_HEADER = struct.Struct("<5I9dQ2B")


def dataset_to_bytes(d: Dataset) -> bytes:
    g = d.grid
    parts = [
        MAGIC,
        struct.pack("<H", FORMAT_VERSION),
        _HEADER.pack(
            len(d.samples), g.Nx, g.Nt, g.nx_sub, g.nt_sub,
            g.a, g.b, g.T, g.a1, g.b1, g.T0, g.T1, g.c, d.max_radius,
            d.seed, d.min_disks, d.max_disks,
        ),
    ]
    for s in d.samples:
        disks = s.support.disks
        if len(disks) > 255:
            raise ValueError("more than 255 disks in one sample")
        parts.append(struct.pack("<B", len(disks)))
        for dk in disks:
            parts.append(struct.pack("<3d", dk.cx, dk.ct, dk.r))
        parts.append(flatten_phi(s.phi).astype("<i1").tobytes())
        parts.append(flatten_psi(s.psi).astype("<i1").tobytes())
    return b"".join(parts)


def save_dataset(d: Dataset, path) -> None:
    with open(path, "wb") as f:
        f.write(dataset_to_bytes(d))


class _Reader:
    """Cursor over a byte string that reports the offset of any shortfall."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise DatasetFormatError(
                f"truncated file: wanted {n} bytes for {what} at offset {self.pos}, "
                f"only {len(self.data) - self.pos} left"
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk


def dataset_from_bytes(data: bytes) -> Dataset:
    r = _Reader(data)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise DatasetFormatError(
            f"bad magic {magic!r} at offset 0, expected {MAGIC!r}"
        )
    (version,) = struct.unpack("<H", r.take(2, "version"))
    if version != FORMAT_VERSION:
        raise DatasetFormatError(
            f"unsupported format version {version}, expected {FORMAT_VERSION}"
        )
    fields = _HEADER.unpack(r.take(_HEADER.size, "header"))
    m, nx, nt, nxs, nts = fields[:5]
    a, b, T, a1, b1, T0, T1, c, max_radius = fields[5:14]
    seed, min_disks, max_disks = fields[14:]
    try:
        grid = build_grid(DomainConfig(a, b, T, a1, b1, T0, T1, c, nx, nt))
    except ValueError as e:
        raise DatasetFormatError(f"header holds an invalid domain: {e}") from e
    if (grid.nx_sub, grid.nt_sub) != (nxs, nts):
        raise DatasetFormatError(
            f"header sub-grid {nxs}x{nts} disagrees with rebuilt "
            f"{grid.nx_sub}x{grid.nt_sub}"
        )
    if m < 1:
        raise DatasetFormatError("sample count must be at least 1")

    phi_n = nxs * nts
    psi_n = nx * nt
    samples = []
    for i in range(m):
        (count,) = struct.unpack("<B", r.take(1, f"disk count of sample {i + 1}"))
        if count < 1:
            raise DatasetFormatError(f"sample {i + 1} has no disks")
        disks = []
        for _ in range(count):
            cx, ct, rad = struct.unpack("<3d", r.take(24, f"disk of sample {i + 1}"))
            try:
                disks.append(Disk(cx, ct, rad))
            except ValueError as e:
                raise DatasetFormatError(f"sample {i + 1}: {e}") from e
        phi_raw = np.frombuffer(r.take(phi_n, f"Phi of sample {i + 1}"), dtype="<i1")
        psi_raw = np.frombuffer(r.take(psi_n, f"Psi of sample {i + 1}"), dtype="<i1")
        try:
            phi = unflatten_phi(phi_raw, grid)
            psi = unflatten_psi(psi_raw, grid)
        except ValueError as e:
            raise DatasetFormatError(f"sample {i + 1}: {e}") from e
        samples.append(Sample(phi, psi, SourceSupport.for_grid(grid, disks)))
    if r.pos != len(data):
        raise DatasetFormatError(
            f"{len(data) - r.pos} unexpected trailing bytes at offset {r.pos}"
        )
    return Dataset(grid, min_disks, max_disks, max_radius, seed, samples)


def load_dataset(path) -> Dataset:
    with open(path, "rb") as f:
        return dataset_from_bytes(f.read())


def inputs_targets(d: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Stack flattened fields into float64 (M, in) and (M, out) arrays."""
    x = np.stack([flatten_phi(s.phi) for s in d.samples]).astype(np.float64)
    y = np.stack([flatten_psi(s.psi) for s in d.samples]).astype(np.float64)
    return x, y
