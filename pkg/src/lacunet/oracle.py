"""Ground-truth labeling: random disk sources and characteristic-ray hits.

A source support is a union of disks in the (x, t) plane clipped to the box
``[a1, b1] x [0, T1]``. Two indicator fields are derived from it:

* ``Phi`` marks which sub-grid nodes lie inside the support (+1) or not (-1).
* ``Psi`` marks, for every full-grid node, whether the two backward rays
  ``xi = x_j +- c (tau - t_n)``, ``tau <= t_n``, pass within ``dx`` of some
  support node at some sub-grid time level (+1 = reached by the waves,
  -1 = lacuna).

Hit-test arithmetic
-------------------
On the uniform mesh the ray test reduces to an inequality on index offsets:
with ``rho = c * dt / dx``,

    |(j - l_full) +- rho * (p_full - n)| < 1.

Whenever ``rho`` is rational in the mesh quantities (for example the
default geometry has ``rho = 1/2``) the quantity can land exactly on the
boundary, where the strict ``<`` must resolve to a miss.  Floating-point
evaluation would break such ties unpredictably, so the predicate is
evaluated in exact integer arithmetic over the dyadic rationals the config
floats denote.  This keeps the labels deterministic, exactly symmetric
under x-reflection of symmetric configs, and provably nested (secondary
lacuna inside the combined one).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .grid import GridSpec
from .rng import Xoshiro256StarStar


class DegenerateSupportError(ValueError):
    """Raised when an operation needs at least one support node and has none."""


@dataclass(frozen=True)
class Disk:
    """Closed disk in the (x, t) plane: (x-cx)^2 + (t-ct)^2 <= r^2."""

    cx: float
    ct: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"disk radius must be positive, got {self.r}")


@dataclass(frozen=True)
class SourceSupport:
    """Union of disks intersected with the clip box [a1, b1] x [0, T1]."""

    disks: tuple[Disk, ...]
    x_min: float
    x_max: float
    t_min: float
    t_max: float

    def __post_init__(self):
        if len(self.disks) < 1:
            raise ValueError("support needs at least one disk")

    @classmethod
    def for_grid(cls, grid: GridSpec, disks) -> "SourceSupport":
        return cls(tuple(disks), grid.a1, grid.b1, 0.0, grid.T1)


@dataclass(frozen=True, eq=False)
class PhiField:
    """Sub-grid source indicator, shape (nx_sub, nt_sub), int8 entries +-1."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValueError("Phi must be a 2-D array")
        if not np.all(np.abs(self.values) == 1):
            raise ValueError("Phi entries must be +-1")


@dataclass(frozen=True, eq=False)
class PsiField:
    """Full-grid lacuna indicator, shape (Nx, Nt).

    Reference fields hold int8 entries +-1 (-1 = lacuna); network outputs
    hold real values in (-1, 1).
    """

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValueError("Psi must be a 2-D array")
        if np.issubdtype(self.values.dtype, np.integer):
            if not np.all(np.abs(self.values) == 1):
                raise ValueError("reference Psi entries must be +-1")
        else:
            v = self.values
            if not np.all(np.isfinite(v)) or np.any(np.abs(v) > 1):
                raise ValueError("real Psi entries must be finite in [-1, 1]")


def contains(s: SourceSupport, x: float, t: float) -> bool:
    """Point membership: inside the clip box and inside some disk (closed)."""
    if not (s.x_min <= x <= s.x_max and s.t_min <= t <= s.t_max):
        return False
    for d in s.disks:
        ddx = x - d.cx
        ddt = t - d.ct
        if ddx * ddx + ddt * ddt <= d.r * d.r:
            return True
    return False


def sample_support(
    rng: Xoshiro256StarStar,
    min_disks: int,
    max_disks: int,
    max_radius: float,
    grid: GridSpec,
) -> SourceSupport:
    """Draw a random support: disk count, then cx, ct, r per disk.

    The disk count is uniform on {min_disks..max_disks}; centers are uniform
    over [a1, b1] x [0, T1] and radii uniform on (0, max_radius).  Draw
    order is fixed (count, then per disk cx, ct, r) so a given seed always
    produces the same support; a zero radius draw is redrawn.
    """
    if not 1 <= min_disks <= max_disks:
        raise ValueError(f"need 1 <= min_disks <= max_disks, got {min_disks}, {max_disks}")
    if not max_radius > 0:
        raise ValueError(f"max radius must be positive, got {max_radius}")
    count = rng.randint(min_disks, max_disks)
    disks = []
    for _ in range(count):
        cx = rng.uniform(grid.a1, grid.b1)
        ct = rng.uniform(0.0, grid.T1)
        r = rng.uniform(0.0, max_radius)
        while r == 0.0:
            r = rng.uniform(0.0, max_radius)
        disks.append(Disk(cx, ct, r))
    return SourceSupport.for_grid(grid, disks)


def build_phi(grid: GridSpec, s: SourceSupport) -> PhiField:
    """Evaluate the source indicator on every sub-grid node."""
    xs = grid.sub_x_coords()[:, None]
    ts = grid.sub_t_coords()[None, :]
    inside = np.zeros((grid.nx_sub, grid.nt_sub), dtype=bool)
    for d in s.disks:
        ddx = xs - d.cx
        ddt = ts - d.ct
        inside |= ddx * ddx + ddt * ddt <= d.r * d.r
    inside &= (xs >= s.x_min) & (xs <= s.x_max)
    inside &= (ts >= s.t_min) & (ts <= s.t_max)
    return PhiField(np.where(inside, 1, -1).astype(np.int8))


# --- exact ray predicate -------------------------------------------------

def _exact_ratio(grid: GridSpec) -> Fraction:
    """rho = c * dt / dx over the exact rationals the config floats denote."""
    dx = (Fraction(grid.b) - Fraction(grid.a)) / (grid.Nx - 1)
    dt = Fraction(grid.T) / (grid.Nt - 1)
    return Fraction(grid.c) * dt / dx


def ray_offset_hit(rho: Fraction, dj: int, dp: int) -> bool:
    """Exact test |dj + rho*dp| < 1 or |dj - rho*dp| < 1 (strict).

    ``dj = j - l_full`` is the spatial index offset from the source node to
    the ray vertex; ``dp = p_full - n <= 0`` the time level offset.
    """
    p, q = rho.numerator, rho.denominator
    lhs = dj * q
    rhs = dp * p
    return abs(lhs + rhs) < q or abs(lhs - rhs) < q


def secondary_offset_inside(rho: Fraction, dj: int, dn: int) -> bool:
    """Exact test c*(t_n - tau) - |x_j - xi| >= dx with t_n > tau.

    ``dn = n - p_full`` is the time offset above the source node, ``dj`` the
    spatial offset; the margin of one mesh step keeps the discrete
    secondary lacuna nested inside the combined one.
    """
    if dn <= 0:
        return False
    p, q = rho.numerator, rho.denominator
    return dn * p - abs(dj) * q >= q


class RayTable:
    """Per-grid precomputation mapping source indicators to hit counts.

    ``matrix`` has one row per full-grid node and one column per sub-grid
    node; entry 1 marks pairs where a backward ray from the full node
    passes within dx of the sub node at its own time level.  Hit counts
    are then a single matrix product per sample (exact in float32: counts
    never exceed the sub-grid size, far below 2**24).
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        rho = _exact_ratio(grid)
        nx, nt = grid.Nx, grid.Nt
        nxs, nts = grid.nx_sub, grid.nt_sub
        j1_0, n1_0 = grid.j1 - 1, grid.n1 - 1

        # Offset lookup over all (dj, dp) the grid can realize.
        dj_off = nx - 1  # lut index = dj + dj_off
        lut = np.zeros((2 * nx - 1, nt), dtype=bool)  # [dj + off, -dp]
        for dj in range(-(nx - 1), nx):
            for ndp in range(nt):
                lut[dj + dj_off, ndp] = ray_offset_hit(rho, dj, -ndp)

        matrix = np.zeros((nx * nt, nxs * nts), dtype=np.float32)
        j_full = np.arange(nx)[:, None]  # target spatial index (0-based)
        l_full = (j1_0 + np.arange(nxs))[None, :]  # source spatial (0-based)
        dj_idx = j_full - l_full + dj_off  # (nx, nxs)
        for n0 in range(nt):
            for p0 in range(nts):
                pf0 = n1_0 + p0
                if pf0 > n0:
                    continue  # rays only reach levels at or below t_n
                hits = lut[dj_idx, n0 - pf0]  # (nx, nxs)
                rows = (np.arange(nx) * nt + n0)[:, None]
                cols = (np.arange(nxs) * nts + p0)[None, :]
                matrix[rows, cols] = hits
        self.matrix = matrix

    def hit_mask(self, phi: PhiField) -> np.ndarray:
        """Boolean (Nx, Nt) mask of nodes whose rays meet the support."""
        src = (phi.values.reshape(-1) > 0).astype(np.float32)
        counts = self.matrix @ src
        return (counts > 0.5).reshape(self.grid.Nx, self.grid.Nt)


@lru_cache(maxsize=8)
def _ray_table(grid: GridSpec) -> RayTable:
    return RayTable(grid)


def ray_hit(grid: GridSpec, phi: PhiField, j: int, n: int) -> bool:
    """Does either backward ray from node (j, n) meet a support node?

    Checks every sub-grid level ``t_p <= t_n`` (the level of the node
    itself included) against every +1 entry of ``phi``, with the strict
    ``< dx`` proximity rule; exact ties count as misses.
    """
    if not (1 <= j <= grid.Nx and 1 <= n <= grid.Nt):
        raise IndexError(f"node ({j}, {n}) outside grid {grid.Nx}x{grid.Nt}")
    rho = _exact_ratio(grid)
    j0, n0 = j - 1, n - 1
    for p0 in range(grid.nt_sub):
        pf0 = (grid.n1 - 1) + p0
        if pf0 > n0:
            continue
        for l0 in range(grid.nx_sub):
            if phi.values[l0, p0] <= 0:
                continue
            lf0 = (grid.j1 - 1) + l0
            if ray_offset_hit(rho, j0 - lf0, pf0 - n0):
                return True
    return False


def build_psi(grid: GridSpec, s: SourceSupport) -> PsiField:
    """Reference lacuna indicator: +1 where rays meet the support, else -1."""
    phi = build_phi(grid, s)
    mask = _ray_table(grid).hit_mask(phi)
    return PsiField(np.where(mask, 1, -1).astype(np.int8))


@lru_cache(maxsize=8)
def _secondary_lut(grid: GridSpec) -> np.ndarray:
    """Offset lookup inside[dj + (Nx-1), dn] for dn >= 1 (False at dn <= 0)."""
    rho = _exact_ratio(grid)
    dj_off = grid.Nx - 1
    lut = np.zeros((2 * grid.Nx - 1, grid.Nt), dtype=bool)
    for dj in range(-(grid.Nx - 1), grid.Nx):
        for dn in range(1, grid.Nt):
            lut[dj + dj_off, dn] = secondary_offset_inside(rho, dj, dn)
    lut.setflags(write=False)
    return lut


def build_psi_secondary(grid: GridSpec, s: SourceSupport) -> PsiField:
    """Secondary-lacuna indicator: -1 where a node sits strictly later than
    every support node and at least one mesh step inside all their forward
    cones; +1 elsewhere.

    Raises DegenerateSupportError when the support holds no grid node (the
    all-sources condition would be vacuous).
    """
    phi = build_phi(grid, s)
    l_idx, p_idx = np.nonzero(phi.values > 0)
    if l_idx.size == 0:
        raise DegenerateSupportError("support contains no grid node")
    lut = _secondary_lut(grid)
    dj_off = grid.Nx - 1

    j_grid = np.arange(grid.Nx)[:, None]
    n_grid = np.arange(grid.Nt)[None, :]
    inside_all = np.ones((grid.Nx, grid.Nt), dtype=bool)
    for l0, p0 in zip(l_idx, p_idx):
        lf0 = (grid.j1 - 1) + int(l0)
        pf0 = (grid.n1 - 1) + int(p0)
        dn = n_grid - pf0
        inside = lut[j_grid - lf0 + dj_off, np.clip(dn, 0, grid.Nt - 1)]
        inside_all &= inside & (dn >= 1)
        if not inside_all.any():
            break
    return PsiField(np.where(inside_all, -1, 1).astype(np.int8))
