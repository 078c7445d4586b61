"""Uniform space-time mesh over the computational box and its source sub-box.

The computational domain is ``[a, b] x [0, T]`` discretized by ``Nx`` nodes
in space and ``Nt`` nodes in time:

    x_j = a + (j - 1) * dx,   dx = (b - a) / (Nx - 1),   j = 1..Nx
    t_n = (n - 1) * dt,       dt = T / (Nt - 1),         n = 1..Nt

Sources live inside a sub-box ``Q = [a1, b1] x [T0, T1]``. The sub-grid is
the contiguous block of mesh nodes falling inside Q (closed bounds); it is
addressed by 1-based indices ``(l, p)`` with ``l = 1..nx_sub``,
``p = 1..nt_sub`` offset by ``(j1, n1)`` into the full mesh.

All public indices are 1-based to match the mathematical description.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DomainConfig:
    """Geometry of the computational box, the source box, and the mesh.

    a, b       : spatial bounds of the computational domain
    T          : final time (time starts at 0)
    a1, b1     : spatial bounds of the source box Q
    T0, T1     : time bounds of Q
    c          : wave speed (> 0)
    Nx, Nt     : node counts in space and time (>= 2 each)
    """

    a: float
    b: float
    T: float
    a1: float
    b1: float
    T0: float
    T1: float
    c: float = 1.0
    Nx: int = 64
    Nt: int = 64

    def __post_init__(self):
        for name in ("a", "b", "T", "a1", "b1", "T0", "T1", "c"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if not (self.a <= self.a1 < self.b1 <= self.b):
            raise ValueError(
                f"need a <= a1 < b1 <= b, got a={self.a} a1={self.a1} "
                f"b1={self.b1} b={self.b}"
            )
        if not (0 <= self.T0 < self.T1 <= self.T):
            raise ValueError(
                f"need 0 <= T0 < T1 <= T, got T0={self.T0} T1={self.T1} T={self.T}"
            )
        if self.Nx < 2 or self.Nt < 2:
            raise ValueError(f"need Nx, Nt >= 2, got Nx={self.Nx} Nt={self.Nt}")
        if not self.c > 0:
            raise ValueError(f"wave speed must be positive, got {self.c}")


@dataclass(frozen=True)
class GridSpec:
    """A built mesh: domain geometry plus steps and sub-grid placement.

    ``j1``/``n1`` are the 1-based full-grid indices of the first sub-grid
    node in space/time; ``nx_sub``/``nt_sub`` count the sub-grid nodes.
    Instances are immutable and safe to share across threads.
    """

    a: float
    b: float
    T: float
    a1: float
    b1: float
    T0: float
    T1: float
    c: float
    Nx: int
    Nt: int
    dx: float
    dt: float
    j1: int
    n1: int
    nx_sub: int
    nt_sub: int

    @property
    def config(self) -> DomainConfig:
        return DomainConfig(
            self.a, self.b, self.T, self.a1, self.b1, self.T0, self.T1,
            self.c, self.Nx, self.Nt,
        )

    def x_coords(self) -> np.ndarray:
        """All Nx abscissae, x_j = a + (j - 1) * dx."""
        return self.a + np.arange(self.Nx) * self.dx

    def t_coords(self) -> np.ndarray:
        """All Nt time levels, t_n = (n - 1) * dt."""
        return np.arange(self.Nt) * self.dt

    def sub_x_coords(self) -> np.ndarray:
        return self.x_coords()[self.j1 - 1 : self.j1 - 1 + self.nx_sub]

    def sub_t_coords(self) -> np.ndarray:
        return self.t_coords()[self.n1 - 1 : self.n1 - 1 + self.nt_sub]


def build_grid(cfg: DomainConfig) -> GridSpec:
    """Discretize the domain and locate the sub-grid inside Q.

    The first/last sub-grid nodes are the smallest mesh abscissa >= a1 and
    the largest <= b1 (closed membership), and likewise in time with
    T0/T1. Raises ValueError if Q captures no node in either direction.
    """
    dx = (cfg.b - cfg.a) / (cfg.Nx - 1)
    dt = cfg.T / (cfg.Nt - 1)
    xs = cfg.a + np.arange(cfg.Nx) * dx
    ts = np.arange(cfg.Nt) * dt

    in_x = np.nonzero((xs >= cfg.a1) & (xs <= cfg.b1))[0]
    in_t = np.nonzero((ts >= cfg.T0) & (ts <= cfg.T1))[0]
    if in_x.size == 0 or in_t.size == 0:
        raise ValueError(
            f"source box [{cfg.a1}, {cfg.b1}] x [{cfg.T0}, {cfg.T1}] "
            "contains no grid node"
        )
    return GridSpec(
        a=cfg.a, b=cfg.b, T=cfg.T, a1=cfg.a1, b1=cfg.b1, T0=cfg.T0, T1=cfg.T1,
        c=cfg.c, Nx=cfg.Nx, Nt=cfg.Nt, dx=dx, dt=dt,
        j1=int(in_x[0]) + 1, n1=int(in_t[0]) + 1,
        nx_sub=int(in_x[-1] - in_x[0]) + 1, nt_sub=int(in_t[-1] - in_t[0]) + 1,
    )


def node_coords(g: GridSpec, j: int, n: int) -> tuple[float, float]:
    """Coordinates (x_j, t_n) of full-grid node (j, n), 1-based."""
    if not 1 <= j <= g.Nx:
        raise IndexError(f"spatial index {j} outside 1..{g.Nx}")
    if not 1 <= n <= g.Nt:
        raise IndexError(f"time index {n} outside 1..{g.Nt}")
    return g.a + (j - 1) * g.dx, (n - 1) * g.dt


def sub_to_full(g: GridSpec, l: int, p: int) -> tuple[int, int]:
    """Map sub-grid indices (l, p) to full-grid indices (j, n), 1-based."""
    if not 1 <= l <= g.nx_sub:
        raise IndexError(f"sub-grid spatial index {l} outside 1..{g.nx_sub}")
    if not 1 <= p <= g.nt_sub:
        raise IndexError(f"sub-grid time index {p} outside 1..{g.nt_sub}")
    return g.j1 + (l - 1), g.n1 + (p - 1)


def default_domain(Nx: int = 64, Nt: int = 64, c: float = 1.0) -> DomainConfig:
    """The default experiment geometry: [-20,20]x[0,20] with Q=[-10,10]x[0,10]."""
    return DomainConfig(
        a=-20.0, b=20.0, T=20.0, a1=-10.0, b1=10.0, T0=0.0, T1=10.0,
        c=c, Nx=Nx, Nt=Nt,
    )
