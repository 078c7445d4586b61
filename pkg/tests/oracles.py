"""Independent brute-force reference implementations used as test oracles.

Everything here is written directly from the defining formulas with plain
loops and exact rational arithmetic (the config floats are taken as the
dyadic rationals they denote).  Nothing is shared with the production code
paths beyond the public data types.
"""

from fractions import Fraction

import numpy as np


def exact_mesh(grid):
    """Exact abscissae, time levels, and steps as Fractions."""
    dx = (Fraction(grid.b) - Fraction(grid.a)) / (grid.Nx - 1)
    dt = Fraction(grid.T) / (grid.Nt - 1)
    xs = [Fraction(grid.a) + j * dx for j in range(grid.Nx)]
    ts = [n * dt for n in range(grid.Nt)]
    return xs, ts, dx, dt


def brute_force_psi(grid, phi_values):
    """Enumerate every (level, source node, ray sign) triple per target node."""
    xs, ts, dx, _ = exact_mesh(grid)
    c = Fraction(grid.c)
    j1_0, n1_0 = grid.j1 - 1, grid.n1 - 1
    sources = [
        (xs[j1_0 + l0], ts[n1_0 + p0], p0)
        for l0 in range(grid.nx_sub)
        for p0 in range(grid.nt_sub)
        if phi_values[l0, p0] > 0
    ]
    psi = np.full((grid.Nx, grid.Nt), -1, dtype=np.int8)
    for j0 in range(grid.Nx):
        xj = xs[j0]
        for n0 in range(grid.Nt):
            tn = ts[n0]
            hit = False
            for (xl, tau, _p0) in sources:
                if tau > tn:
                    continue
                shift = c * (tau - tn)
                for xi in (xj + shift, xj - shift):
                    if abs(xi - xl) < dx:
                        hit = True
                        break
                if hit:
                    break
            if hit:
                psi[j0, n0] = 1
    return psi


def brute_force_secondary(grid, phi_values):
    """Every-source forward-cone membership with a one-step margin."""
    xs, ts, dx, _ = exact_mesh(grid)
    c = Fraction(grid.c)
    j1_0, n1_0 = grid.j1 - 1, grid.n1 - 1
    sources = [
        (xs[j1_0 + l0], ts[n1_0 + p0])
        for l0 in range(grid.nx_sub)
        for p0 in range(grid.nt_sub)
        if phi_values[l0, p0] > 0
    ]
    if not sources:
        raise ValueError("no source nodes")
    psi = np.full((grid.Nx, grid.Nt), 1, dtype=np.int8)
    for j0 in range(grid.Nx):
        xj = xs[j0]
        for n0 in range(grid.Nt):
            tn = ts[n0]
            inside_all = True
            for (xi, tau) in sources:
                if not (tn > tau and c * (tn - tau) - abs(xj - xi) >= dx):
                    inside_all = False
                    break
            if inside_all:
                psi[j0, n0] = -1
    return psi


def brute_force_phi(grid, support):
    """Scalar membership loop over every sub-grid node."""
    psi = np.full((grid.nx_sub, grid.nt_sub), -1, dtype=np.int8)
    xs = grid.sub_x_coords()
    ts = grid.sub_t_coords()
    for l0 in range(grid.nx_sub):
        for p0 in range(grid.nt_sub):
            x, t = float(xs[l0]), float(ts[p0])
            if not (support.x_min <= x <= support.x_max):
                continue
            if not (support.t_min <= t <= support.t_max):
                continue
            for d in support.disks:
                ddx = x - d.cx
                ddt = t - d.ct
                if ddx * ddx + ddt * ddt <= d.r * d.r:
                    psi[l0, p0] = 1
                    break
    return psi
