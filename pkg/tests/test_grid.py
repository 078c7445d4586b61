"""Mesh construction and indexing checks."""

import numpy as np
import pytest

from lacunet.grid import (
    DomainConfig,
    build_grid,
    default_domain,
    node_coords,
    sub_to_full,
)


@pytest.fixture
def g():
    return build_grid(default_domain())


def scan_subrange(coords, lo, hi):
    """Independent scan: first/last index inside [lo, hi] and the count."""
    inside = [i for i, v in enumerate(coords) if lo <= v <= hi]
    assert inside, "empty sub-range"
    return inside[0] + 1, len(inside)


def test_default_steps(g):
    assert g.dx == 40.0 / 63.0
    assert g.dt == 20.0 / 63.0


def test_default_subgrid_via_scan(g):
    j1, nxs = scan_subrange(g.x_coords(), g.a1, g.b1)
    n1, nts = scan_subrange(g.t_coords(), g.T0, g.T1)
    assert (g.j1, g.nx_sub) == (j1, nxs) == (17, 32)
    assert (g.n1, g.nt_sub) == (n1, nts) == (1, 32)


def test_two_node_mesh():
    g2 = build_grid(DomainConfig(0, 1, 1, 0, 1, 0, 1, 1.0, 2, 2))
    assert g2.dx == 1.0
    assert list(g2.x_coords()) == [0.0, 1.0]


def test_endpoints(g):
    assert node_coords(g, 1, 1) == (-20.0, 0.0)
    assert node_coords(g, 64, 64) == (20.0, 20.0)


def test_node_coords_formula(g):
    x, t = node_coords(g, 17, 1)
    assert x == -20.0 + 16 * (40.0 / 63.0)
    assert x == pytest.approx(-9.8413, abs=1e-4)
    assert t == 0.0


def test_node_coords_range_errors(g):
    for j, n in ((0, 1), (65, 1), (1, 0), (1, 65)):
        with pytest.raises(IndexError):
            node_coords(g, j, n)


def test_sub_to_full(g):
    assert sub_to_full(g, 1, 1) == (g.j1, g.n1)
    assert sub_to_full(g, 32, 32) == (48, 32)


def test_sub_to_full_arithmetic():
    cfg = DomainConfig(0.0, 10.0, 10.0, 2.0, 8.0, 1.0, 9.0, 1.0, 11, 11)
    gg = build_grid(cfg)
    assert (gg.j1, gg.n1) == (3, 2)
    assert sub_to_full(gg, 2, 1) == (gg.j1 + 1, gg.n1)


def test_sub_to_full_range_errors(g):
    with pytest.raises(IndexError):
        sub_to_full(g, 0, 1)
    with pytest.raises(IndexError):
        sub_to_full(g, 1, g.nt_sub + 1)


def test_roundtrip_matches_direct_formula(g):
    xs, ts = g.x_coords(), g.t_coords()
    for l in range(1, g.nx_sub + 1):
        for p in range(1, g.nt_sub + 1):
            j, n = sub_to_full(g, l, p)
            assert node_coords(g, j, n) == (xs[j - 1], ts[n - 1])


def test_mesh_symmetry_to_rounding_scale(g):
    # x_j carries two roundings of magnitude ~(b - a), so the mirror
    # deviation is bounded by a couple of spacing units at that scale.
    xs = g.x_coords()
    assert np.all(np.abs(xs + xs[::-1]) <= 2 * np.spacing(g.b - g.a))


def test_subgrid_containment_is_tight(g):
    xs, ts = g.x_coords(), g.t_coords()
    assert g.a1 <= xs[g.j1 - 1] and xs[g.j1 - 1 + g.nx_sub - 1] <= g.b1
    if g.j1 > 1:
        assert xs[g.j1 - 2] < g.a1
    if g.j1 - 1 + g.nx_sub < g.Nx:
        assert xs[g.j1 - 1 + g.nx_sub] > g.b1
    assert g.T0 <= ts[g.n1 - 1] and ts[g.n1 - 1 + g.nt_sub - 1] <= g.T1
    if g.n1 - 1 + g.nt_sub < g.Nt:
        assert ts[g.n1 - 1 + g.nt_sub] > g.T1


def test_random_configs_containment():
    rng = np.random.default_rng(1234)
    for _ in range(200):
        a = float(rng.uniform(-30, -1))
        b = float(rng.uniform(1, 30))
        T = float(rng.uniform(2, 25))
        a1 = float(rng.uniform(a, 0))
        b1 = float(rng.uniform(a1 + 0.5, b))
        T1 = float(rng.uniform(0.5, T))
        nx = int(rng.integers(2, 40))
        nt = int(rng.integers(2, 40))
        cfg = DomainConfig(a, b, T, a1, b1, 0.0, T1, 1.0, nx, nt)
        try:
            gg = build_grid(cfg)
        except ValueError:
            xs = a + np.arange(nx) * ((b - a) / (nx - 1))
            ts = np.arange(nt) * (T / (nt - 1))
            assert (
                not np.any((xs >= a1) & (xs <= b1))
                or not np.any((ts >= 0.0) & (ts <= T1))
            )
            continue
        j1, nxs = scan_subrange(gg.x_coords(), a1, b1)
        n1, nts = scan_subrange(gg.t_coords(), 0.0, T1)
        assert (gg.j1, gg.nx_sub, gg.n1, gg.nt_sub) == (j1, nxs, n1, nts)


def test_rejects_empty_subgrid():
    with pytest.raises(ValueError):
        # nodes at 0, 10, 20; Q = [3, 7] holds none of them
        build_grid(DomainConfig(0.0, 20.0, 10.0, 3.0, 7.0, 0.0, 10.0, 1.0, 3, 3))


def test_invalid_configs_rejected():
    with pytest.raises(ValueError):
        DomainConfig(1.0, -1.0, 1.0, 0.0, 0.5, 0.0, 1.0, 1.0, 4, 4)
    with pytest.raises(ValueError):
        DomainConfig(-1.0, 1.0, 1.0, 0.5, 0.0, 0.0, 1.0, 1.0, 4, 4)
    with pytest.raises(ValueError):
        DomainConfig(-1.0, 1.0, 1.0, -0.5, 0.5, 0.8, 0.5, 1.0, 4, 4)
    with pytest.raises(ValueError):
        DomainConfig(-1.0, 1.0, 1.0, -0.5, 0.5, 0.0, 1.0, 0.0, 4, 4)
    with pytest.raises(ValueError):
        DomainConfig(-1.0, 1.0, 1.0, -0.5, 0.5, 0.0, 1.0, 1.0, 1, 4)
    with pytest.raises(ValueError):
        DomainConfig(float("nan"), 1.0, 1.0, -0.5, 0.5, 0.0, 1.0, 1.0, 4, 4)
