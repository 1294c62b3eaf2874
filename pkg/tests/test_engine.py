import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphereperc import engine as en
from sphereperc.analytics import p_both_poles_covered
from sphereperc.constellation import Constellation, full_coverage_layout
from sphereperc.exceptions import DomainError
from sphereperc.geometry import SOUTH_POLE, random_rotation, sample_uniform_sphere

from conftest import STARLINK_GAMMA, random_unit, rotate_towards
from oracles import brute_force_components, brute_force_percolates


def _meridian_chain(gamma, spacing, count, start=-math.pi / 2):
    lat = start + spacing * np.arange(count)
    return np.column_stack([np.cos(lat), np.zeros(count), np.sin(lat)])


def test_union_find_basics():
    uf = en.UnionFind(6)
    uf.union(0, 1)
    uf.union(2, 3)
    uf.union(1, 3)
    assert uf.find(0) == uf.find(2)
    assert uf.find(4) != uf.find(0)
    assert len({uf.find(i) for i in range(6)}) == 3


def test_tangent_caps_are_adjacent():
    g = 0.05
    a = np.array([1.0, 0.0, 0.0])
    touching = rotate_towards(a, np.array([0.0, 1.0, 0.0]), 2 * g)
    apart = rotate_towards(a, np.array([0.0, 1.0, 0.0]), 2 * g + 1e-9)
    assert en.build_graph(Constellation(g, np.array([a, touching]))).connected(0, 1)
    assert not en.build_graph(Constellation(g, np.array([a, apart]))).connected(0, 1)


def test_three_chain_transitive():
    g = 0.1
    pts = _meridian_chain(g, 1.9 * g, 3, start=0.0)
    graph = en.build_graph(Constellation(g, pts))
    assert graph.connected(0, 2)
    ang02 = math.acos(np.clip(pts[0] @ pts[2], -1, 1))
    assert ang02 > 2 * g


@pytest.mark.parametrize("use_index", [False, True])
def test_adjacency_matches_brute_force(rng, use_index):
    for _ in range(100):
        n = int(rng.integers(2, 51))
        g = float(rng.uniform(0.05, 0.5))
        pts = random_unit(rng, n)
        graph = en.build_graph(Constellation(g, pts), use_index=use_index)
        assert set(graph.component_sets()) == set(brute_force_components(pts, g))
        assert en.percolates(Constellation(g, pts), use_index=use_index) == brute_force_percolates(pts, g)


def test_adjacent_pairs_index_equivalence(rng):
    pts = sample_uniform_sphere(rng, 3000)
    a = en.adjacent_pairs(pts, 2 * STARLINK_GAMMA, use_index=False)
    b = en.adjacent_pairs(pts, 2 * STARLINK_GAMMA, use_index=True)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert np.all(a[0] < a[1])


def test_layout_percolates():
    assert en.percolates(full_coverage_layout(STARLINK_GAMMA))


def test_short_meridian_chain_does_not_percolate():
    # 17 caps spaced 2 gamma from the South Pole span 34 gamma < pi
    g = STARLINK_GAMMA
    pts = _meridian_chain(g, 2 * g, 17)
    c = Constellation(g, pts)
    graph = en.build_graph(c)
    assert len(graph.component_sets()) == 1
    assert graph.covers_south.any() and not graph.covers_north.any()
    assert not en.percolates(c)


def test_long_meridian_chain_percolates():
    g = STARLINK_GAMMA
    count = math.ceil(math.pi / (2 * g)) + 1
    pts = _meridian_chain(g, math.pi / (count - 1), count)
    assert en.percolates(Constellation(g, pts))


def test_degenerate_constellations():
    g = 0.2
    empty = Constellation(g, np.empty((0, 3)))
    assert not en.percolates(empty)
    assert not en.percolates(Constellation(g, SOUTH_POLE[None, :]))
    # one huge cap touching both poles percolates by itself
    assert en.percolates(Constellation(math.pi / 2, np.array([[1.0, 0.0, 0.0]])))
    assert en.first_percolating_prefix(np.array([[1.0, 0.0, 0.0]]), math.pi / 2) == 1


def test_first_prefix_matches_per_prefix_graphs(rng):
    g = 0.35
    for _ in range(30):
        pts = sample_uniform_sphere(rng, 60)
        k = en.first_percolating_prefix(pts, g)
        flags = [en.percolates(Constellation(g, pts[:n])) if n else False for n in range(61)]
        expect = next((n for n, f in enumerate(flags) if f), None)
        assert k == expect
        if k is not None:
            assert all(flags[k:])


def test_coupled_monotone_along_streams():
    g = STARLINK_GAMMA
    grid = [200, 400, 600, 800, 1000]
    for t in range(200):
        pts = sample_uniform_sphere(en.trial_rng(7, t), grid[-1])
        prev = False
        for n in grid:
            cur = en.percolates(Constellation(g, pts[:n]))
            assert cur or not prev
            prev = cur


def test_coupled_estimates_monotone():
    g = STARLINK_GAMMA
    rows, _ = en.sweep("N", [300, 500, 700], {"gamma": g}, 60, seed=3, coupled=True)
    th = [r.theta_hat for r in rows]
    assert th == sorted(th)
    direct = [en.estimate_theta(n, g, 60, 3, coupled=True).theta_hat for n in (300, 500, 700)]
    assert th == direct


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_z_rotation_preserves_event(seed):
    rng = np.random.default_rng(seed)
    g = 0.3
    pts = sample_uniform_sphere(rng, 40)
    phi = rng.uniform(0, 2 * math.pi)
    rz = np.array([[math.cos(phi), -math.sin(phi), 0], [math.sin(phi), math.cos(phi), 0], [0, 0, 1]])
    c = Constellation(g, pts)
    assert en.percolates(c) == en.percolates(c.rotated(rz))


def test_general_rotation_preserves_components(rng):
    g = 0.2
    for _ in range(20):
        c = Constellation(g, sample_uniform_sphere(rng, 80))
        r = random_rotation(rng)
        assert set(en.build_graph(c).component_sets()) == set(en.build_graph(c.rotated(r)).component_sets())


def test_estimate_deterministic_across_workers():
    a = en.estimate_theta(500, STARLINK_GAMMA, 24, seed=11, workers=1)
    b = en.estimate_theta(500, STARLINK_GAMMA, 24, seed=11, workers=2)
    assert a == b


def test_threads_env_caps_workers(monkeypatch):
    monkeypatch.setenv(en.THREADS_ENV, "1")
    assert en.worker_count(8) == 1
    monkeypatch.setenv(en.THREADS_ENV, "junk")
    assert en.worker_count(3) == 3


def test_uncoupled_streams_differ_by_N():
    a = en.trial_rng(5, 0, 100).random(4)
    b = en.trial_rng(5, 0, 101).random(4)
    c = en.trial_rng(5, 0).random(4)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)


def test_wald_interval():
    e = en.PercolationEstimate(100, 30, 0)
    assert e.ci95_halfwidth == pytest.approx(1.96 * math.sqrt(0.3 * 0.7 / 100))
    for k in (0, 100):
        d = en.PercolationEstimate(100, k, 0)
        assert d.degenerate and d.ci95_halfwidth == 0.0


def test_clopper_pearson_interval():
    e = en.PercolationEstimate(100, 0, 0, "clopper-pearson")
    lo, hi = e.ci95
    assert lo == 0.0 and hi == pytest.approx(1 - 0.025 ** (1 / 100), rel=1e-9)
    e = en.PercolationEstimate(50, 20, 0, "clopper-pearson")
    lo, hi = e.ci95
    assert lo < 0.4 < hi


def test_seed_self_consistency():
    g = STARLINK_GAMMA
    a = en.estimate_theta(600, g, 200, seed=1)
    b = en.estimate_theta(600, g, 200, seed=2)
    sd = math.sqrt(max(a.theta_hat * (1 - a.theta_hat), 0.01) * 2 / 200)
    assert abs(a.theta_hat - b.theta_hat) <= 3 * sd


@pytest.mark.parametrize("N, gamma", [(30, 0.35), (600, STARLINK_GAMMA)])
def test_estimate_below_two_pole_bound(N, gamma):
    trials = 300
    est = en.estimate_theta(N, gamma, trials, seed=9)
    p = p_both_poles_covered(N, gamma)
    assert est.theta_hat <= p + 3 * math.sqrt(p * (1 - p) / trials) + 1e-12


def test_estimate_domain_errors():
    with pytest.raises(DomainError):
        en.estimate_theta(10, 0.1, 0, seed=0)
    with pytest.raises(DomainError):
        en.estimate_theta(10, 4.0, 5, seed=0)


def test_sweep_infeasible_points():
    fixed = {"N": 100, "d_m": 809.5}
    with pytest.raises(en.InfeasiblePoint):
        en.sweep("altitude", [500.0, 900.0], fixed, 5, seed=0)
    rows, skipped = en.sweep("altitude", [500.0, 900.0], fixed, 5, seed=0, skip_infeasible=True)
    assert [r.value for r in rows] == [500.0]
    assert [s.value for s in skipped] == [900.0]


def test_sweep_rejects_bad_grids():
    with pytest.raises(DomainError):
        en.sweep("N", [], {"gamma": 0.1}, 5, seed=0)
    with pytest.raises(DomainError):
        en.sweep("N", [10, 5, 20], {"gamma": 0.1}, 5, seed=0)
    with pytest.raises(DomainError):
        en.sweep("bogus", [10], {"gamma": 0.1}, 5, seed=0)


def test_sweep_rows_fields():
    rows, _ = en.sweep("slant_range", [700.0, 900.0], {"N": 500, "h": 550.0}, 10, seed=4)
    assert rows[0].gamma_rad < rows[1].gamma_rad
    assert all(r.trials == 10 and r.seed == 4 for r in rows)
    assert rows[0].critical_marker == pytest.approx(739.5, abs=1)
