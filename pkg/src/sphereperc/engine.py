"""Cap connectivity graphs, the pole-to-pole event and Monte Carlo estimates.

Caps ``i`` and ``j`` are joined when their centres are at most ``2 gamma``
apart.  A constellation percolates when one connected component holds a cap
covering the South Pole and a cap covering the North Pole.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytics import p_cov
from .constellation import Constellation, link_geometry
from .exceptions import DomainError
from .geometry import ANGLE_TOL, NORTH_POLE, SOUTH_POLE, angular_distance, sample_uniform_sphere

THREADS_ENV = "SPHEREPERC_THREADS"

_PREFILTER_SLACK = 1e-9
_BLOCK = 2048


class UnionFind:
    """Disjoint-set forest with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


def adjacent_pairs(centers: np.ndarray, limit: float, use_index: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs ``i < j`` with ``angle(centers[i], centers[j]) <= limit``.

    A cheap dot-product (or k-d tree) prefilter with a small slack picks
    candidates; the final decision is always the exact angular test, so the
    result does not depend on which prefilter ran.  Pairs come back sorted.
    """
    n = len(centers)
    if n < 2:
        empty = np.empty(0, dtype=np.intp)
        return empty, empty
    wide = min(limit + _PREFILTER_SLACK, math.pi)
    if use_index:
        from scipy.spatial import cKDTree

        chord = 2.0 * math.sin(wide / 2.0) + 1e-12
        cand = cKDTree(centers).query_pairs(chord, output_type="ndarray")
        ii, jj = (cand[:, 0], cand[:, 1]) if len(cand) else (np.empty(0, np.intp), np.empty(0, np.intp))
        ii, jj = np.minimum(ii, jj), np.maximum(ii, jj)
    else:
        cos_wide = math.cos(wide)
        parts_i, parts_j = [], []
        for s in range(0, n, _BLOCK):
            block = centers[s:s + _BLOCK] @ centers.T
            bi, bj = np.nonzero(block >= cos_wide)
            bi = bi + s
            keep = bj > bi
            parts_i.append(bi[keep])
            parts_j.append(bj[keep])
        ii = np.concatenate(parts_i)
        jj = np.concatenate(parts_j)
    if len(ii):
        exact = angular_distance(centers[ii], centers[jj]) <= limit + ANGLE_TOL
        ii, jj = ii[exact], jj[exact]
    order = np.lexsort((jj, ii))
    return ii[order].astype(np.intp), jj[order].astype(np.intp)


def pole_flags(centers: np.ndarray, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    if len(centers) == 0:
        return np.zeros(0, bool), np.zeros(0, bool)
    south = np.atleast_1d(angular_distance(centers, SOUTH_POLE)) <= gamma + ANGLE_TOL
    north = np.atleast_1d(angular_distance(centers, NORTH_POLE)) <= gamma + ANGLE_TOL
    return south, north


@dataclass
class Component:
    size: int
    covers_south: bool
    covers_north: bool


@dataclass
class ConnectivityGraph:
    """Connected components of the cap-overlap graph with pole bookkeeping."""

    n: int
    labels: np.ndarray
    covers_south: np.ndarray
    covers_north: np.ndarray
    components: dict[int, Component] = field(default_factory=dict)

    @property
    def percolates(self) -> bool:
        return any(c.covers_south and c.covers_north for c in self.components.values())

    def connected(self, i: int, j: int) -> bool:
        return bool(self.labels[i] == self.labels[j])

    def component_sets(self) -> list[frozenset[int]]:
        groups: dict[int, set[int]] = {}
        for i, lab in enumerate(self.labels.tolist()):
            groups.setdefault(lab, set()).add(i)
        return [frozenset(g) for g in groups.values()]


def build_graph(c: Constellation, use_index: bool = False) -> ConnectivityGraph:
    centers = c.centers
    n = len(centers)
    uf = UnionFind(n)
    ii, jj = adjacent_pairs(centers, 2.0 * c.gamma, use_index=use_index)
    for a, b in zip(ii.tolist(), jj.tolist()):
        uf.union(a, b)
    labels = np.array([uf.find(i) for i in range(n)], dtype=np.intp)
    south, north = pole_flags(centers, c.gamma)
    comps: dict[int, Component] = {}
    for i, lab in enumerate(labels.tolist()):
        comp = comps.get(lab)
        if comp is None:
            comp = comps[lab] = Component(0, False, False)
        comp.size += 1
        comp.covers_south |= bool(south[i])
        comp.covers_north |= bool(north[i])
    return ConnectivityGraph(n, labels, south, north, comps)


def percolates(c: Constellation, use_index: bool = False) -> bool:
    """True iff the North Pole lies in the covered component of the South Pole."""
    if c.N == 0:
        return False
    south, north = pole_flags(c.centers, c.gamma)
    if not (south.any() and north.any()):
        return False
    return build_graph(c, use_index=use_index).percolates


def first_percolating_prefix(centers: np.ndarray, gamma: float) -> int | None:
    """Smallest ``k`` such that ``centers[:k]`` percolates, or None.

    Points are added in order; percolation of a prefix implies percolation of
    every longer prefix, so one pass answers all prefix lengths at once.
    """
    n = len(centers)
    south, north = pole_flags(centers, gamma)
    if not (south.any() and north.any()):
        return None
    ii, jj = adjacent_pairs(centers, 2.0 * gamma)
    # bucket edges by their later endpoint
    order = np.argsort(jj, kind="stable")
    ii, jj = ii[order].tolist(), jj[order].tolist()
    uf = UnionFind(n)
    s_flag = south.tolist()
    n_flag = north.tolist()
    e = 0
    for k in range(n):
        if s_flag[k] and n_flag[k]:
            return k + 1
        while e < len(jj) and jj[e] == k:
            ra, rb = uf.find(ii[e]), uf.find(k)
            if ra != rb:
                root = uf.union(ra, rb)
                s = s_flag[ra] or s_flag[rb]
                nn = n_flag[ra] or n_flag[rb]
                s_flag[root], n_flag[root] = s, nn
                if s and nn:
                    return k + 1
            e += 1
    return None


# --------------------------------------------------------------------------
# Monte Carlo


def trial_rng(seed: int, trial: int, tag: int | None = None) -> np.random.Generator:
    """Independent generator for one trial; depends only on its arguments."""
    key = (trial,) if tag is None else (trial, tag)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def worker_count(requested: int | None = None) -> int:
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, n)


@dataclass(frozen=True)
class PercolationEstimate:
    trials: int
    successes: int
    seed: int
    interval: str = "wald"

    @property
    def theta_hat(self) -> float:
        return self.successes / self.trials

    @property
    def degenerate(self) -> bool:
        """All trials agreed; the Wald half-width is reported as 0."""
        return self.successes in (0, self.trials)

    @property
    def ci95_halfwidth(self) -> float:
        p = self.theta_hat
        if self.interval == "clopper-pearson":
            lo, hi = self.ci95
            return 0.5 * (hi - lo)
        if self.degenerate:
            return 0.0
        return 1.96 * math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def ci95(self) -> tuple[float, float]:
        if self.interval == "clopper-pearson":
            from scipy.stats import beta

            k, n = self.successes, self.trials
            lo = 0.0 if k == 0 else float(beta.ppf(0.025, k, n - k + 1))
            hi = 1.0 if k == n else float(beta.ppf(0.975, k + 1, n - k))
            return lo, hi
        w = self.ci95_halfwidth
        return max(0.0, self.theta_hat - w), min(1.0, self.theta_hat + w)


def _count_trials(job) -> int:
    N, gamma, seed, trial_ids, tag = job
    hits = 0
    for t in trial_ids:
        pts = sample_uniform_sphere(trial_rng(seed, t, tag), N)
        hits += percolates(Constellation(gamma, pts))
    return hits


def _prefix_trials(job) -> list[int | None]:
    n_max, gamma, seed, trial_ids = job
    return [
        first_percolating_prefix(sample_uniform_sphere(trial_rng(seed, t), n_max), gamma)
        for t in trial_ids
    ]


def _chunks(trials: int, workers: int) -> list[range]:
    size = max(1, math.ceil(trials / (workers * 4)))
    return [range(s, min(s + size, trials)) for s in range(0, trials, size)]


def _run(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def estimate_theta(
    N: int,
    gamma: float,
    trials: int,
    seed: int,
    coupled: bool = False,
    *,
    workers: int | None = None,
    interval: str = "wald",
    tag: int | None = None,
) -> PercolationEstimate:
    """Monte Carlo estimate of the pole-to-pole percolation probability.

    Trial ``t`` draws its points from a generator keyed on ``(seed, t)`` in
    coupled mode, so estimates at different ``N`` share point streams and are
    pathwise monotone; uncoupled mode also keys on ``N`` (or ``tag``) so
    different grid points are independent.
    """
    if trials < 1:
        raise DomainError("trials", f"must be >= 1, got {trials!r}")
    if N < 0:
        raise DomainError("N", f"must be >= 0, got {N!r}")
    if not 0.0 < gamma < math.pi:
        raise DomainError("gamma", f"must lie in (0, pi), got {gamma!r}")
    key = None if coupled else (N if tag is None else tag)
    w = worker_count(workers)
    jobs = [(N, gamma, seed, list(r), key) for r in _chunks(trials, w)]
    hits = sum(_run(_count_trials, jobs, w))
    return PercolationEstimate(trials, int(hits), seed, interval)


def coupled_prefix_thresholds(n_max: int, gamma: float, trials: int, seed: int, workers: int | None = None) -> list[int | None]:
    """Per-trial smallest percolating prefix of the coupled point stream."""
    w = worker_count(workers)
    jobs = [(n_max, gamma, seed, list(r)) for r in _chunks(trials, w)]
    out: list[int | None] = []
    for part in _run(_prefix_trials, jobs, w):
        out.extend(part)
    return out


# --------------------------------------------------------------------------
# Sweeps

AXES = ("N", "altitude", "slant_range")


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    gamma_rad: float
    theta_hat: float
    ci95: float
    trials: int
    p_cov_analytic: float
    seed: int
    critical_marker: float = math.nan


class InfeasiblePoint(DomainError):
    def __init__(self, value, cause: DomainError):
        super().__init__(cause.parameter, f"grid value {value!r} infeasible ({cause})")
        self.value = value


def resolve_gamma(axis: str, value: float, fixed: dict) -> tuple[int, float]:
    """``(N, gamma)`` for one grid point of a sweep."""
    if axis == "N":
        return int(round(value)), fixed["gamma"]
    if axis == "altitude":
        return int(fixed["N"]), link_geometry(value, d_m=fixed["d_m"]).gamma
    if axis == "slant_range":
        return int(fixed["N"]), link_geometry(fixed["h"], d_m=value).gamma
    raise DomainError("axis", f"unknown sweep axis {axis!r}; expected one of {AXES}")


def _marker(axis: str, fixed: dict) -> float:
    from . import analytics

    try:
        if axis == "N":
            return analytics.critical_N(fixed["gamma"])
        if axis == "altitude":
            return analytics.critical_altitude(int(fixed["N"]), fixed["d_m"])
        return analytics.critical_slant_range(int(fixed["N"]), fixed["h"])
    except DomainError:
        return math.nan


def sweep(
    axis: str,
    grid,
    fixed: dict,
    trials: int,
    seed: int,
    coupled: bool = False,
    *,
    skip_infeasible: bool = False,
    workers: int | None = None,
) -> tuple[list[SweepRow], list[InfeasiblePoint]]:
    """Estimate theta along one parameter axis.

    ``fixed`` holds ``gamma`` for an N sweep, ``N`` and ``d_m`` for an altitude
    sweep, ``N`` and ``h`` for a slant-range sweep.  Infeasible grid points
    raise unless ``skip_infeasible``; skipped points are returned alongside
    the rows.
    """
    if axis not in AXES:
        raise DomainError("axis", f"unknown sweep axis {axis!r}; expected one of {AXES}")
    grid = [float(v) for v in grid]
    if not grid:
        raise DomainError("grid", "must not be empty")
    diffs = np.diff(grid)
    if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise DomainError("grid", "must be strictly monotone")
    marker = _marker(axis, fixed)

    resolved: list[tuple[float, int, float]] = []
    skipped: list[InfeasiblePoint] = []
    for v in grid:
        try:
            N, g = resolve_gamma(axis, v, fixed)
        except DomainError as exc:
            if isinstance(exc, DomainError) and exc.parameter == "axis":
                raise
            bad = InfeasiblePoint(v, exc)
            if not skip_infeasible:
                raise bad from exc
            skipped.append(bad)
            continue
        resolved.append((v, N, g))

    rows: list[SweepRow] = []
    if axis == "N" and coupled and resolved:
        n_max = max(N for _, N, _ in resolved)
        firsts = coupled_prefix_thresholds(n_max, fixed["gamma"], trials, seed, workers)
        for v, N, g in resolved:
            hits = sum(1 for f in firsts if f is not None and f <= N)
            est = PercolationEstimate(trials, hits, seed)
            rows.append(_row(axis, v, N, g, est, seed, marker))
        return rows, skipped
    for idx, (v, N, g) in enumerate(resolved):
        est = estimate_theta(N, g, trials, seed, coupled, workers=workers, tag=None if coupled else idx)
        rows.append(_row(axis, v, N, g, est, seed, marker))
    return rows, skipped


def _row(axis, v, N, g, est: PercolationEstimate, seed, marker) -> SweepRow:
    return SweepRow(
        axis=axis,
        value=v,
        gamma_rad=g,
        theta_hat=est.theta_hat,
        ci95=est.ci95_halfwidth,
        trials=est.trials,
        p_cov_analytic=p_cov(N, g) if N >= 1 else 0.0,
        seed=seed,
        critical_marker=marker,
    )
