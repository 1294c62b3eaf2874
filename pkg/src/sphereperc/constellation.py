"""Shell link geometry and constellation point sets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .exceptions import ConstructionError, DomainError
from .geometry import R_EARTH, sample_uniform_sphere

Provenance = Literal["random_bpp", "layout"]


@dataclass(frozen=True)
class LinkGeometry:
    """Mutually consistent altitude / angle / slant-range tuple of one shell.

    Lengths in km, angles in radians.
    """

    h: float
    r_s: float
    eta: float
    epsilon: float
    gamma: float
    d_m: float

    def residuals(self) -> dict[str, float]:
        cos_law = (self.r_s**2 + R_EARTH**2 - self.d_m**2) / (2.0 * R_EARTH * self.r_s)
        return {
            "law_of_cosines": abs(math.cos(self.gamma) - cos_law),
            "angle_sum": abs(self.gamma + self.eta + self.epsilon - math.pi / 2),
        }

    def degrees(self) -> dict[str, float]:
        return {
            "eta_deg": math.degrees(self.eta),
            "epsilon_deg": math.degrees(self.epsilon),
            "gamma_deg": math.degrees(self.gamma),
        }


def max_nadir_angle(h: float) -> float:
    return math.asin(R_EARTH / (R_EARTH + h))


def horizon_slant_range(h: float) -> float:
    r_s = R_EARTH + h
    return math.sqrt(r_s * r_s - R_EARTH * R_EARTH)


def link_geometry(h: float, *, eta=None, epsilon=None, d_m=None, gamma=None) -> LinkGeometry:
    """Solve the shell triangle (Earth centre, satellite, edge-of-footprint user).

    Exactly one of ``eta``, ``epsilon``, ``d_m`` or ``gamma`` must be given.
    """
    known = {k: v for k, v in dict(eta=eta, epsilon=epsilon, d_m=d_m, gamma=gamma).items() if v is not None}
    if len(known) != 1:
        raise DomainError("known", f"exactly one of eta/epsilon/d_m/gamma required, got {sorted(known)}")
    if not h > 0:
        raise DomainError("h", f"altitude must be positive, got {h!r}")
    r_s = R_EARTH + h
    eta_max = max_nadir_angle(h)

    if eta is not None:
        if not 0.0 < eta <= eta_max:
            raise DomainError("eta", f"must lie in (0, {eta_max!r}], got {eta!r}")
        disc = max(R_EARTH**2 - r_s**2 * math.sin(eta) ** 2, 0.0)
        d_m = -math.sqrt(disc) + r_s * math.cos(eta)
        gamma = math.asin(min(d_m * math.sin(eta) / R_EARTH, 1.0))
        epsilon = math.pi / 2 - gamma - eta
    elif epsilon is not None:
        if not 0.0 <= epsilon < math.pi / 2:
            raise DomainError("epsilon", f"must lie in [0, pi/2), got {epsilon!r}")
        eta = math.asin(R_EARTH * math.cos(epsilon) / r_s)
        gamma = math.pi / 2 - eta - epsilon
        d_m = math.sqrt(r_s**2 + R_EARTH**2 - 2.0 * R_EARTH * r_s * math.cos(gamma))
    elif d_m is not None:
        d_hi = horizon_slant_range(h)
        if not h < d_m <= d_hi * (1 + 1e-12):
            raise DomainError("d_m", f"must lie in ({h!r}, {d_hi!r}] for h={h!r}, got {d_m!r}")
        cos_g = (r_s**2 + R_EARTH**2 - d_m**2) / (2.0 * R_EARTH * r_s)
        gamma = math.acos(min(max(cos_g, -1.0), 1.0))
        eta = math.asin(min(R_EARTH * math.sin(gamma) / d_m, 1.0))
        epsilon = math.pi / 2 - gamma - eta
    else:
        g_max = math.acos(R_EARTH / r_s)
        if not 0.0 < gamma <= g_max * (1 + 1e-12):
            raise DomainError("gamma", f"must lie in (0, {g_max!r}] for h={h!r}, got {gamma!r}")
        d_m = math.sqrt(r_s**2 + R_EARTH**2 - 2.0 * R_EARTH * r_s * math.cos(gamma))
        eta = math.asin(min(R_EARTH * math.sin(gamma) / d_m, 1.0))
        epsilon = math.pi / 2 - gamma - eta
    return LinkGeometry(h=h, r_s=r_s, eta=eta, epsilon=max(epsilon, 0.0), gamma=gamma, d_m=d_m)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Coverage-cap centres of a shell; altitude enters only through ``gamma``."""

    gamma: float
    centers: np.ndarray
    seed: int | None = None
    provenance: Provenance = "random_bpp"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.centers, dtype=float).reshape(-1, 3)
        norms = np.linalg.norm(c, axis=1)
        if c.size and np.max(np.abs(norms - 1.0)) > 1e-12:
            raise DomainError("centers", "every centre must be a unit vector")
        if not 0.0 < self.gamma < math.pi:
            raise DomainError("gamma", f"must lie in (0, pi), got {self.gamma!r}")
        c.setflags(write=False)
        object.__setattr__(self, "centers", c)

    @property
    def N(self) -> int:
        return len(self.centers)

    def __len__(self):
        return self.N

    def __eq__(self, other):
        if not isinstance(other, Constellation):
            return NotImplemented
        return (
            self.gamma == other.gamma
            and self.seed == other.seed
            and self.provenance == other.provenance
            and np.array_equal(self.centers, other.centers)
        )

    def prefix(self, n: int) -> "Constellation":
        return Constellation(self.gamma, self.centers[:n], self.seed, self.provenance)

    def rotated(self, matrix) -> "Constellation":
        c = self.centers @ np.asarray(matrix).T
        c = c / np.linalg.norm(c, axis=1, keepdims=True)
        return Constellation(self.gamma, c, self.seed, self.provenance)


def sample_constellation(N: int, gamma: float, seed: int) -> Constellation:
    """``N`` independent uniform coverage centres (a binomial point process)."""
    if N < 1:
        raise DomainError("N", f"must be a positive integer, got {N!r}")
    if not 0.0 < gamma < math.pi / 2:
        raise DomainError("gamma", f"must lie in (0, pi/2), got {gamma!r}")
    rng = np.random.default_rng(seed)
    return Constellation(gamma, sample_uniform_sphere(rng, N), seed=seed, provenance="random_bpp")


def layout_dimensions(gamma: float) -> tuple[int, int, float]:
    """Belt count ``m``, pieces per belt ``n`` and the piece-enclosing half-angle."""
    if not 0.0 < gamma < math.pi / 2:
        raise DomainError("gamma", f"must lie in (0, pi/2), got {gamma!r}")
    m = math.ceil(math.pi / gamma)
    n = math.ceil(math.pi / math.acos(math.cos(gamma) / math.cos(math.pi / (2 * m)))) + 1
    zeta = math.acos(math.cos(math.pi / (2 * m)) * math.cos(math.pi / n))
    return m, n, zeta


def full_coverage_layout(gamma: float) -> Constellation:
    """Deterministic ``m * n`` cap centres whose ``gamma``-caps cover the sphere.

    Belt ``j`` is the band within ``pi/(2m)`` of the great circle through both
    poles at longitude ``(j + 1/2) pi / m``; it contains the two antipodal
    longitude slices of width ``pi/m``.  Each belt is cut into ``n`` pieces of
    ``2 pi / n`` along its great circle and every piece is enclosed by a cap of
    half-angle ``zeta`` about its midpoint.
    """
    m, n, zeta = layout_dimensions(gamma)
    if not zeta < gamma:
        raise ConstructionError(f"piece cap half-angle {zeta!r} does not fit in gamma {gamma!r}")
    phi = (np.arange(m) + 0.5) * math.pi / m
    alpha = (np.arange(n) + 0.5) * 2.0 * math.pi / n
    # great circle of belt j spanned by e1 = (cos phi, sin phi, 0) and e2 = z
    e1 = np.column_stack([np.cos(phi), np.sin(phi), np.zeros(m)])
    e2 = np.array([0.0, 0.0, 1.0])
    centers = np.cos(alpha)[None, :, None] * e1[:, None, :] + np.sin(alpha)[None, :, None] * e2
    centers = centers.reshape(m * n, 3)
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    return Constellation(gamma, centers, seed=None, provenance="layout", meta={"m": m, "n": n, "zeta": zeta})


def uncovered_count(c: Constellation, points: np.ndarray, chunk: int = 20000) -> int:
    """Number of ``points`` outside every cap of ``c`` (closed caps)."""
    cos_g = math.cos(c.gamma)
    missed = 0
    for start in range(0, len(points), chunk):
        block = points[start:start + chunk]
        best = np.max(block @ c.centers.T, axis=1)
        # candidates near the boundary get the exact angular test
        near = np.abs(best - cos_g) < 1e-9
        miss = best < cos_g
        if np.any(near):
            from .geometry import ANGLE_TOL, angular_distance

            for i in np.flatnonzero(near):
                d = angular_distance(c.centers, block[i])
                miss[i] = not np.any(d <= c.gamma + ANGLE_TOL)
        missed += int(np.count_nonzero(miss))
    return missed


def write_constellation(c: Constellation, path) -> None:
    """Flat text record: ``key=value`` header then one unit vector per line."""
    seed = "none" if c.seed is None else str(c.seed)
    lines = [f"N={c.N}", f"gamma_rad={c.gamma!r}", f"seed={seed}", f"provenance={c.provenance}"]
    for k, v in sorted(c.meta.items()):
        lines.append(f"meta.{k}={v!r}")
    lines.append("---")
    lines.extend(f"{x:.17g} {y:.17g} {z:.17g}" for x, y, z in c.centers)
    Path(path).write_text("\n".join(lines) + "\n")


def read_constellation(path) -> Constellation:
    text = Path(path).read_text().splitlines()
    sep = text.index("---")
    header = dict(line.split("=", 1) for line in text[:sep])
    body = [line for line in text[sep + 1:] if line.strip()]
    centers = np.array([[float(t) for t in line.split()] for line in body]).reshape(-1, 3)
    n = int(header["N"])
    if len(centers) != n:
        raise ValueError(f"header says N={n} but {len(centers)} centres follow")
    meta = {}
    for k, v in header.items():
        if k.startswith("meta."):
            meta[k[5:]] = float(v) if "." in v or "e" in v else int(v)
    seed = None if header["seed"] == "none" else int(header["seed"])
    return Constellation(float(header["gamma_rad"]), centers, seed=seed, provenance=header["provenance"], meta=meta)
