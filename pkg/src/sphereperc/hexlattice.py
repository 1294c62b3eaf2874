"""Hexagonal cells on the projection plane and their open/closed certificates.

Cells use axial coordinates ``(q, r)`` with pointy-top orientation: the
centre of ``(q, r)`` is ``(sqrt3 a (q + r/2), 1.5 a r)`` and neighbouring
centres are ``sqrt3 a`` apart.  A cell is certified from its circumscribed
circle (radius ``a``), whose preimage on the sphere is a cap:

* open: some satellite cap contains that whole cap;
* closed: no satellite cap meets it;
* otherwise undetermined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .analytics import gamma_m, p_cov, p_ncov
from .constellation import Constellation
from .exceptions import DomainError
from .geometry import ANGLE_TOL, angular_distance
from .stereographic import PlanePoint, disk_preimage

SQRT3 = math.sqrt(3.0)

OPEN = "open_certified"
CLOSED = "closed_certified"
UNDETERMINED = "undetermined"
Label = Literal["open_certified", "closed_certified", "undetermined"]

AXIAL_NEIGHBOURS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


@dataclass(frozen=True)
class HexCell:
    q: int
    r: int
    center: PlanePoint
    a: float

    def vertices(self) -> np.ndarray:
        ang = np.deg2rad(30.0 + 60.0 * np.arange(6))
        return np.column_stack([self.center.x + self.a * np.cos(ang), self.center.y + self.a * np.sin(ang)])

    def contains(self, pts) -> np.ndarray:
        """Closed point-in-hexagon test for plane points of shape ``(n, 2)``."""
        p = np.atleast_2d(np.asarray(pts, dtype=float)) - np.array([self.center.x, self.center.y])
        # pointy-top hexagon = intersection of three slabs of half-width sqrt3 a / 2
        half = SQRT3 * self.a / 2.0 * (1 + 1e-12)
        ok = np.ones(len(p), dtype=bool)
        for deg in (0.0, 60.0, 120.0):
            t = math.radians(deg)
            ok &= np.abs(p[:, 0] * math.cos(t) + p[:, 1] * math.sin(t)) <= half
        return ok

    def neighbours(self) -> list[tuple[int, int]]:
        return [(self.q + dq, self.r + dr) for dq, dr in AXIAL_NEIGHBOURS]


def cell_center(q: int, r: int, a: float) -> PlanePoint:
    return PlanePoint(SQRT3 * a * (q + r / 2.0), 1.5 * a * r)


def hex_lattice(a: float, extent_radius: float) -> list[HexCell]:
    """Cells whose circumscribed circle meets the disk of ``extent_radius``
    around the origin, i.e. centres within ``extent_radius + a``.

    Ordered by distance from the origin, then by ``(r, q)``; ``H0`` comes first.
    """
    if not a > 0:
        raise DomainError("a", f"must be positive, got {a!r}")
    if not extent_radius >= a:
        raise DomainError("extent_radius", f"must be >= a ({a!r}), got {extent_radius!r}")
    reach = extent_radius + a
    r_max = int(math.ceil(reach / (1.5 * a))) + 1
    cells = []
    for r in range(-r_max, r_max + 1):
        q_lo = int(math.floor(-reach / (SQRT3 * a) - r / 2.0)) - 1
        q_hi = int(math.ceil(reach / (SQRT3 * a) - r / 2.0)) + 1
        for q in range(q_lo, q_hi + 1):
            c = cell_center(q, r, a)
            if c.norm <= reach * (1 + 1e-12):
                cells.append(HexCell(q, r, c, a))
    cells.sort(key=lambda h: (round(h.center.norm / a, 9), h.r, h.q))
    return cells


def circumscribed_cap(cell: HexCell) -> tuple[np.ndarray, float]:
    """Unit centre and half-angle of the preimage of the cell's circumscribed circle."""
    center, half = disk_preimage((cell.center.x, cell.center.y), cell.a)
    if half <= 0 or not np.all(np.isfinite(center)):
        raise DomainError("cell", "circumscribed circle leaves the disk-projection regime")
    return center, half


def hex_probability_bounds(N: int, gamma: float, a: float) -> tuple[float, float]:
    """Lower bounds on P(cell open) and P(cell closed) for ``N`` uniform caps."""
    gm = gamma_m(a)
    if gm >= gamma:
        raise DomainError("a", f"gamma_m={gm!r} must be smaller than gamma={gamma!r}")
    return p_cov(N, gamma - gm), p_ncov(N, gamma + gm)


def classify_hex(cell: HexCell, c: Constellation, uniform: bool = False) -> Label:
    """Certify ``cell`` as open or closed against constellation ``c``.

    ``uniform=True`` uses the worst-case half-angle ``gamma_m(a)`` for every
    cell instead of the cell's own preimage half-angle.
    """
    center, g0 = circumscribed_cap(cell)
    if uniform:
        g0 = gamma_m(cell.a)
    if c.N == 0:
        return CLOSED
    d = np.atleast_1d(angular_distance(c.centers, center))
    if c.gamma > g0 and np.any(d <= c.gamma - g0 + ANGLE_TOL):
        return OPEN
    if np.all(d > c.gamma + g0):
        return CLOSED
    return UNDETERMINED


def classify_grid(cells, c: Constellation, uniform: bool = False) -> list[Label]:
    return [classify_hex(cell, c, uniform) for cell in cells]


def sample_in_cell(cell: HexCell, rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform plane points inside the hexagon (rejection from its bounding box)."""
    out = np.empty((0, 2))
    while len(out) < n:
        box = rng.uniform(-1.0, 1.0, size=(2 * n, 2)) * np.array([SQRT3 * cell.a / 2.0, cell.a])
        box += np.array([cell.center.x, cell.center.y])
        out = np.vstack([out, box[cell.contains(box)]])
    return out[:n]
