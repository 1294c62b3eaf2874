"""Stereographic projection onto the plane tangent at the South Pole.

The projection works in a shifted frame: the sphere is centred at
``(0, 0, r_e)`` so the South Pole sits at the origin and the image plane is
``z = 0``.  Public functions take and return unit directions (the frame used
everywhere else) and convert internally via :func:`to_tangent_frame` /
:func:`from_tangent_frame`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .exceptions import DomainError, PoleProjectionError
from .geometry import (
    NORTH_POLE,
    R_EARTH,
    SOUTH_POLE,
    Cap,
    SpherePoint,
    angular_distance,
    as_unit_array,
)

HALF_PLANE_TOL = 1e-12
_POLE_TOL = 1e-12


@dataclass(frozen=True)
class PlanePoint:
    x: float
    y: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y], dtype=dtype)

    @property
    def norm(self) -> float:
        return float(np.hypot(self.x, self.y))


@dataclass(frozen=True)
class ProjectedShape:
    """Image of a cap on the plane.

    ``disk``: the closed disk of ``radius`` around ``center``.
    ``disk_complement``: everything outside the open disk of ``radius`` around
    ``center`` (the cap swallows the North Pole).
    ``half_plane``: points ``q`` with ``q . normal >= offset``.
    """

    kind: Literal["disk", "half_plane", "disk_complement"]
    center: PlanePoint | None = None
    radius: float | None = None
    normal: tuple[float, float] | None = None
    offset: float | None = None

    def contains(self, q) -> bool | np.ndarray:
        q = np.asarray(q, dtype=float)
        if self.kind == "half_plane":
            res = q @ np.asarray(self.normal) >= self.offset
        else:
            d = np.linalg.norm(q - np.asarray(self.center), axis=-1)
            tol = 1e-9 * self.radius
            res = d <= self.radius + tol if self.kind == "disk" else d >= self.radius - tol
        return bool(res) if np.ndim(res) == 0 else res


def to_tangent_frame(p) -> np.ndarray:
    """Unit directions -> km coordinates with the South Pole at the origin."""
    v = as_unit_array(p)
    return R_EARTH * v + np.array([0.0, 0.0, R_EARTH])


def from_tangent_frame(xyz) -> np.ndarray:
    xyz = np.asarray(xyz, dtype=float)
    return (xyz - np.array([0.0, 0.0, R_EARTH])) / R_EARTH


def project_xyz(xyz) -> np.ndarray:
    """Project tangent-frame points ``(x, y, z)`` (km) to ``(x', y')``."""
    xyz = np.asarray(xyz, dtype=float)
    scale = 2.0 * R_EARTH / (2.0 * R_EARTH - xyz[..., 2])
    return np.stack([scale * xyz[..., 0], scale * xyz[..., 1]], axis=-1)


def project(p) -> np.ndarray:
    """Stereographic image (km) of unit direction(s) ``p``.

    Raises PoleProjectionError for points within 1e-12 rad of the North Pole.
    """
    v = as_unit_array(p)
    if np.any(np.atleast_1d(angular_distance(v, NORTH_POLE)) <= _POLE_TOL):
        raise PoleProjectionError()
    return project_xyz(to_tangent_frame(v))


def project_point(p: SpherePoint) -> PlanePoint:
    x, y = project(p)
    return PlanePoint(float(x), float(y))


def unproject_xyz(q) -> np.ndarray:
    """Inverse projection to tangent-frame coordinates (km)."""
    q = np.asarray(q, dtype=float)
    x, y = q[..., 0], q[..., 1]
    rho2 = x * x + y * y
    four_r2 = 4.0 * R_EARTH**2
    denom = four_r2 + rho2
    return np.stack([four_r2 * x / denom, four_r2 * y / denom, 2.0 * R_EARTH * rho2 / denom], axis=-1)


def unproject(q) -> np.ndarray:
    """Unit direction(s) whose stereographic image is ``q``.

    Computed directly on the unit sphere rather than via the shifted frame, so
    points far out on the plane approach the North Pole without cancellation.
    """
    q = np.asarray(q, dtype=float)
    u = q[..., 0] / (2.0 * R_EARTH)
    w = q[..., 1] / (2.0 * R_EARTH)
    s = u * u + w * w
    denom = 1.0 + s
    return np.stack([2.0 * u / denom, 2.0 * w / denom, (s - 1.0) / denom], axis=-1)


def projected_circle_radius(psi: float, gamma0: float) -> float:
    """Radius (km) of the image of a cap with half-angle ``gamma0`` whose
    centre lies ``psi`` radians from the South Pole."""
    if not 0.0 < gamma0 < np.pi / 2:
        raise DomainError("gamma0", f"must lie in (0, pi/2), got {gamma0!r}")
    if abs(psi) >= np.pi - gamma0:
        raise DomainError("psi", f"cap reaches the North Pole (|psi| >= pi - gamma0), got {psi!r}")
    return R_EARTH * abs(np.tan((psi + gamma0) / 2.0) - np.tan((psi - gamma0) / 2.0))


def max_central_angle_for_radius(r: float) -> float:
    """Largest half-angle of a cap whose image is a disk of radius ``r`` km.

    Attained when the disk is centred on the origin.
    """
    if not r > 0:
        raise DomainError("r", f"radius must be positive, got {r!r}")
    return 2.0 * np.arctan(r / (2.0 * R_EARTH))


def _azimuth_unit(center: np.ndarray) -> np.ndarray:
    h = np.hypot(center[0], center[1])
    if h == 0.0:
        return np.array([1.0, 0.0])
    return np.array([center[0], center[1]]) / h


def _meridian_image(angle_from_south: float) -> float:
    # signed distance from the origin of the image of a point on a meridian
    return 2.0 * R_EARTH * np.tan(angle_from_south / 2.0)


def project_cap(cap: Cap) -> ProjectedShape:
    """Image of a cap on the plane, classified by where the North Pole falls."""
    c = np.asarray(cap.center.dir)
    g0 = cap.half_angle
    delta = angular_distance(c, NORTH_POLE)
    psi = angular_distance(c, SOUTH_POLE)
    az = _azimuth_unit(c)
    if abs(delta - g0) <= HALF_PLANE_TOL:
        # boundary through the North Pole: the near boundary point fixes the line
        offset = _meridian_image(psi - g0)
        return ProjectedShape("half_plane", normal=(float(az[0]), float(az[1])), offset=float(offset))
    if delta > g0:
        ql = _meridian_image(psi - g0)
        qr = _meridian_image(psi + g0)
        mid = 0.5 * (ql + qr)
        return ProjectedShape(
            "disk",
            center=PlanePoint(float(mid * az[0]), float(mid * az[1])),
            radius=float(0.5 * abs(qr - ql)),
        )
    # the complement cap excludes the North Pole and projects to the hole
    hole = project_cap(Cap(SpherePoint(tuple(-c)), np.pi - g0))
    return ProjectedShape("disk_complement", center=hole.center, radius=hole.radius)


def disk_preimage(center, radius: float) -> tuple[np.ndarray, float]:
    """Cap (unit centre, half-angle) whose image is the given disk."""
    center = np.asarray(center, dtype=float)
    if not radius > 0:
        raise DomainError("radius", f"must be positive, got {radius!r}")
    rho = float(np.hypot(center[0], center[1]))
    az = np.array([1.0, 0.0]) if rho == 0.0 else center / rho
    psi_l = 2.0 * np.arctan((rho - radius) / (2.0 * R_EARTH))
    psi_r = 2.0 * np.arctan((rho + radius) / (2.0 * R_EARTH))
    psi_c = 0.5 * (psi_l + psi_r)
    half = 0.5 * (psi_r - psi_l)
    s = np.sin(psi_c)
    cap_center = np.array([s * az[0], s * az[1], -np.cos(psi_c)])
    return cap_center, half
