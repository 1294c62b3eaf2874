"""Spherical primitives: angles, caps, areas and uniform sampling.

Points on the Earth sphere are carried as unit direction vectors; lengths are
in km and angles in radians.  Most functions accept a single vector of shape
``(3,)`` or a stack of shape ``(n, 3)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

R_EARTH = 6371.0

# Slack for closed (<=) angle comparisons; absorbs rounding in atan2 only.
ANGLE_TOL = 1e-12

_UNIT_TOL = 1e-12

NORTH_POLE = np.array([0.0, 0.0, 1.0])
SOUTH_POLE = np.array([0.0, 0.0, -1.0])


@dataclass(frozen=True)
class SpherePoint:
    """A point on the Earth sphere given by its unit direction from the centre."""

    dir: tuple[float, float, float]

    def __post_init__(self):
        v = np.asarray(self.dir, dtype=float)
        if v.shape != (3,) or not np.all(np.isfinite(v)):
            raise DomainError("dir", "expected a finite 3-vector")
        if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
            raise DomainError("dir", f"not unit length (|dir| = {np.linalg.norm(v)!r})")
        object.__setattr__(self, "dir", tuple(float(x) for x in v))

    @classmethod
    def from_vector(cls, v) -> "SpherePoint":
        """Normalise an arbitrary non-zero vector onto the sphere."""
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        if not n > 0:
            raise DomainError("dir", "zero vector has no direction")
        return cls(tuple(v / n))

    @classmethod
    def from_latlon(cls, lat, lon) -> "SpherePoint":
        return cls.from_vector(latlon_to_unit(lat, lon))

    def antipode(self) -> "SpherePoint":
        return SpherePoint(tuple(-x for x in self.dir))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.dir, dtype=dtype)

    @property
    def km(self) -> np.ndarray:
        """Position relative to the Earth centre, in km."""
        return R_EARTH * np.asarray(self.dir)


@dataclass(frozen=True)
class Cap:
    """Closed spherical cap: all points within ``half_angle`` of ``center``."""

    center: SpherePoint
    half_angle: float

    def __post_init__(self):
        if not isinstance(self.center, SpherePoint):
            object.__setattr__(self, "center", SpherePoint.from_vector(self.center))
        if not 0.0 < self.half_angle < np.pi:
            raise DomainError("half_angle", f"must lie in (0, pi), got {self.half_angle!r}")

    @property
    def area(self) -> float:
        return cap_area(self.half_angle)

    def contains(self, p) -> bool | np.ndarray:
        return cap_contains(self, p)


def latlon_to_unit(lat, lon) -> np.ndarray:
    """Unit vectors from latitude/longitude in radians."""
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    c = np.cos(lat)
    return np.stack([c * np.cos(lon), c * np.sin(lon), np.sin(lat)], axis=-1)


def as_unit_array(p) -> np.ndarray:
    if isinstance(p, SpherePoint):
        return np.asarray(p.dir)
    return np.asarray(p, dtype=float)


def angular_distance(u, v) -> float | np.ndarray:
    """Central angle between two points (or broadcast stacks of points).

    Uses ``atan2(|u x v|, u . v)``, which stays accurate near 0 and pi where
    ``arccos`` loses half its digits.
    """
    u = as_unit_array(u)
    v = as_unit_array(v)
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.sum(u * v, axis=-1)
    out = np.arctan2(cross, dot)
    return float(out) if np.ndim(out) == 0 else out


def cap_area(half_angle: float) -> float:
    """Area in km^2 of a cap on the Earth sphere, ``2 pi r_e^2 (1 - cos a)``."""
    if not 0.0 < half_angle <= np.pi:
        raise DomainError("half_angle", f"must lie in (0, pi], got {half_angle!r}")
    # 1 - cos a = 2 sin^2(a/2) avoids cancellation for small caps
    return 4.0 * np.pi * R_EARTH**2 * np.sin(half_angle / 2.0) ** 2


def cap_contains(cap: Cap, p) -> bool | np.ndarray:
    """Closed membership test; the boundary counts as inside."""
    d = angular_distance(cap.center, p)
    inside = np.asarray(d) <= cap.half_angle + ANGLE_TOL
    return bool(inside) if inside.ndim == 0 else inside


def sample_uniform_sphere(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw uniform points on the unit sphere.

    Each point consumes exactly two doubles from ``rng``, in order: the
    cosine of the colatitude (uniform in [-1, 1]) and the azimuth (uniform in
    [0, 2 pi)).  Consequently the first ``k`` points of a draw of ``n >= k``
    are identical to a draw of ``k`` from the same generator state.
    """
    n = 1 if size is None else int(size)
    u = rng.random((n, 2))
    z = 2.0 * u[:, 0] - 1.0
    phi = 2.0 * np.pi * u[:, 1]
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    pts = np.column_stack([s * np.cos(phi), s * np.sin(phi), z])
    return pts[0] if size is None else pts


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed 3x3 rotation matrix."""
    from scipy.spatial.transform import Rotation

    return Rotation.random(random_state=rng).as_matrix()
