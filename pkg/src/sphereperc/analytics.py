"""Closed-form coverage and critical-threshold expressions.

Powers of the per-satellite miss probability ``(1 + cos g) / 2 = cos^2(g/2)``
are evaluated in log space, so nothing underflows for very large ``N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .exceptions import DomainError
from .geometry import R_EARTH

LN2 = math.log(2.0)


def _check_gamma(gamma, upper=math.pi, name="gamma"):
    if not 0.0 < gamma < upper:
        raise DomainError(name, f"must lie in (0, {upper!r}), got {gamma!r}")


def _log_miss(gamma: float) -> float:
    # log((1 + cos g) / 2)
    return 2.0 * math.log(math.cos(gamma / 2.0))


def p_ncov(N: float, gamma: float) -> float:
    """Probability that a fixed point is covered by none of ``N`` caps."""
    _check_gamma(gamma)
    return math.exp(N * _log_miss(gamma))


def p_cov(N: float, gamma: float) -> float:
    """Probability that a fixed point is covered by at least one of ``N`` caps."""
    _check_gamma(gamma)
    return -math.expm1(N * _log_miss(gamma))


def p_both_poles_covered(N: float, gamma: float) -> float:
    """Probability that both poles are covered; an upper bound on theta.

    For ``gamma < pi/2`` no cap covers both poles, so a cap misses both with
    probability ``cos gamma``.
    """
    _check_gamma(gamma, math.pi / 2)
    return 1.0 - 2.0 * p_ncov(N, gamma) + math.cos(gamma) ** N


class Bounds(NamedTuple):
    N_L: int
    N_U: int
    m: int
    n: int
    zeta: float


def bounds_NL_NU(gamma: float) -> Bounds:
    """Meridian-chain lower bound and full-coverage-layout upper bound."""
    from .constellation import layout_dimensions

    _check_gamma(gamma, math.pi / 2)
    m, n, zeta = layout_dimensions(gamma)
    return Bounds(math.floor(math.pi / (2.0 * gamma)), m * n, m, n, zeta)


def critical_N(gamma: float) -> float:
    """Real-valued critical satellite count, ``ln2 / (ln2 - ln(1 + cos g))``.

    Equivalently the ``N`` at which ``p_cov(N, gamma) == 1/2``.
    """
    _check_gamma(gamma)
    return -LN2 / _log_miss(gamma)


def gamma_m(a: float) -> float:
    """Largest cap half-angle behind a plane disk of radius ``a`` km."""
    if not a > 0:
        raise DomainError("a", f"hexagon side must be positive, got {a!r}")
    return 2.0 * math.atan(a / (2.0 * R_EARTH))


def hex_bounds_Nc(gamma: float, a: float) -> tuple[float, float]:
    """``(N_c^L, N_c^U)`` from hexagons of side ``a`` km on the plane."""
    _check_gamma(gamma)
    gm = gamma_m(a)
    if gm >= gamma:
        raise DomainError("a", f"gamma_m={gm!r} must be smaller than gamma={gamma!r}")
    if gamma + gm >= math.pi:
        raise DomainError("a", "gamma + gamma_m must stay below pi")
    return critical_N(gamma + gm), critical_N(gamma - gm)


def t_factor(N: float) -> float:
    """``2 (1/2)^(1/N) - 1``, the cosine of the critical coverage angle."""
    if not N >= 1:
        raise DomainError("N", f"must be >= 1, got {N!r}")
    return 1.0 + 2.0 * math.expm1(-LN2 / N)


def _one_minus_t(N: float) -> float:
    if not N >= 1:
        raise DomainError("N", f"must be >= 1, got {N!r}")
    return -2.0 * math.expm1(-LN2 / N)


def critical_gamma(N: float) -> float:
    """Coverage angle at which ``N`` caps give ``p_cov == 1/2``."""
    # arccos(t) via the half-angle form keeps precision for small angles
    return 2.0 * math.asin(math.sqrt(_one_minus_t(N) / 2.0))


def critical_altitude(N: float, d_m: float) -> float:
    """Altitude (km) above which ``N`` satellites with slant range ``d_m`` fall
    below the critical coverage angle."""
    if not d_m > 0:
        raise DomainError("d_m", f"must be positive, got {d_m!r}")
    t = t_factor(N)
    rad = d_m**2 - R_EARTH**2 + (t * R_EARTH) ** 2
    if rad < 0:
        raise DomainError("d_m", f"too small for any altitude at N={N!r} (radicand {rad!r})")
    h = math.sqrt(rad) + t * R_EARTH - R_EARTH
    if not h > 0:
        raise DomainError("d_m", f"critical altitude {h!r} km is not positive")
    return h


def critical_slant_range(N: float, h: float) -> float:
    """Maximum slant range (km) that puts ``N`` satellites at altitude ``h`` on
    the critical coverage angle."""
    if not h > 0:
        raise DomainError("h", f"must be positive, got {h!r}")
    r_s = R_EARTH + h
    # r_e^2 + r_s^2 - 2 t r_e r_s written with 1 - t to avoid cancellation
    rad = h * h + 2.0 * R_EARTH * r_s * _one_minus_t(N)
    return math.sqrt(rad)


class CriticalGeometry(NamedTuple):
    t: float
    gamma_c: float
    h_c: float | None
    d_m_c: float | None


def critical_geometry(N: int, *, d_m: float | None = None, h: float | None = None) -> CriticalGeometry:
    """Critical coverage angle for ``N`` plus the requested companion value."""
    if (d_m is None) == (h is None):
        raise DomainError("known", "give exactly one of d_m or h")
    t = t_factor(N)
    g = critical_gamma(N)
    if d_m is not None:
        return CriticalGeometry(t, g, critical_altitude(N, d_m), None)
    return CriticalGeometry(t, g, None, critical_slant_range(N, h))


@dataclass
class CriticalReport:
    """Everything the closed forms say about one coverage angle."""

    gamma: float
    N_L: int
    N_U: int
    m: int
    n: int
    zeta: float
    N_c: float
    N: int | None = None
    p_cov: float | None = None
    p_ncov: float | None = None
    hex_bounds: dict[float, tuple[float, float]] = field(default_factory=dict)
    t_factor: float | None = None
    gamma_c: float | None = None
    h_c: float | None = None
    d_m_c: float | None = None
    link: dict | None = None

    def to_dict(self) -> dict:
        deg = math.degrees
        out: dict = {
            "gamma_rad": self.gamma,
            "gamma_deg": deg(self.gamma),
            "N_L": self.N_L,
            "N_U": self.N_U,
            "m": self.m,
            "n": self.n,
            "zeta_rad": self.zeta,
            "zeta_deg": deg(self.zeta),
            "N_c": self.N_c,
            "N_c_ceil": math.ceil(self.N_c),
            "N": self.N,
            "p_cov": self.p_cov,
            "p_ncov": self.p_ncov,
            "hex_bounds": [
                {"a_km": a, "N_c_L": lo, "N_c_U": hi, "gamma_m_rad": gamma_m(a), "gamma_m_deg": deg(gamma_m(a))}
                for a, (lo, hi) in sorted(self.hex_bounds.items())
            ],
            "t_factor": self.t_factor,
            "gamma_c_rad": self.gamma_c,
            "gamma_c_deg": None if self.gamma_c is None else deg(self.gamma_c),
            "h_c_km": self.h_c,
            "d_m_c_km": self.d_m_c,
        }
        if self.link is not None:
            out["link"] = dict(self.link)
        return out


def critical_report(
    gamma: float,
    *,
    N: int | None = None,
    a_values=(),
    h: float | None = None,
    d_m: float | None = None,
    link=None,
) -> CriticalReport:
    """Assemble a :class:`CriticalReport`.

    ``h`` and ``d_m`` feed the critical slant range and altitude when ``N`` is
    known; ``link`` (a LinkGeometry) is echoed in the report.
    """
    _check_gamma(gamma, math.pi / 2)
    b = bounds_NL_NU(gamma)
    rep = CriticalReport(gamma, b.N_L, b.N_U, b.m, b.n, b.zeta, critical_N(gamma))
    for a in a_values:
        rep.hex_bounds[float(a)] = hex_bounds_Nc(gamma, float(a))
    if link is not None:
        rep.link = {
            "h_km": link.h,
            "r_s_km": link.r_s,
            "d_m_km": link.d_m,
            "eta_rad": link.eta,
            "eta_deg": math.degrees(link.eta),
            "epsilon_rad": link.epsilon,
            "epsilon_deg": math.degrees(link.epsilon),
            "gamma_rad": link.gamma,
            "gamma_deg": math.degrees(link.gamma),
        }
    if N is not None:
        rep.N = int(N)
        rep.p_cov = p_cov(N, gamma)
        rep.p_ncov = p_ncov(N, gamma)
        rep.t_factor = t_factor(N)
        rep.gamma_c = critical_gamma(N)
        if d_m is not None:
            rep.h_c = critical_altitude(N, d_m)
        if h is not None:
            rep.d_m_c = critical_slant_range(N, h)
    return rep
