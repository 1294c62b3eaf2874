"""Percolation of satellite coverage caps on a sphere."""
from .analytics import (
    bounds_NL_NU,
    critical_altitude,
    critical_gamma,
    critical_geometry,
    critical_N,
    critical_report,
    critical_slant_range,
    gamma_m,
    hex_bounds_Nc,
    p_both_poles_covered,
    p_cov,
    p_ncov,
    t_factor,
)
from .constellation import (
    Constellation,
    LinkGeometry,
    full_coverage_layout,
    link_geometry,
    read_constellation,
    sample_constellation,
    write_constellation,
)
from .engine import (
    ConnectivityGraph,
    PercolationEstimate,
    build_graph,
    estimate_theta,
    percolates,
    sweep,
)
from .exceptions import ConstructionError, DomainError, PoleProjectionError
from .geometry import R_EARTH, Cap, SpherePoint, angular_distance, cap_area, cap_contains, sample_uniform_sphere

__version__ = "0.1.0"
