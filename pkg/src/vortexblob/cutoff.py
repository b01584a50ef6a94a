"""Smooth cutoff fields near the boundary and the smoothed log kernel.

Both cutoffs are radial profiles of the distance to the boundary, built
from the quintic smoothstep s(t) = 6t^5 - 15t^4 + 10t^3, which is C^2 at
both band edges.  theta vanishes within rho0/3 of the boundary and is one
beyond rho0/2; chi vanishes only on the boundary itself and is one beyond
rho0/10.  Outside the domain both are identically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .geometry import DomainModel, Point2, Vec2

def smoothstep(t: float) -> float:
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def smoothstep_deriv(t: float) -> float:
    if t <= 0.0 or t >= 1.0:
        return 0.0
    u = 1.0 - t
    return 30.0 * t * t * u * u


@dataclass(frozen=True)
class CutoffPair:
    """theta / chi cutoff fields for one domain and safety radius rho0."""

    domain: DomainModel
    rho0: float
    theta_edges: tuple = field(init=False)
    chi_edges: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "theta_edges", (self.rho0 / 3.0, self.rho0 / 2.0))
        object.__setattr__(self, "chi_edges", (0.0, self.rho0 / 10.0))


def build_cutoffs(d: DomainModel, rho0: float) -> CutoffPair:
    if not rho0 > 0.0:
        raise ConfigurationError(f"rho0 must be positive, got {rho0}")
    # witness that the inner region at depth rho0/3 is nonempty
    witness = _deep_interior_witness(d)
    if d.dist_to_boundary(witness) <= rho0 / 3.0:
        raise ConfigurationError(
            f"rho0={rho0} leaves no room: interior depth at the domain center "
            f"is only {d.dist_to_boundary(witness):.6g}"
        )
    return CutoffPair(domain=d, rho0=rho0)


def _deep_interior_witness(d: DomainModel) -> Point2:
    if d.kind == "unit_disk":
        return np.zeros(2)
    return np.asarray(
        [d.map_forward(0j).real, d.map_forward(0j).imag]  # type: ignore[attr-defined]
    )


def _band_value(d_val: float, lo: float, hi: float) -> float:
    if d_val <= lo:
        return 0.0
    if d_val >= hi:
        return 1.0
    return smoothstep((d_val - lo) / (hi - lo))


def eval_theta(c: CutoffPair, x: Point2) -> float:
    if not c.domain.contains(x):
        return 0.0
    lo, hi = c.theta_edges
    return _band_value(c.domain.dist_to_boundary(x), lo, hi)


def eval_chi(c: CutoffPair, x: Point2) -> float:
    if not c.domain.contains(x):
        return 0.0
    lo, hi = c.chi_edges
    return _band_value(c.domain.dist_to_boundary(x), lo, hi)


def grad_theta(c: CutoffPair, x: Point2) -> Vec2:
    """Analytic gradient: chain rule through the smoothstep profile."""
    if not c.domain.contains(x):
        return np.zeros(2)
    lo, hi = c.theta_edges
    dist = c.domain.dist_to_boundary(x)
    if dist <= lo or dist >= hi:
        return np.zeros(2)
    t = (dist - lo) / (hi - lo)
    scale = smoothstep_deriv(t) / (hi - lo)
    return scale * c.domain.grad_dist_to_boundary(x)


def grad_chi(c: CutoffPair, x: Point2) -> Vec2:
    if not c.domain.contains(x):
        return np.zeros(2)
    lo, hi = c.chi_edges
    dist = c.domain.dist_to_boundary(x)
    if dist <= lo or dist >= hi:
        return np.zeros(2)
    t = (dist - lo) / (hi - lo)
    scale = smoothstep_deriv(t) / (hi - lo)
    return scale * c.domain.grad_dist_to_boundary(x)


@dataclass(frozen=True)
class SmoothedLog:
    """ln(r) for r >= rho0/100, continued below by a C^1 quadratic.

    The continuation q(r) = ln(c) + (r^2 - c^2) / (2 c^2) with c = rho0/100
    matches value and first derivative at r = c and is bounded below by
    q(0) = ln(c) - 1/2.
    """

    rho0: float
    cut_radius: float = field(init=False)

    def __post_init__(self):
        if not self.rho0 > 0.0:
            raise ConfigurationError(f"rho0 must be positive, got {self.rho0}")
        object.__setattr__(self, "cut_radius", self.rho0 / 100.0)


def smoothed_log(s: SmoothedLog, r: float) -> float:
    if r < 0.0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    c = s.cut_radius
    if r >= c:
        return math.log(r)
    return math.log(c) + (r * r - c * c) / (2.0 * c * c)


def smoothed_log_deriv(s: SmoothedLog, r: float) -> float:
    if r < 0.0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    c = s.cut_radius
    if r >= c:
        return 1.0 / r
    return r / (c * c)
