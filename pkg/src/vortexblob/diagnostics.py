"""Localization observables and convergence measurement.

Per blob and snapshot: the center of vorticity (circulation-weighted mean
position, so it stays well defined for total circulation != 1), the moment
of inertia about that center, and the support radius (particles are the
support in this discretization, so it is the farthest particle).  Sweeps
over the concentration scale are summarized by log-log least-squares
slopes.  All reductions use math.fsum: exact rounded sums, independent of
any threading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .blob import BlobTrajectory, ParticleCloud, RegularizedField, boundary_force_at
from .errors import ConfigurationError, UndefinedCenterError
from .geometry import DomainModel, UnitDisk
from .pointvortex import OdeSolution


def measure(cloud: ParticleCloud, blob: int = 0) -> tuple[np.ndarray, float, float]:
    """(center, inertia, support_radius) of one blob of the cloud."""
    mask = cloud.blob_id == blob
    if not mask.any():
        raise ConfigurationError(f"cloud has no blob {blob}")
    w = cloud.weights[mask]
    p = cloud.positions[mask]
    a = math.fsum(w)
    if a == 0.0:
        raise UndefinedCenterError(f"blob {blob} has zero total circulation")
    cx = math.fsum(w * p[:, 0]) / a
    cy = math.fsum(w * p[:, 1]) / a
    dx = p[:, 0] - cx
    dy = p[:, 1] - cy
    dev2 = dx * dx + dy * dy
    inertia = math.fsum(w * dev2)
    support_radius = math.sqrt(float(np.max(dev2)))
    return np.array([cx, cy]), inertia, support_radius


def blob_circulation(cloud: ParticleCloud, blob: int = 0) -> float:
    return math.fsum(cloud.weights[cloud.blob_id == blob])


@dataclass(frozen=True)
class BlobDiagnostics:
    """One blob's observables at one snapshot time."""

    t: float
    center: np.ndarray
    inertia: float
    support_radius: float
    dist_to_ode: float
    boundary_clearance: float


def snapshot_diagnostics(
    traj: BlobTrajectory,
    domain: DomainModel,
    ode: Optional[OdeSolution] = None,
    blob: int = 0,
    vortex: int = 0,
) -> list[BlobDiagnostics]:
    """Per-snapshot observables, with ODE comparison when one is given."""
    out = []
    for t, cloud in zip(traj.times, traj.clouds):
        center, inertia, rsupp = measure(cloud, blob)
        if ode is not None:
            z = ode.interpolate(float(t))[vortex]
            dist = math.hypot(center[0] - z[0], center[1] - z[1])
        else:
            dist = math.nan
        mask = cloud.blob_id == blob
        p = cloud.positions[mask]
        if isinstance(domain, UnitDisk):
            clear = float(np.min(1.0 - np.hypot(p[:, 0], p[:, 1])))
        else:
            clear = min(domain.dist_to_boundary(q) for q in p)
        out.append(
            BlobDiagnostics(
                t=float(t), center=center, inertia=inertia, support_radius=rsupp,
                dist_to_ode=dist, boundary_clearance=clear,
            )
        )
    return out


def compare_to_ode(
    traj: BlobTrajectory,
    ode: OdeSolution,
    blob: int = 0,
    vortex: int = 0,
) -> np.ndarray:
    """|center(t) - z(t)| at every recorded snapshot time."""
    if traj.times[0] > ode.times[-1] or traj.times[-1] < ode.times[0]:
        raise ValueError("trajectory and ODE time ranges are disjoint")
    dists = np.empty(len(traj.clouds))
    for i, (t, cloud) in enumerate(zip(traj.times, traj.clouds)):
        center, _, _ = measure(cloud, blob)
        z = ode.interpolate(float(t))[vortex]
        dists[i] = math.hypot(center[0] - z[0], center[1] - z[1])
    return dists


@dataclass(frozen=True)
class SweepResult:
    """Per-epsilon sup errors and the fitted log-log slopes."""

    epsilons: np.ndarray  # decreasing
    sup_center_err: np.ndarray
    max_support_radius: np.ndarray
    fitted_center_slope: float
    fitted_support_slope: float

    @classmethod
    def from_measurements(cls, epsilons, sup_center_err, max_support_radius):
        eps = np.asarray(epsilons, dtype=float)
        if len(eps) >= 2 and not np.all(np.diff(eps) < 0.0):
            raise ConfigurationError("epsilons must be strictly decreasing")
        ce = np.asarray(sup_center_err, dtype=float)
        sr = np.asarray(max_support_radius, dtype=float)
        if len(eps) >= 3:
            c_slope = _loglog_slope(eps, ce)
            s_slope = _loglog_slope(eps, sr)
        else:
            c_slope = math.nan
            s_slope = math.nan
        return cls(eps, ce, sr, c_slope, s_slope)


def _loglog_slope(eps: np.ndarray, obs: np.ndarray) -> float:
    if np.any(obs <= 0.0):
        raise ValueError("log-log fit needs strictly positive observables")
    return float(np.polyfit(np.log(eps), np.log(obs), 1)[0])


def fit_exponent(sweep: SweepResult, observable: str) -> float:
    """Least-squares slope of log(observable) against log(epsilon)."""
    if len(sweep.epsilons) < 3:
        raise ValueError("need at least 3 epsilon values to fit a slope")
    if observable == "center_err":
        return _loglog_slope(sweep.epsilons, sweep.sup_center_err)
    if observable == "support_radius":
        return _loglog_slope(sweep.epsilons, sweep.max_support_radius)
    raise ValueError(f"unknown observable {observable!r}")


@dataclass(frozen=True)
class GronwallReport:
    """Moment-of-inertia growth against the envelope I(0) e^(2 L2 t)."""

    times: np.ndarray
    inertia: np.ndarray
    envelope: np.ndarray
    per_snapshot_ok: np.ndarray
    first_violation_time: Optional[float]

    @property
    def ok(self) -> bool:
        return self.first_violation_time is None


def check_gronwall(traj: BlobTrajectory, L2: float, blob: int = 0) -> GronwallReport:
    if not L2 > 0.0:
        raise ValueError(f"L2 must be positive, got {L2}")
    times = np.asarray(traj.times, dtype=float)
    inertia = np.array([measure(c, blob)[1] for c in traj.clouds])
    envelope = inertia[0] * np.exp(2.0 * L2 * times)
    ok = inertia <= envelope
    first = None if ok.all() else float(times[int(np.argmin(ok))])
    return GronwallReport(
        times=times, inertia=inertia, envelope=envelope,
        per_snapshot_ok=ok, first_violation_time=first,
    )


def distribution_check(cloud_t0: ParticleCloud, cloud_t: ParticleCloud) -> float:
    """Max discrepancy between the sorted (weight, vorticity) multisets.

    Weights and carried vorticity are constant by construction, so any
    nonzero value means the transport invariance was broken.
    """
    if cloud_t0.n != cloud_t.n:
        raise ConfigurationError("particle counts differ")
    if not np.array_equal(cloud_t0.blob_id, cloud_t.blob_id):
        raise ConfigurationError("blob structure differs")
    worst = 0.0
    for b in range(cloud_t0.blob_count):
        m0 = cloud_t0.blob_id == b
        for field0, field1 in (
            (cloud_t0.weights[m0], cloud_t.weights[m0]),
            (cloud_t0.vorticity_values[m0], cloud_t.vorticity_values[m0]),
        ):
            d = np.max(np.abs(np.sort(field0) - np.sort(field1))) if field0.size else 0.0
            worst = max(worst, float(d))
    return worst


def measure_force_bounds(
    field: RegularizedField,
    traj: BlobTrajectory,
    workers=None,
) -> tuple[float, float]:
    """(L1, L2): sup |F| and the max pairwise Lipschitz quotient of F,
    sampled at particle positions over all recorded snapshots."""
    l1 = 0.0
    l2 = 0.0
    for cloud in traj.clouds:
        f = boundary_force_at(field, cloud, cloud.positions, workers=workers)
        l1 = max(l1, float(np.max(np.hypot(f[:, 0], f[:, 1]))))
        l2 = max(l2, float(_kernels.lipschitz_quotient(cloud.positions, f)))
    return l1, l2
