"""Particle discretization of concentrated vorticity and its evolution.

The vorticity is carried by point particles: each particle holds a fixed
circulation weight (transport preserves vorticity along paths, so weights
never change) and moves with the regularized velocity field.  The
free-space log-kernel part skips the particle's own singular term; the
smooth boundary part includes it, which is exactly what makes a
one-particle cloud reproduce the point-vortex drift.

Summation is O(N^2) direct, in ascending source order with compensated
accumulation: trajectories are bit-identical for any worker count, and the
antisymmetric pairwise momentum cancellation survives at rounding level.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _kernels
from ._parallel import resolve_workers, run_chunked
from ._schedule import step_schedule
from .cutoff import CutoffPair, SmoothedLog
from .errors import (
    ConfigurationError,
    DomainError,
    NumericalHaltError,
    SingularityError,
)
from .geometry import DomainModel, Point2, UnitDisk, Vec2

SINGULARITY_DIST = 1e-12
_SINGULARITY_DIST2 = SINGULARITY_DIST * SINGULARITY_DIST


class FieldMode(enum.Enum):
    SINGLE_BLOB = "single_blob"
    K_BLOB = "k_blob"
    EXACT_GREEN = "exact_green"


@dataclass(frozen=True)
class RegularizedField:
    """Velocity-field recipe: domain, cutoffs, smoothing and mode.

    In EXACT_GREEN mode the cutoffs are ignored by the velocity (the full
    Green function is used) and the field is valid only while every
    particle stays inside the domain.  K_BLOB requires the smoothed log
    kernel for inter-blob interactions.
    """

    domain: DomainModel
    cutoffs: Optional[CutoffPair]
    smoothed: Optional[SmoothedLog]
    mode: FieldMode

    def __post_init__(self):
        if not isinstance(self.domain, UnitDisk):
            raise NotImplementedError(
                "particle kernels are specialized to the unit disk; map other "
                "domains through geometry.ConformalPullback for Green-function "
                "work, or run blob dynamics on the disk"
            )
        if self.mode in (FieldMode.SINGLE_BLOB, FieldMode.K_BLOB) and self.cutoffs is None:
            raise ConfigurationError(f"{self.mode.value} mode needs a CutoffPair")
        if self.mode is FieldMode.K_BLOB and self.smoothed is None:
            raise ConfigurationError("k_blob mode needs a SmoothedLog")

    @property
    def rho0(self) -> Optional[float]:
        return None if self.cutoffs is None else self.cutoffs.rho0


@dataclass(frozen=True)
class ParticleCloud:
    """Weighted particles carrying the discretized vorticity.

    Weights are circulations (vorticity times initial cell area) and are
    constant in time.  ``vorticity_values`` keeps the vorticity level of
    each particle's initial cell for distribution-invariance checks.
    """

    positions: np.ndarray  # (n, 2)
    weights: np.ndarray  # (n,)
    blob_id: np.ndarray  # (n,) int64
    epsilon: float
    vorticity_values: np.ndarray  # (n,)

    def __post_init__(self):
        pos = np.ascontiguousarray(np.asarray(self.positions, dtype=float))
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=float))
        bid = np.ascontiguousarray(np.asarray(self.blob_id, dtype=np.int64))
        vv = np.ascontiguousarray(np.asarray(self.vorticity_values, dtype=float))
        n = pos.shape[0]
        if pos.shape != (n, 2) or w.shape != (n,) or bid.shape != (n,) or vv.shape != (n,):
            raise ConfigurationError("inconsistent particle array shapes")
        if not self.epsilon > 0.0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")
        if not np.isfinite(pos).all():
            raise ConfigurationError("particle positions must be finite")
        for arr in (pos, w, bid, vv):
            arr.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "blob_id", bid)
        object.__setattr__(self, "vorticity_values", vv)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def blob_count(self) -> int:
        return int(self.blob_id.max()) + 1 if self.n else 0

    def with_positions(self, positions: np.ndarray) -> "ParticleCloud":
        return replace(self, positions=positions)


def make_initial_cloud(
    domain: DomainModel,
    z0: Point2,
    eps: float,
    a: float,
    n_target: int,
    profile: str = "uniform",
) -> ParticleCloud:
    """Uniform vortex patch of radius eps at z0, discretized on a grid.

    Cells of a square grid centered at z0 whose centers fall inside the
    eps-disk become particles; the cell size is chosen so that about
    n_target of them do.  Each particle carries weight (a / pi eps^2) *
    cell_area, renormalized so the total circulation is a.  The grid is
    symmetric about z0, so the initial center of vorticity is z0 to
    rounding.
    """
    if profile != "uniform":
        raise ConfigurationError(f"unknown profile {profile!r}")
    if n_target < 16:
        raise ConfigurationError(f"n_target must be at least 16, got {n_target}")
    if not eps > 0.0:
        raise ConfigurationError(f"eps must be positive, got {eps}")
    if a == 0.0:
        raise ConfigurationError("blob circulation a must be nonzero")
    z0 = np.asarray(z0, dtype=float)
    if domain.dist_to_boundary(z0) <= eps:
        raise ConfigurationError(
            f"blob of radius {eps} at {tuple(z0)} overlaps the boundary "
            f"(clearance {domain.dist_to_boundary(z0):.6g})"
        )
    cell = eps * math.sqrt(math.pi / n_target)
    m = int(math.ceil(eps / cell)) + 1
    offs = (np.arange(-m, m) + 0.5) * cell
    ox, oy = np.meshgrid(offs, offs)  # row-major: y outer, x inner
    ox = ox.ravel()
    oy = oy.ravel()
    inside = ox * ox + oy * oy < eps * eps
    ox = ox[inside]
    oy = oy[inside]
    n = ox.shape[0]
    omega0 = a / (math.pi * eps * eps)
    w0 = omega0 * cell * cell
    weights = np.full(n, w0)
    total = math.fsum(weights)
    weights *= a / total
    positions = np.column_stack([z0[0] + ox, z0[1] + oy])
    return ParticleCloud(
        positions=positions,
        weights=weights,
        blob_id=np.zeros(n, dtype=np.int64),
        epsilon=eps,
        vorticity_values=np.full(n, omega0),
    )


def merge_clouds(clouds: list[ParticleCloud]) -> ParticleCloud:
    """Concatenate per-blob clouds, assigning blob ids 0..k-1 in order."""
    if not clouds:
        raise ConfigurationError("no clouds to merge")
    eps = clouds[0].epsilon
    for c in clouds[1:]:
        if c.epsilon != eps:
            raise ConfigurationError("all blobs must share one concentration scale")
    positions = np.concatenate([c.positions for c in clouds])
    weights = np.concatenate([c.weights for c in clouds])
    vv = np.concatenate([c.vorticity_values for c in clouds])
    bid = np.concatenate(
        [np.full(c.n, i, dtype=np.int64) for i, c in enumerate(clouds)]
    )
    return ParticleCloud(
        positions=positions, weights=weights, blob_id=bid, epsilon=eps,
        vorticity_values=vv,
    )


def _chi_weights(field: RegularizedField, positions: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """w_j * chi(p_j), vectorized with the same profile as cutoff.eval_chi."""
    hi = field.cutoffs.rho0 / 10.0
    d = 1.0 - np.sqrt(positions[:, 0] ** 2 + positions[:, 1] ** 2)
    t = d / hi
    s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    chi = np.where(d <= 0.0, 0.0, np.where(d >= hi, 1.0, s))
    return weights * chi


def _require_inside_disk(positions: np.ndarray, t: float) -> None:
    if np.any(positions[:, 0] ** 2 + positions[:, 1] ** 2 >= 1.0):
        raise NumericalHaltError(
            t, "a particle left the domain while the exact Green field was in use"
        )


def _velocity_all(
    field: RegularizedField,
    cloud: ParticleCloud,
    positions: np.ndarray,
    targets: np.ndarray,
    tgt_blob: np.ndarray,
    skip: np.ndarray,
    workers,
    t: float = 0.0,
) -> tuple[np.ndarray, float]:
    nt = targets.shape[0]
    out = np.empty((nt, 2))
    minr2 = np.empty(nt)
    syy = positions[:, 0] ** 2 + positions[:, 1] ** 2
    w = cloud.weights
    if field.mode is FieldMode.SINGLE_BLOB:
        wchi = _chi_weights(field, positions, w)
        rho0 = field.cutoffs.rho0

        def body(t0, t1):
            _kernels.vel_cutoff(positions, w, wchi, syy, targets, skip, rho0, t0, t1, out, minr2)

    elif field.mode is FieldMode.EXACT_GREEN:
        _require_inside_disk(positions, t)
        if np.any(targets[:, 0] ** 2 + targets[:, 1] ** 2 >= 1.0):
            raise DomainError("exact-Green velocity requested outside the domain")

        def body(t0, t1):
            _kernels.vel_exact(positions, w, syy, targets, skip, t0, t1, out, minr2)

    else:
        wchi = _chi_weights(field, positions, w)
        rho0 = field.cutoffs.rho0
        cut = field.smoothed.cut_radius
        cut2 = cut * cut
        sblob = cloud.blob_id

        def body(t0, t1):
            _kernels.vel_kblob(
                positions, w, wchi, syy, sblob, targets, tgt_blob, skip,
                rho0, cut2, t0, t1, out, minr2,
            )

    run_chunked(body, nt, workers)
    return out, float(np.min(minr2)) if nt else math.inf


def velocity_at(
    field: RegularizedField,
    cloud: ParticleCloud,
    x: Point2,
    skip: Optional[int] = None,
    target_blob: Optional[int] = None,
    workers: int = 1,
) -> Vec2:
    """Regularized fluid velocity at a point.

    ``skip`` excludes that particle's own log-kernel term (its smooth
    boundary contribution stays in).  In K_BLOB mode the target must be
    attributed to a blob, either through ``skip`` or ``target_blob``.
    """
    x = np.asarray(x, dtype=float)
    if field.mode is FieldMode.K_BLOB:
        if target_blob is None:
            if skip is None:
                raise ConfigurationError(
                    "k_blob velocity needs target_blob (or skip, to infer it)"
                )
            target_blob = int(cloud.blob_id[skip])
        tblob = np.array([target_blob], dtype=np.int64)
    else:
        tblob = np.zeros(1, dtype=np.int64)
    sk = np.array([-1 if skip is None else int(skip)], dtype=np.int64)
    v, mr2 = _velocity_all(
        field, cloud, cloud.positions, x[None, :], tblob, sk, workers
    )
    if mr2 < _SINGULARITY_DIST2:
        raise SingularityError(
            f"velocity requested within {SINGULARITY_DIST} of a particle"
        )
    return v[0]


def boundary_force_at(
    field: RegularizedField,
    cloud: ParticleCloud,
    points: np.ndarray,
    workers=1,
) -> np.ndarray:
    """The smooth boundary force F alone, at each of the given points."""
    if field.cutoffs is None:
        raise ConfigurationError("boundary force needs a CutoffPair on the field")
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    positions = cloud.positions
    syy = positions[:, 0] ** 2 + positions[:, 1] ** 2
    wchi = _chi_weights(field, positions, cloud.weights)
    rho0 = field.cutoffs.rho0
    out = np.empty_like(pts)

    def body(t0, t1):
        _kernels.force_cutoff(positions, wchi, syy, pts, rho0, t0, t1, out)

    run_chunked(body, pts.shape[0], workers)
    return out


def boundary_force(field: RegularizedField, cloud: ParticleCloud, x: Point2) -> Vec2:
    return boundary_force_at(field, cloud, np.asarray(x, dtype=float)[None, :])[0]


def gamma_momentum_residual(cloud: ParticleCloud) -> Vec2:
    """Pairwise log-kernel contribution to d/dt of the weighted position sum.

    Exactly antisymmetric term by term; the returned vector is pure
    compensated-summation residue and must sit at rounding level.
    """
    return _kernels.gamma_momentum(cloud.positions, cloud.weights)


def step(
    field: RegularizedField,
    cloud: ParticleCloud,
    dt: float,
    workers=None,
    _t: float = 0.0,
) -> ParticleCloud:
    """One RK4 step of every particle; weights are untouched.

    dt may be negative (backward step), just not zero.
    """
    if dt == 0.0:
        raise ConfigurationError("dt must be nonzero")
    w = resolve_workers(workers)
    p0 = cloud.positions
    skip = np.arange(cloud.n, dtype=np.int64)
    tblob = cloud.blob_id

    def vel(p):
        v, mr2 = _velocity_all(field, cloud, p, p, tblob, skip, w, _t)
        if mr2 < _SINGULARITY_DIST2:
            raise SingularityError(
                f"particle pair closer than {SINGULARITY_DIST} at t={_t:.6g}"
            )
        return v

    v1 = vel(p0)
    v2 = vel(p0 + (0.5 * dt) * v1)
    v3 = vel(p0 + (0.5 * dt) * v2)
    v4 = vel(p0 + dt * v3)
    pn = p0 + (dt / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4)
    return cloud.with_positions(pn)


@dataclass(frozen=True)
class BlobEvent:
    time: float
    kind: str  # "exit_domain" | "enter_inner_band"
    count: int


@dataclass(frozen=True)
class BlobTrajectory:
    times: np.ndarray  # (n_snapshots,)
    clouds: list
    events: list
    dt: float
    mode: FieldMode

    @property
    def n_snapshots(self) -> int:
        return len(self.clouds)


def run(
    field: RegularizedField,
    cloud0: ParticleCloud,
    T: float,
    dt: float,
    record_every: int = 100,
    workers=None,
) -> BlobTrajectory:
    """Evolve the cloud over [0, T], recording snapshots and events.

    Events flag particles leaving the domain (the regularized system lives
    on the whole plane, so this is recorded, not clamped) and particles
    entering the near-boundary band of depth rho0/3.
    """
    if not (T > 0.0 and dt > 0.0):
        raise ConfigurationError(f"need positive T and dt, got T={T}, dt={dt}")
    if record_every < 1:
        raise ConfigurationError("record_every must be >= 1")
    w = resolve_workers(workers)

    if cloud0.n > 1:
        mind = math.sqrt(_kernels.min_pair_dist2(cloud0.positions))
        if dt > mind * mind * math.pi:
            warnings.warn(
                f"dt={dt} exceeds the stability heuristic "
                f"(min pair distance)^2 * pi = {mind * mind * math.pi:.3g}",
                stacklevel=2,
            )

    rho0 = field.rho0
    band = None if rho0 is None else rho0 / 3.0

    times = [0.0]
    clouds = [cloud0]
    events: list[BlobEvent] = []

    def radii2(c):
        p = c.positions
        return p[:, 0] ** 2 + p[:, 1] ** 2

    prev_out = radii2(cloud0) >= 1.0
    if band is not None:
        prev_band = (1.0 - np.sqrt(radii2(cloud0))) < band
    cloud = cloud0
    t = 0.0
    steps = list(step_schedule(T, dt))
    n_full = len([s for s in steps if s == dt])
    for k, h in enumerate(steps):
        cloud = step(field, cloud, h, workers=w, _t=t)
        # non-accumulating clock: one rounding per time stamp
        t = (k + 1) * dt if k + 1 <= n_full else T
        p = cloud.positions
        if not np.isfinite(p).all():
            raise NumericalHaltError(t, "non-finite particle position")
        r2 = p[:, 0] ** 2 + p[:, 1] ** 2
        out_now = r2 >= 1.0
        new_out = out_now & ~prev_out
        if new_out.any():
            events.append(BlobEvent(time=t, kind="exit_domain", count=int(new_out.sum())))
        prev_out = out_now
        if band is not None:
            band_now = (1.0 - np.sqrt(r2)) < band
            new_band = band_now & ~prev_band & ~out_now
            if new_band.any():
                events.append(
                    BlobEvent(time=t, kind="enter_inner_band", count=int(new_band.sum()))
                )
            prev_band = band_now
        if (k + 1) % record_every == 0 or k == len(steps) - 1:
            times.append(t)
            clouds.append(cloud)

    return BlobTrajectory(
        times=np.asarray(times), clouds=clouds, events=events, dt=dt, mode=field.mode
    )
