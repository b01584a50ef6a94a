"""Point-vortex dynamics in a bounded domain.

A single vortex drifts along level lines of the Robin function,
dz/dt = -J grad H(z).  For k vortices with strengths a_i the velocity of
vortex i combines pairwise Green-function interaction with the self term
from the boundary:

    dz_i/dt = sum_{j != i} a_j J grad_x G(z_i, z_j) - a_i J grad_x h(z_i, z_i)

where grad_x h on the diagonal equals grad H.  The conserved quantity is

    W = sum_{i<j} a_i a_j G(z_i, z_j) - sum_i a_i^2 H(z_i)

whose level sets the flow preserves (dz_i/dt = J grad_{z_i} W / a_i, and
v . J v = 0).  For a single unit vortex W = -H, so W-drift equals H-drift.

Integration is classical fixed-step RK4: 4th order, reproducible
bit-for-bit for a given configuration, with loud halts near collisions or
the boundary instead of silently integrating past validity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from ._schedule import step_schedule
from .errors import (
    ConfigurationError,
    DomainError,
    NumericalHaltError,
    SingularityError,
)
from .geometry import (
    DomainModel,
    Point2,
    UnitDisk,
    Vec2,
    gamma,
    grad_gamma_x,
    rotate_cw,
)


@dataclass(frozen=True)
class VortexConfig:
    """Positions z_i and signed strengths a_i of k point vortices."""

    positions: np.ndarray  # (k, 2)
    strengths: np.ndarray  # (k,)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim == 1:
            pos = pos[None, :]
        st = np.atleast_1d(np.asarray(self.strengths, dtype=float))
        if pos.shape != (st.shape[0], 2):
            raise ConfigurationError(
                f"positions {pos.shape} and strengths {st.shape} do not match"
            )
        if not (np.isfinite(pos).all() and np.isfinite(st).all()):
            raise ConfigurationError("vortex positions and strengths must be finite")
        for i in range(len(st)):
            for j in range(i + 1, len(st)):
                if pos[i, 0] == pos[j, 0] and pos[i, 1] == pos[j, 1]:
                    raise ConfigurationError(f"vortices {i} and {j} coincide")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "strengths", st)

    @property
    def count(self) -> int:
        return self.strengths.shape[0]


@dataclass(frozen=True)
class OdeSolution:
    """Time series of vortex positions with the conserved quantity W.

    ``hamiltonian`` is None for trajectories of an externally supplied
    force field (no conserved W exists there); the CSV then carries nan.
    """

    times: np.ndarray  # (n,)
    positions: np.ndarray  # (n, k, 2)
    strengths: np.ndarray  # (k,)
    hamiltonian: Optional[np.ndarray]  # (n,) or None

    @property
    def count(self) -> int:
        return self.strengths.shape[0]

    def state(self, i: int) -> VortexConfig:
        return VortexConfig(self.positions[i].copy(), self.strengths.copy())

    def states(self) -> Iterator[VortexConfig]:
        for i in range(self.times.shape[0]):
            yield self.state(i)

    def interpolate(self, t: float) -> np.ndarray:
        """Linear interpolation of all vortex positions at time t."""
        times = self.times
        if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
            raise ValueError(f"t={t} outside solution range [{times[0]}, {times[-1]}]")
        i = int(np.searchsorted(times, t, side="right")) - 1
        i = max(0, min(i, len(times) - 2))
        t0, t1 = times[i], times[i + 1]
        lam = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        return (1.0 - lam) * self.positions[i] + lam * self.positions[i + 1]

    def to_csv(self, path) -> None:
        k = self.count
        cols = ["t"]
        for i in range(1, k + 1):
            cols += [f"z{i}x", f"z{i}y"]
        cols.append("W")
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(",".join(cols) + "\n")
            for row in range(self.times.shape[0]):
                vals = [repr(float(self.times[row]))]
                for i in range(k):
                    vals.append(repr(float(self.positions[row, i, 0])))
                    vals.append(repr(float(self.positions[row, i, 1])))
                w = float("nan") if self.hamiltonian is None else float(self.hamiltonian[row])
                vals.append(repr(w))
                f.write(",".join(vals) + "\n")


def kr_velocity_single(d: DomainModel, z: Point2) -> Vec2:
    """Drift of a single unit vortex: -J grad H(z)."""
    return -rotate_cw(d.grad_robin(z))


def kr_velocity_k(d: DomainModel, cfg: VortexConfig, i: int) -> Vec2:
    """Velocity of vortex i in the k-vortex system."""
    pos = cfg.positions
    a = cfg.strengths
    zi = pos[i]
    acc = np.zeros(2)
    for j in range(cfg.count):
        if j == i:
            continue
        zj = pos[j]
        if zi[0] == zj[0] and zi[1] == zj[1]:
            raise SingularityError(f"vortices {i} and {j} coincide")
        grad_g = grad_gamma_x(zi, zj) - d.grad_regular_x(zi, zj)
        acc = acc + a[j] * rotate_cw(grad_g)
    # self term: grad_x h on the diagonal equals grad H
    acc = acc - a[i] * rotate_cw(d.grad_robin(zi))
    return acc


def hamiltonian(d: DomainModel, cfg: VortexConfig) -> float:
    """W = sum_{i<j} a_i a_j G(z_i, z_j) - sum_i a_i^2 H(z_i)."""
    pos = cfg.positions
    a = cfg.strengths
    w = 0.0
    for i in range(cfg.count):
        for j in range(i + 1, cfg.count):
            g = gamma(pos[i], pos[j]) - d.regular_part(pos[i], pos[j])
            w += a[i] * a[j] * g
        w -= a[i] * a[i] * d.robin(pos[i])
    return w


def _velocities(d: DomainModel, pos: np.ndarray, a: np.ndarray) -> np.ndarray:
    k = a.shape[0]
    out = np.empty_like(pos)
    for i in range(k):
        zi = pos[i]
        ax = 0.0
        ay = 0.0
        for j in range(k):
            if j == i:
                continue
            gg = grad_gamma_x(zi, pos[j]) - d.grad_regular_x(zi, pos[j])
            ax += a[j] * gg[1]
            ay -= a[j] * gg[0]
        gh = d.grad_robin(zi)
        ax -= a[i] * gh[1]
        ay += a[i] * gh[0]
        out[i, 0] = ax
        out[i, 1] = ay
    return out


def integrate(d: DomainModel, cfg0: VortexConfig, T: float, dt: float) -> OdeSolution:
    """RK4 integration of the k-vortex system over [0, T].

    Records every step.  Halts with NumericalHaltError if any vortex
    comes within 2*dt*(max speed so far) of the boundary or of another
    vortex: past that point the fixed step cannot be trusted.
    """
    if not (dt > 0.0 and T > 0.0):
        raise ConfigurationError(f"need positive T and dt, got T={T}, dt={dt}")
    for i in range(cfg0.count):
        d.require_interior(cfg0.positions[i], f"vortex {i}")

    a = cfg0.strengths
    k = cfg0.count
    steps = list(step_schedule(T, dt))
    n = len(steps)
    times = np.empty(n + 1)
    traj = np.empty((n + 1, k, 2))
    ham = np.empty(n + 1)
    pos = cfg0.positions.copy()
    times[0] = 0.0
    traj[0] = pos
    ham[0] = hamiltonian(d, VortexConfig(pos, a))

    n_full = len([s for s in steps if s == dt])
    vmax = 0.0
    t = 0.0
    for step_idx, h in enumerate(steps):
        try:
            v1 = _velocities(d, pos, a)
            vmax = max(vmax, float(np.max(np.hypot(v1[:, 0], v1[:, 1]))))
            v2 = _velocities(d, pos + (0.5 * h) * v1, a)
            v3 = _velocities(d, pos + (0.5 * h) * v2, a)
            v4 = _velocities(d, pos + h * v3, a)
        except (DomainError, SingularityError) as e:
            raise NumericalHaltError(t, f"step evaluation failed: {e}") from e
        pos = pos + (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4)
        # non-accumulating clock: one rounding per time stamp
        t = (step_idx + 1) * dt if step_idx + 1 <= n_full else T

        thr = 2.0 * dt * vmax
        for i in range(k):
            if not d.contains(pos[i]):
                raise NumericalHaltError(t, f"vortex {i} left the domain")
            if d.dist_to_boundary(pos[i]) < thr:
                raise NumericalHaltError(
                    t, f"vortex {i} within {thr:.3g} of the boundary"
                )
            for j in range(i + 1, k):
                sep = math.hypot(pos[i, 0] - pos[j, 0], pos[i, 1] - pos[j, 1])
                if sep < thr:
                    raise NumericalHaltError(
                        t, f"vortices {i} and {j} within {thr:.3g} of collision"
                    )

        times[step_idx + 1] = t
        traj[step_idx + 1] = pos
        ham[step_idx + 1] = hamiltonian(d, VortexConfig(pos, a))

    return OdeSolution(times=times, positions=traj, strengths=a.copy(), hamiltonian=ham)


def select_rho0(sol: OdeSolution, d: DomainModel) -> float:
    """Safety radius: 0.9 x the minimum clearance along the trajectory.

    Clearance is the smaller of distance-to-boundary and (for k >= 2) the
    minimum inter-vortex separation over all recorded states.
    """
    k = sol.count
    pos = sol.positions
    if isinstance(d, UnitDisk):
        radii = np.hypot(pos[..., 0], pos[..., 1])
        m = float(np.min(1.0 - radii))
    else:
        m = math.inf
        for row in range(pos.shape[0]):
            for i in range(k):
                m = min(m, d.dist_to_boundary(pos[row, i]))
    for i in range(k):
        for j in range(i + 1, k):
            sep = np.hypot(
                pos[:, i, 0] - pos[:, j, 0], pos[:, i, 1] - pos[:, j, 1]
            )
            m = min(m, float(np.min(sep)))
    rho0 = 0.9 * m
    if not rho0 > 0.0:
        raise ConfigurationError(
            "trajectory touches the boundary within resolution; no valid rho0"
        )
    return rho0


def integrate_center(
    force: Callable[[Point2, float], Vec2],
    z0: Point2,
    T: float,
    dt: float,
) -> OdeSolution:
    """RK4 solution of dz/dt = -force(z, t), recording every step."""
    if not (dt > 0.0 and T > 0.0):
        raise ConfigurationError(f"need positive T and dt, got T={T}, dt={dt}")
    steps = list(step_schedule(T, dt))
    n = len(steps)
    times = np.empty(n + 1)
    traj = np.empty((n + 1, 1, 2))
    z = np.asarray(z0, dtype=float).copy()
    times[0] = 0.0
    traj[0, 0] = z
    n_full = len([s for s in steps if s == dt])
    t = 0.0
    for step_idx, h in enumerate(steps):
        v1 = -np.asarray(force(z, t))
        v2 = -np.asarray(force(z + (0.5 * h) * v1, t + 0.5 * h))
        v3 = -np.asarray(force(z + (0.5 * h) * v2, t + 0.5 * h))
        v4 = -np.asarray(force(z + h * v3, t + h))
        z = z + (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4)
        t = (step_idx + 1) * dt if step_idx + 1 <= n_full else T
        times[step_idx + 1] = t
        traj[step_idx + 1, 0] = z
    return OdeSolution(
        times=times, positions=traj, strengths=np.array([1.0]), hamiltonian=None
    )
