"""Bounded planar domains and their Dirichlet Green functions.

The Green function of -Laplace with zero boundary data splits as
G(x,y) = gamma(x,y) - h(x,y), where gamma is the free-space logarithmic
kernel and h is the harmonic regular part.  For the unit disk everything
has a closed form via the image point (Kelvin reflection):

    h(x,y) = -(1/4pi) * ln(|x|^2 |y|^2 - 2 x.y + 1)

which is the continuous extension of -(1/2pi) ln(|y| |x - y/|y|^2|) through
y = 0.  Other simply connected domains are supported by pulling the disk
formulas back through a user-supplied conformal map.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError, SingularityError

# Points and vectors are plain float64 arrays of shape (2,).
Point2 = np.ndarray
Vec2 = np.ndarray

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi


def pt(x: float, y: float) -> Point2:
    return np.array([float(x), float(y)])


def rotate_cw(v: Vec2) -> Vec2:
    """Clockwise quarter turn: (v1, v2) -> (v2, -v1)."""
    return np.array([v[1], -v[0]])


def gamma(x: Point2, y: Point2) -> float:
    """Free-space kernel -(1/2pi) ln|x - y|."""
    dx = x[0] - y[0]
    dy = x[1] - y[1]
    r2 = dx * dx + dy * dy
    if r2 == 0.0:
        raise SingularityError("gamma evaluated at coincident points")
    return -math.log(r2) / FOUR_PI


def grad_gamma_x(x: Point2, y: Point2) -> Vec2:
    """Gradient of gamma in its first argument."""
    dx = x[0] - y[0]
    dy = x[1] - y[1]
    r2 = dx * dx + dy * dy
    if r2 == 0.0:
        raise SingularityError("grad_gamma_x evaluated at coincident points")
    c = -1.0 / (TWO_PI * r2)
    return np.array([c * dx, c * dy])


@dataclass(frozen=True)
class GreenEval:
    """One evaluation of the Green function decomposition at (x, y)."""

    gamma: float
    h: float
    g: float
    grad_x_gamma: Vec2
    grad_x_h: Vec2


class DomainModel(ABC):
    """A bounded simply connected domain with its Green function pieces."""

    kind: str

    @abstractmethod
    def contains(self, p: Point2) -> bool:
        """True iff p lies in the open domain."""

    @abstractmethod
    def dist_to_boundary(self, p: Point2) -> float:
        ...

    @abstractmethod
    def grad_dist_to_boundary(self, p: Point2) -> Vec2:
        """Unit vector pointing away from the nearest boundary point."""

    @abstractmethod
    def boundary_points(self, n: int) -> np.ndarray:
        """(n, 2) samples of the boundary, just outside the containment set."""

    @abstractmethod
    def regular_part(self, x: Point2, y: Point2) -> float:
        ...

    @abstractmethod
    def grad_regular_x(self, x: Point2, y: Point2) -> Vec2:
        ...

    @abstractmethod
    def robin(self, x: Point2) -> float:
        ...

    @abstractmethod
    def grad_robin(self, x: Point2) -> Vec2:
        ...

    def require_interior(self, p: Point2, what: str = "point") -> None:
        if not self.contains(p):
            raise DomainError(f"{what} {tuple(p)} is not interior to the domain")


class UnitDisk(DomainModel):
    """The open unit disk, with closed-form image-point Green function."""

    kind = "unit_disk"

    def contains(self, p: Point2) -> bool:
        return p[0] * p[0] + p[1] * p[1] < 1.0

    def dist_to_boundary(self, p: Point2) -> float:
        return 1.0 - math.hypot(p[0], p[1])

    def grad_dist_to_boundary(self, p: Point2) -> Vec2:
        r = math.hypot(p[0], p[1])
        if r == 0.0:
            raise DomainError("distance gradient is undefined at the disk center")
        return np.array([-p[0] / r, -p[1] / r])

    def boundary_points(self, n: int) -> np.ndarray:
        # Nudged outward so the containment predicate is strictly false at
        # every sample while staying within 1e-10 of the circle.
        th = np.linspace(0.0, TWO_PI, n, endpoint=False)
        scale = 1.0 + 1e-13
        return np.column_stack([scale * np.cos(th), scale * np.sin(th)])

    def regular_part(self, x: Point2, y: Point2) -> float:
        self.require_interior(x, "x")
        self.require_interior(y, "y")
        q = self._q(x, y)
        return -math.log(q) / FOUR_PI

    def grad_regular_x(self, x: Point2, y: Point2) -> Vec2:
        self.require_interior(x, "x")
        self.require_interior(y, "y")
        q = self._q(x, y)
        yy = y[0] * y[0] + y[1] * y[1]
        c = -1.0 / (TWO_PI * q)
        return np.array([c * (x[0] * yy - y[0]), c * (x[1] * yy - y[1])])

    def robin(self, x: Point2) -> float:
        self.require_interior(x, "x")
        xx = x[0] * x[0] + x[1] * x[1]
        return -math.log(1.0 - xx) / FOUR_PI

    def grad_robin(self, x: Point2) -> Vec2:
        self.require_interior(x, "x")
        xx = x[0] * x[0] + x[1] * x[1]
        c = 1.0 / (TWO_PI * (1.0 - xx))
        return np.array([c * x[0], c * x[1]])

    @staticmethod
    def _q(x: Point2, y: Point2) -> float:
        # |x|^2 |y|^2 - 2 x.y + 1 >= (1 - |x||y|)^2 > 0 for interior points.
        xx = x[0] * x[0] + x[1] * x[1]
        yy = y[0] * y[0] + y[1] * y[1]
        dot = x[0] * y[0] + x[1] * y[1]
        return xx * yy - 2.0 * dot + 1.0


def _c2v(z: complex) -> Vec2:
    return np.array([z.real, z.imag])


def _v2c(p: Point2) -> complex:
    return complex(p[0], p[1])


class ConformalPullback(DomainModel):
    """A domain given as the image of the unit disk under a conformal map.

    The Green function is conformally invariant, so with g = map_inverse
    (domain -> disk):

        G_D(x, y) = G_disk(g(x), g(y))
        H_D(x)    = H_disk(g(x)) + (1/4pi) ln|g'(x)|

    All maps are callables on complex numbers.  ``map_forward`` must be
    evaluable in a small neighborhood of the closed disk (boundary sampling
    nudges its argument outward by ~1e-13).  ``d2_map_inverse`` is required
    only for ``grad_robin``; gradients are always computed from the supplied
    derivatives, never by numerical differencing.

    ``dist_to_boundary`` is the minimum distance to ``boundary_resolution``
    sampled boundary points, exact only up to that resolution.
    """

    kind = "conformal_pullback"

    def __init__(
        self,
        map_forward: Callable[[complex], complex],
        map_inverse: Callable[[complex], complex],
        d_map_inverse: Callable[[complex], complex],
        d2_map_inverse: Optional[Callable[[complex], complex]] = None,
        boundary_resolution: int = 512,
    ):
        if boundary_resolution < 8:
            raise ConfigurationError("boundary_resolution must be at least 8")
        self.map_forward = map_forward
        self.map_inverse = map_inverse
        self.d_map_inverse = d_map_inverse
        self.d2_map_inverse = d2_map_inverse
        self.boundary_resolution = boundary_resolution
        self._boundary_cache = self.boundary_points(boundary_resolution)
        self._disk = UnitDisk()

    def contains(self, p: Point2) -> bool:
        w = self.map_inverse(_v2c(p))
        return abs(w) < 1.0

    def dist_to_boundary(self, p: Point2) -> float:
        d = self._boundary_cache - np.asarray(p)[None, :]
        return float(np.sqrt(np.min(d[:, 0] ** 2 + d[:, 1] ** 2)))

    def grad_dist_to_boundary(self, p: Point2) -> Vec2:
        d = np.asarray(p)[None, :] - self._boundary_cache
        r2 = d[:, 0] ** 2 + d[:, 1] ** 2
        i = int(np.argmin(r2))
        r = math.sqrt(r2[i])
        if r == 0.0:
            raise DomainError("distance gradient is undefined on the boundary")
        return d[i] / r

    def boundary_points(self, n: int) -> np.ndarray:
        th = np.linspace(0.0, TWO_PI, n, endpoint=False)
        scale = 1.0 + 1e-13
        pts = np.empty((n, 2))
        for i, t in enumerate(th):
            z = self.map_forward(scale * complex(math.cos(t), math.sin(t)))
            pts[i, 0] = z.real
            pts[i, 1] = z.imag
        return pts

    def regular_part(self, x: Point2, y: Point2) -> float:
        self.require_interior(x, "x")
        self.require_interior(y, "y")
        u = self.map_inverse(_v2c(x))
        v = self.map_inverse(_v2c(y))
        if x[0] == y[0] and x[1] == y[1]:
            dg = self.d_map_inverse(_v2c(x))
            return self._disk.regular_part(_c2v(u), _c2v(v)) + math.log(abs(dg)) / TWO_PI
        g_disk = gamma(_c2v(u), _c2v(v)) - self._disk.regular_part(_c2v(u), _c2v(v))
        return gamma(x, y) - g_disk

    def grad_regular_x(self, x: Point2, y: Point2) -> Vec2:
        self.require_interior(x, "x")
        self.require_interior(y, "y")
        if x[0] == y[0] and x[1] == y[1]:
            raise SingularityError("grad_regular_x on the diagonal: use grad_robin")
        u = self.map_inverse(_v2c(x))
        v = self.map_inverse(_v2c(y))
        uu, vv = _c2v(u), _c2v(v)
        grad_g_disk = grad_gamma_x(uu, vv) - self._disk.grad_regular_x(uu, vv)
        dg = self.d_map_inverse(_v2c(x))
        # gradient of phi(g(x)) is conj(g'(x)) * grad phi in complex form
        pulled = dg.conjugate() * complex(grad_g_disk[0], grad_g_disk[1])
        return grad_gamma_x(x, y) - _c2v(pulled)

    def robin(self, x: Point2) -> float:
        self.require_interior(x, "x")
        u = self.map_inverse(_v2c(x))
        dg = self.d_map_inverse(_v2c(x))
        return self._disk.robin(_c2v(u)) + math.log(abs(dg)) / FOUR_PI

    def grad_robin(self, x: Point2) -> Vec2:
        self.require_interior(x, "x")
        if self.d2_map_inverse is None:
            raise ConfigurationError(
                "grad_robin for a conformal pullback needs d2_map_inverse"
            )
        z = _v2c(x)
        u = self.map_inverse(z)
        dg = self.d_map_inverse(z)
        d2g = self.d2_map_inverse(z)
        gh = self._disk.grad_robin(_c2v(u))
        pulled = dg.conjugate() * complex(gh[0], gh[1])
        # grad of (1/4pi) ln|g'| = (1/4pi) conj(g''/g')
        corr = (d2g / dg).conjugate() / FOUR_PI
        return _c2v(pulled + corr)


# Module-level operation aliases matching the package's public surface.

def regular_part(d: DomainModel, x: Point2, y: Point2) -> float:
    return d.regular_part(x, y)


def robin(d: DomainModel, x: Point2) -> float:
    return d.robin(x)


def grad_robin(d: DomainModel, x: Point2) -> Vec2:
    return d.grad_robin(x)


def dist_to_boundary(d: DomainModel, x: Point2) -> float:
    return d.dist_to_boundary(x)


def green_eval(d: DomainModel, x: Point2, y: Point2) -> GreenEval:
    """Evaluate gamma, h, G = gamma - h and the x-gradients at (x, y)."""
    gam = gamma(x, y)
    h = d.regular_part(x, y)
    return GreenEval(
        gamma=gam,
        h=h,
        g=gam - h,
        grad_x_gamma=grad_gamma_x(x, y),
        grad_x_h=d.grad_regular_x(x, y),
    )
