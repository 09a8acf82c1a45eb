"""Spin-direction observables with a {+1, -1} spectrum."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import ComplexMatrix

NORM_INPUT_TOL = 1e-9
COMMUTATOR_TOL = 1e-10


@dataclass(frozen=True)
class UnitVector3:
    """Real 3-vector of unit norm, i.e. a measurement direction.

    The input norm must be within 1e-9 of 1 (enough slack for accumulated
    float error from angle conversions); accepted vectors are renormalized
    exactly, anything further off is rejected.
    """

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        norm = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(norm - 1.0) > NORM_INPUT_TOL:
            raise ValueError(f"direction ({self.x}, {self.y}, {self.z}) has norm {norm!r}, not 1")
        object.__setattr__(self, "x", self.x / norm)
        object.__setattr__(self, "y", self.y / norm)
        object.__setattr__(self, "z", self.z / norm)

    def dot(self, other: "UnitVector3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def __neg__(self) -> "UnitVector3":
        return UnitVector3(-self.x, -self.y, -self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


X_AXIS = UnitVector3(1.0, 0.0, 0.0)
Y_AXIS = UnitVector3(0.0, 1.0, 0.0)
Z_AXIS = UnitVector3(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class PolarAngles:
    """Spherical direction: theta in [0, pi], phi in [0, 2*pi)."""

    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta={self.theta!r} outside [0, pi]")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi={self.phi!r} outside [0, 2*pi)")


def from_polar(angles: PolarAngles) -> UnitVector3:
    """(sin t cos p, sin t sin p, cos t) for polar angle t and azimuth p."""
    st = math.sin(angles.theta)
    return UnitVector3(st * math.cos(angles.phi), st * math.sin(angles.phi), math.cos(angles.theta))


def to_polar(v: UnitVector3) -> PolarAngles:
    """Canonical polar representation; azimuth is 0 at the poles."""
    theta = math.acos(min(1.0, max(-1.0, v.z)))
    if math.sin(theta) < 1e-12:
        return PolarAngles(theta, 0.0)
    phi = math.atan2(v.y, v.x)
    if phi < 0.0:
        phi += 2.0 * math.pi
    if phi >= 2.0 * math.pi:
        phi = 0.0
    return PolarAngles(theta, phi)


@dataclass(frozen=True, eq=False)
class SpinObservable:
    """A spin component along ``direction``: Hermitian, traceless, squares to 1."""

    direction: UnitVector3
    matrix: ComplexMatrix


def spin_observable(n: UnitVector3) -> SpinObservable:
    """Spin observable along ``n``: x*sigma_x + y*sigma_y + z*sigma_z."""
    m = ComplexMatrix(
        [
            [n.z, n.x - 1j * n.y],
            [n.x + 1j * n.y, -n.z],
        ]
    )
    return SpinObservable(direction=n, matrix=m)


def commutes(a: SpinObservable, b: SpinObservable, tol: float = COMMUTATOR_TOL) -> bool:
    """True iff the commutator vanishes entrywise within ``tol``.

    For spin observables this happens exactly when the directions are
    parallel or antiparallel.
    """
    am, bm = a.matrix.entries, b.matrix.entries
    return float(np.max(np.abs(am @ bm - bm @ am))) <= tol
