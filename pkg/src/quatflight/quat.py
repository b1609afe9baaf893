"""Unit-quaternion (Euler parameter) algebra for frame-to-frame rotations.

Quaternions are stored vector-first as ``(eps1, eps2, eps3, eta)`` with
``eta`` the scalar part.  A quaternion encodes a direction cosine matrix in
the passive (coordinate-transform) sense: if frame B is obtained by rotating
frame A's basis by ``angle`` about ``axis``, then ``dcm_from_quat(q) @ p_A``
gives the components of a vector in B's basis from its components in A's
basis.

All operations are pure functions on immutable values and are safe to call
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNIT_NORM_TOL = 1e-12
ORTHONORMALITY_TOL = 1e-8


@dataclass(frozen=True)
class UnitQuaternion:
    """Four Euler parameters with a unit-norm invariant.

    Attributes
    ----------
    eps1, eps2, eps3 : float
        Vector part (direction of the rotation axis scaled by sin(angle/2)).
    eta : float
        Scalar part, cos(angle/2).
    """

    eps1: float
    eps2: float
    eps3: float
    eta: float

    def __post_init__(self):
        n = math.sqrt(
            self.eps1 * self.eps1
            + self.eps2 * self.eps2
            + self.eps3 * self.eps3
            + self.eta * self.eta
        )
        if abs(n - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"quaternion norm {n!r} violates unit constraint")

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(0.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, q) -> "UnitQuaternion":
        q = np.asarray(q, dtype=float)
        return cls(float(q[0]), float(q[1]), float(q[2]), float(q[3]))

    def as_array(self) -> np.ndarray:
        return np.array([self.eps1, self.eps2, self.eps3, self.eta])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


@dataclass(frozen=True, eq=False)
class AxisAngle:
    """A rotation of ``angle`` radians about the unit vector ``axis``."""

    axis: np.ndarray
    angle: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if axis.shape != (3,):
            raise ValueError("axis must be a 3-vector")
        n = float(np.linalg.norm(axis))
        if abs(n - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"axis norm {n!r} violates unit constraint")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "angle", float(self.angle))


def skew(p) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector, so that ``skew(p) @ q = p x q``."""
    p1, p2, p3 = float(p[0]), float(p[1]), float(p[2])
    return np.array(
        [
            [0.0, -p3, p2],
            [p3, 0.0, -p1],
            [-p2, p1, 0.0],
        ]
    )


def dcm_from_axis_angle(aa: AxisAngle) -> np.ndarray:
    """Direction cosine matrix of a frame rotated by ``aa`` from the base frame."""
    q1, q2, q3 = aa.axis
    c = math.cos(aa.angle)
    s = math.sin(aa.angle)
    k = 1.0 - c
    return np.array(
        [
            [k * q1 * q1 + c, k * q1 * q2 + q3 * s, k * q1 * q3 - q2 * s],
            [k * q2 * q1 - q3 * s, k * q2 * q2 + c, k * q2 * q3 + q1 * s],
            [k * q3 * q1 + q2 * s, k * q3 * q2 - q1 * s, k * q3 * q3 + c],
        ]
    )


def quat_from_axis_angle(aa: AxisAngle) -> UnitQuaternion:
    """Euler parameters of a rotation by ``angle`` about ``axis``."""
    half = 0.5 * aa.angle
    s = math.sin(half)
    return UnitQuaternion(
        float(aa.axis[0]) * s,
        float(aa.axis[1]) * s,
        float(aa.axis[2]) * s,
        math.cos(half),
    )


def dcm_from_quat(q: UnitQuaternion) -> np.ndarray:
    """Direction cosine matrix from Euler parameters (passive convention)."""
    e1, e2, e3, eta = q.eps1, q.eps2, q.eps3, q.eta
    return np.array(
        [
            [
                1.0 - 2.0 * (e2 * e2 + e3 * e3),
                2.0 * (e1 * e2 + e3 * eta),
                2.0 * (e1 * e3 - e2 * eta),
            ],
            [
                2.0 * (e2 * e1 - e3 * eta),
                1.0 - 2.0 * (e3 * e3 + e1 * e1),
                2.0 * (e2 * e3 + e1 * eta),
            ],
            [
                2.0 * (e3 * e1 + e2 * eta),
                2.0 * (e3 * e2 - e1 * eta),
                1.0 - 2.0 * (e1 * e1 + e2 * e2),
            ],
        ]
    )


def quat_from_dcm(c) -> UnitQuaternion:
    """Euler parameters of an orthonormal direction cosine matrix.

    Uses a largest-denominator branch selection so the extraction stays
    well conditioned near 180-degree rotations.  The scalar part of the
    result is non-negative; when it is exactly zero the sign is fixed by
    making the largest vector component positive.

    Raises
    ------
    ValueError
        If the matrix is not orthonormal with determinant +1 (residual
        above 1e-8).
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (3, 3):
        raise ValueError("direction cosine matrix must be 3x3")
    residual = float(np.max(np.abs(c @ c.T - np.eye(3))))
    if residual > ORTHONORMALITY_TOL:
        raise ValueError(f"matrix is not orthonormal (residual {residual:.3e})")
    det = float(np.linalg.det(c))
    if abs(det - 1.0) > ORTHONORMALITY_TOL:
        raise ValueError(f"matrix determinant {det!r} is not +1")

    tr = c[0, 0] + c[1, 1] + c[2, 2]
    # Four candidate squared components, each times 4.
    quads = (
        1.0 + 2.0 * c[0, 0] - tr,
        1.0 + 2.0 * c[1, 1] - tr,
        1.0 + 2.0 * c[2, 2] - tr,
        1.0 + tr,
    )
    k = max(range(4), key=lambda i: quads[i])
    if k == 3:
        eta = 0.5 * math.sqrt(quads[3])
        f = 0.25 / eta
        e1 = f * (c[1, 2] - c[2, 1])
        e2 = f * (c[2, 0] - c[0, 2])
        e3 = f * (c[0, 1] - c[1, 0])
    elif k == 0:
        e1 = 0.5 * math.sqrt(quads[0])
        f = 0.25 / e1
        e2 = f * (c[0, 1] + c[1, 0])
        e3 = f * (c[0, 2] + c[2, 0])
        eta = f * (c[1, 2] - c[2, 1])
    elif k == 1:
        e2 = 0.5 * math.sqrt(quads[1])
        f = 0.25 / e2
        e1 = f * (c[0, 1] + c[1, 0])
        e3 = f * (c[1, 2] + c[2, 1])
        eta = f * (c[2, 0] - c[0, 2])
    else:
        e3 = 0.5 * math.sqrt(quads[2])
        f = 0.25 / e3
        e1 = f * (c[0, 2] + c[2, 0])
        e2 = f * (c[1, 2] + c[2, 1])
        eta = f * (c[0, 1] - c[1, 0])

    q = np.array([e1, e2, e3, eta])
    if eta < 0.0 or (eta == 0.0 and q[np.argmax(np.abs(q[:3]))] < 0.0):
        q = -q
    return renormalize(q)


def quat_rates(q: UnitQuaternion, omega) -> np.ndarray:
    """Euler parameter rates for angular velocity ``omega`` (rotated-frame basis).

    The output satisfies ``sum(q_i * qdot_i) = 0``, the differential form of
    the unit-norm constraint.
    """
    e1, e2, e3, eta = q.eps1, q.eps2, q.eps3, q.eta
    w1, w2, w3 = float(omega[0]), float(omega[1]), float(omega[2])
    return np.array(
        [
            0.5 * (eta * w1 - e3 * w2 + e2 * w3),
            0.5 * (e3 * w1 + eta * w2 - e1 * w3),
            0.5 * (-e2 * w1 + e1 * w2 + eta * w3),
            -0.5 * (e1 * w1 + e2 * w2 + e3 * w3),
        ]
    )


def omega_from_quat_rates(qdot, q: UnitQuaternion) -> np.ndarray:
    """Angular velocity recovered from Euler parameters and their rates."""
    return omega_from_rate_arrays(np.asarray(qdot, dtype=float), q.as_array())


def omega_from_rate_arrays(qdot, q) -> np.ndarray:
    """Array-based variant of :func:`omega_from_quat_rates`.

    Accepts raw 4-vectors so it can be applied to propagated samples whose
    norms carry integration drift.
    """
    e1, e2, e3, eta = float(q[0]), float(q[1]), float(q[2]), float(q[3])
    d1, d2, d3, deta = (float(qdot[0]), float(qdot[1]), float(qdot[2]), float(qdot[3]))
    return np.array(
        [
            2.0 * (eta * d1 - deta * e1 + e3 * d2 - d3 * e2),
            2.0 * (eta * d2 - deta * e2 - e3 * d1 + d3 * e1),
            2.0 * (eta * d3 - deta * e3 + e2 * d1 - d2 * e1),
        ]
    )


def renormalize(q) -> UnitQuaternion:
    """Rescale a 4-vector to unit norm, preserving its direction.

    Raises
    ------
    ValueError
        If the input norm is zero.
    """
    q = np.asarray(q, dtype=float)
    n = float(np.linalg.norm(q))
    if n == 0.0:
        raise ValueError("cannot renormalize a zero-norm quaternion")
    q = q / n
    return UnitQuaternion(float(q[0]), float(q[1]), float(q[2]), float(q[3]))
