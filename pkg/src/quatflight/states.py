"""Flight-state representations and conversions between them.

Five state descriptions of the same physical point-mass motion over a
central rotating body are supported:

* ``RvState`` -- radius and speed plus two unit quaternions: one orients the
  position frame A (first axis along the position vector) relative to the
  body-fixed observation frame E, the other orients the velocity frame B
  (first axis along the E-relative velocity) relative to A.
* ``RvlState`` -- identical ten parameters, but the B frame's second axis is
  pinned to the positive lift direction so the bank angle never appears in
  the force model.
* ``RvhState`` -- eight parameters; the third axes of A and B both point
  along the relative angular momentum, leaving a single in-plane rotation
  angle between them (stored as its half-angle sine/cosine pair).
* ``CartesianState`` -- observation-frame position and relative velocity,
  the gauge-free ground truth every other form converts through.
* ``SphericalState`` -- the classic longitude/latitude/flight-path-angle/
  azimuth baseline, singular in vertical flight.

The quaternion gauges are not unique: any initial orientation of the
position frame about the position vector (and of the velocity frame about
the velocity vector) is admissible.  Conversions from Cartesian states fix
the gauge deterministically with shortest-arc rotations; antipodal inputs
tie-break about the local third axis.  Round trips therefore preserve the
physical position and velocity, not any particular quaternion values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularityError
from .quat import UnitQuaternion, dcm_from_quat, quat_from_dcm, renormalize

# Angular-momentum floor (m^2/s) below which the rvh form is rejected.
ANGULAR_MOMENTUM_FLOOR = 1e-6

_E1 = np.array([1.0, 0.0, 0.0])
_E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class RvState:
    """Ten-parameter state: radius, speed, and the two frame quaternions."""

    r: float
    qa: UnitQuaternion
    v: float
    qb: UnitQuaternion

    def __post_init__(self):
        if self.r <= 0.0:
            raise ValueError(f"radius must be positive, got {self.r!r}")
        if self.v <= 0.0:
            raise ValueError(f"speed must be positive, got {self.v!r}")

    def to_array(self) -> np.ndarray:
        out = np.empty(10)
        out[0] = self.r
        out[1:5] = self.qa.as_array()
        out[5] = self.v
        out[6:10] = self.qb.as_array()
        return out

    @classmethod
    def from_array(cls, y) -> "RvState":
        """Build from a propagated sample; quaternions are renormalized."""
        y = np.asarray(y, dtype=float)
        return cls(float(y[0]), renormalize(y[1:5]), float(y[5]), renormalize(y[6:10]))


class RvlState(RvState):
    """Same ten parameters as ``RvState`` with the lift-aligned gauge.

    The B frame's second basis vector is the positive lift direction; the
    first angular-velocity component of B relative to A is a command rather
    than zero.
    """


@dataclass(frozen=True)
class RvhState:
    """Eight-parameter state with both frames' third axes along the angular momentum."""

    r: float
    qa: UnitQuaternion
    v: float
    eps_b3: float
    eta_b: float

    def __post_init__(self):
        if self.r <= 0.0:
            raise ValueError(f"radius must be positive, got {self.r!r}")
        if self.v <= 0.0:
            raise ValueError(f"speed must be positive, got {self.v!r}")
        n = math.hypot(self.eps_b3, self.eta_b)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"in-plane rotation pair norm {n!r} violates unit constraint")

    def to_array(self) -> np.ndarray:
        out = np.empty(8)
        out[0] = self.r
        out[1:5] = self.qa.as_array()
        out[5] = self.v
        out[6] = self.eps_b3
        out[7] = self.eta_b
        return out

    @classmethod
    def from_array(cls, y) -> "RvhState":
        y = np.asarray(y, dtype=float)
        n = math.hypot(float(y[6]), float(y[7]))
        return cls(
            float(y[0]),
            renormalize(y[1:5]),
            float(y[5]),
            float(y[6]) / n,
            float(y[7]) / n,
        )

    def c_ba(self) -> np.ndarray:
        """Direction cosine matrix of B relative to A (simple rotation about axis 3)."""
        e3, eta = self.eps_b3, self.eta_b
        c = 1.0 - 2.0 * e3 * e3
        s = 2.0 * e3 * eta
        return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class CartesianState:
    """Observation-frame position (m) and relative velocity (m/s)."""

    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        vel = np.asarray(self.velocity, dtype=float)
        if pos.shape != (3,) or vel.shape != (3,):
            raise ValueError("position and velocity must be 3-vectors")
        if float(np.linalg.norm(pos)) <= 0.0:
            raise ValueError("position must be nonzero")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity])

    @classmethod
    def from_array(cls, y) -> "CartesianState":
        y = np.asarray(y, dtype=float)
        return cls(y[0:3].copy(), y[3:6].copy())

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.position))

    @property
    def v(self) -> float:
        return float(np.linalg.norm(self.velocity))


@dataclass(frozen=True)
class SphericalState:
    """Radius, longitude, geocentric latitude, speed, flight path angle, azimuth.

    Longitude is measured in the rotating observation frame.  The flight
    path angle is positive above the local horizontal; azimuth is measured
    from north, positive toward east.
    """

    r: float
    lon: float
    lat: float
    v: float
    gamma: float
    psi: float

    def __post_init__(self):
        if self.r <= 0.0:
            raise ValueError(f"radius must be positive, got {self.r!r}")
        if abs(self.lat) > math.pi / 2 + 1e-12:
            raise ValueError(f"latitude {self.lat!r} outside [-pi/2, pi/2]")
        if abs(self.gamma) > math.pi / 2 + 1e-12:
            raise ValueError(f"flight path angle {self.gamma!r} outside [-pi/2, pi/2]")

    def to_array(self) -> np.ndarray:
        return np.array([self.r, self.lon, self.lat, self.v, self.gamma, self.psi])

    @classmethod
    def from_array(cls, y) -> "SphericalState":
        y = np.asarray(y, dtype=float)
        return cls(*(float(x) for x in y))


@dataclass(frozen=True)
class AngularRates:
    """Angular velocity components of the two frame rotations.

    ``wa1..wa3`` are the E-to-A rates in the A basis; ``wb1..wb3`` are the
    A-to-B rates in the B basis.
    """

    wa1: float
    wa2: float
    wa3: float
    wb1: float
    wb2: float
    wb3: float


def _shortest_arc(target, tie_axis) -> UnitQuaternion:
    """Quaternion of the frame whose first axis points along ``target``.

    ``target`` is a unit vector expressed in the base frame.  The rotation
    is the shortest arc taking the base frame's first axis onto ``target``;
    when they are antiparallel the rotation axis degenerates and
    ``tie_axis`` is used for a half turn.
    """
    cross = np.array([0.0, -target[2], target[1]])  # e1 x target
    s = float(np.linalg.norm(cross))
    dot = float(target[0])
    if s < 1e-12:
        if dot > 0.0:
            return UnitQuaternion.identity()
        return UnitQuaternion(float(tie_axis[0]), float(tie_axis[1]), float(tie_axis[2]), 0.0)
    axis = cross / s
    half = 0.5 * math.atan2(s, dot)
    sh = math.sin(half)
    return UnitQuaternion(
        float(axis[0]) * sh, float(axis[1]) * sh, float(axis[2]) * sh, math.cos(half)
    )


def rv_to_cartesian(state: RvState) -> CartesianState:
    """Map a ten-parameter state to observation-frame position and velocity."""
    c_ae = dcm_from_quat(state.qa)
    c_be = dcm_from_quat(state.qb) @ c_ae
    return CartesianState(state.r * c_ae[0, :], state.v * c_be[0, :])


def cartesian_to_rv(state: CartesianState) -> RvState:
    """Fix a deterministic gauge for the ten-parameter form.

    The position-frame quaternion is the shortest-arc rotation taking the
    observation frame's first axis onto the position direction; the
    velocity-frame quaternion is the shortest arc taking the position
    direction onto the velocity direction (expressed in the A basis).
    Antipodal cases tie-break about the corresponding third axis.
    """
    r = state.r
    v = state.v
    if r <= 0.0 or v <= 0.0:
        raise ValueError("degenerate state: zero position or velocity")
    qa = _shortest_arc(state.position / r, _E3)
    vhat_a = dcm_from_quat(qa) @ (state.velocity / v)
    qb = _shortest_arc(vhat_a, _E3)
    return RvState(r=r, qa=qa, v=v, qb=qb)


def twist_about_b1(qb: UnitQuaternion, angle: float) -> UnitQuaternion:
    """Rotate the B frame about its own first axis by ``angle``.

    Used to move between gauges that differ only by the orientation of the
    {b2, b3} pair about the velocity direction.
    """
    c = math.cos(angle)
    s = math.sin(angle)
    r1 = np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])
    return quat_from_dcm(r1 @ dcm_from_quat(qb))


def cartesian_to_rvl(state: CartesianState, twist: float = 0.0) -> RvlState:
    """Lift-gauge variant of :func:`cartesian_to_rv`.

    ``twist`` rotates the {b2, b3} pair about the velocity direction after
    the shortest-arc construction, so the caller can point b2 at the
    initial lift direction.
    """
    base = cartesian_to_rv(state)
    qb = twist_about_b1(base.qb, twist) if twist != 0.0 else base.qb
    return RvlState(r=base.r, qa=base.qa, v=base.v, qb=qb)


def rvh_to_cartesian(state: RvhState) -> CartesianState:
    """Map an eight-parameter state to observation-frame position and velocity."""
    c_ae = dcm_from_quat(state.qa)
    c_be = state.c_ba() @ c_ae
    return CartesianState(state.r * c_ae[0, :], state.v * c_be[0, :])


def cartesian_to_rvh(state: CartesianState) -> RvhState:
    """Angular-momentum gauge: third axes of A and B along ``r x v``.

    Raises
    ------
    SingularityError
        For (near-)vertical flight, where the relative angular momentum
        vanishes and the gauge is undefined.
    """
    r = state.r
    v = state.v
    if v <= 0.0:
        raise ValueError("degenerate state: zero velocity")
    h_vec = np.cross(state.position, state.velocity)
    h = float(np.linalg.norm(h_vec))
    if h <= ANGULAR_MOMENTUM_FLOOR:
        raise SingularityError("rvh singular: zero angular momentum")
    a1 = state.position / r
    a3 = h_vec / h
    a2 = np.cross(a3, a1)
    qa = quat_from_dcm(np.vstack([a1, a2, a3]))
    # In-plane angle between position and velocity directions.
    cos_phi = float(np.dot(a1, state.velocity)) / v
    sin_phi = h / (r * v)
    half = 0.5 * math.atan2(sin_phi, cos_phi)
    return RvhState(r=r, qa=qa, v=v, eps_b3=math.sin(half), eta_b=math.cos(half))


def spherical_to_cartesian(state: SphericalState) -> CartesianState:
    """Map the spherical baseline state to position and velocity."""
    ct, st = math.cos(state.lat), math.sin(state.lat)
    cl, sl = math.cos(state.lon), math.sin(state.lon)
    up = np.array([ct * cl, ct * sl, st])
    east = np.array([-sl, cl, 0.0])
    north = np.array([-st * cl, -st * sl, ct])
    cg, sg = math.cos(state.gamma), math.sin(state.gamma)
    cp, sp = math.cos(state.psi), math.sin(state.psi)
    vel = state.v * (sg * up + cg * (cp * north + sp * east))
    return CartesianState(state.r * up, vel)


def cartesian_to_spherical(state: CartesianState) -> SphericalState:
    """Inverse of :func:`spherical_to_cartesian`.

    In vertical flight the horizontal velocity vanishes and the azimuth is
    set to zero by convention.
    """
    r = state.r
    if r <= 0.0:
        raise ValueError("degenerate state: zero position")
    v = state.v
    if v <= 0.0:
        raise ValueError("degenerate state: zero velocity")
    x, y, z = state.position
    lat = math.asin(max(-1.0, min(1.0, z / r)))
    lon = math.atan2(y, x)
    up = state.position / r
    sin_gamma = float(np.dot(state.velocity, up)) / v
    sin_gamma = max(-1.0, min(1.0, sin_gamma))
    gamma = math.asin(sin_gamma)
    ct, st = math.cos(lat), math.sin(lat)
    cl, sl = math.cos(lon), math.sin(lon)
    east = np.array([-sl, cl, 0.0])
    north = np.array([-st * cl, -st * sl, ct])
    ve = float(np.dot(state.velocity, east))
    vn = float(np.dot(state.velocity, north))
    psi = 0.0 if (ve == 0.0 and vn == 0.0) else math.atan2(ve, vn)
    return SphericalState(r=r, lon=lon, lat=lat, v=v, gamma=gamma, psi=psi)


def bank_basis_g(state: RvState):
    """Reference triad for the plane-referenced bank angle, in the B basis.

    ``g3`` is the velocity direction, ``g2`` the negative of the normalized
    ``r x v`` direction, and ``g1`` completes the right-handed set.

    Raises
    ------
    SingularityError
        In vertical flight, where the {r, v} plane is undefined.
    """
    c_ba = dcm_from_quat(state.qb)
    return g_basis_from_dcm(c_ba)


def g_basis_from_dcm(c_ba: np.ndarray):
    """:func:`bank_basis_g` on a B-relative-to-A direction cosine matrix."""
    c21 = c_ba[1, 0]
    c31 = c_ba[2, 0]
    s = math.hypot(c21, c31)
    if s < 1e-12:
        raise SingularityError("g-basis undefined in vertical flight")
    g1 = np.array([0.0, c21 / s, c31 / s])
    g2 = np.array([0.0, -c31 / s, c21 / s])
    g3 = np.array([1.0, 0.0, 0.0])
    return g1, g2, g3
