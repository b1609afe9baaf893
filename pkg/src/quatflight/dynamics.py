"""State-derivative functions for every supported flight-state representation.

The ten-parameter quaternion forms share one structure.  Writing the state
as radius r, speed v, and the two frame quaternions (position frame A over
the observation frame E, velocity frame B over A), the kinematics give

    rdot  = v * (1 - 2*(eb2^2 + eb3^2))
    wa2   = (2v/r) * (eta_b*eb2 - eb1*eb3)
    wa3   = (2v/r) * (eta_b*eb3 + eb1*eb2)

and the kinetics, with the apparent force (f1~, f2~, f3~) in the B basis,

    vdot  = f1~/m
    wb2   = -f3~/(m v) - wa1*C_BA(2,1) - (v/r)*C_BA(3,1)
    wb3   =  f2~/(m v) - wa1*C_BA(3,1) + (v/r)*C_BA(2,1)

The quaternion rates follow from the angular velocities.  The first
angular-velocity components wa1 and wb1 are free gauge choices:

* rv form:  wa1 = wb1 = 0.
* rvl form: wa1 = 0, wb1 commanded; the second B axis is the positive lift
  direction, so the bank angle never enters the force model.
* rvh form: both third axes ride along the relative angular momentum, which
  forces wa1 = f3~/(2 m v eb3 eta_b) and wa2 = wb1 = wb2 = 0; the state
  shrinks to eight parameters but the constraint blows up in vertical
  flight.

None of the quaternion forms evaluates a trigonometric function outside the
force model's thrust/bank terms, and the rv/rvl forms stay finite in
vertical flight; the spherical baseline divides by cos(flight path angle)
and is guarded instead.

Derivative functions are pure: they never renormalize the quaternions (that
is the propagator's policy) and may be called concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import atan2, cos, exp, pi, sin
from typing import Callable

import numpy as np

from .controls import ControlProfile
from .environment import ControlInput, Environment, force_components
from .errors import SingularityError
from .quat import dcm_from_quat, omega_from_rate_arrays, renormalize
from .states import (
    AngularRates,
    CartesianState,
    RvhState,
    RvlState,
    RvState,
    SphericalState,
    cartesian_to_rv,
    cartesian_to_rvh,
    cartesian_to_rvl,
    cartesian_to_spherical,
    rv_to_cartesian,
    rvh_to_cartesian,
    spherical_to_cartesian,
)

# Guard thresholds: fail loudly instead of returning garbage near a
# parameterization's singular set.
RVH_SINGULARITY_EPS = 1e-8  # on |eps_b3 * eta_b|
SPHERICAL_GAMMA_EPS = 1e-6  # rad from +-pi/2
VERTICAL_SIN_EPS = 1e-12  # on sin of the angle between position and velocity

PARAM_NAMES = ("rv", "rvl", "rvh", "spherical", "cartesian")

_LENGTH_SCALE = 1.0e6
_SPEED_SCALE = 1.0e3


def _unpack_env(env: Environment):
    b, a, w, veh = env.body, env.atmosphere, env.aero, env.vehicle
    return (
        b.mu,
        b.radius,
        b.spin_rate,
        a.rho0,
        a.scale_height,
        w.s,
        w.cl_alpha,
        w.cd0,
        w.k,
        veh.mass,
        veh.thrust_offset,
    )


def make_general_rhs(
    controls: ControlProfile, env: Environment, gauge: Callable[[float], tuple]
) -> Callable:
    """General-form right-hand side with externally supplied gauge rates.

    ``gauge(t)`` returns the two free angular-velocity components
    ``(wa1, wb1)``.  The rv form is this with both identically zero.
    """
    return _make_two_quaternion_rhs(controls, env, gauge=gauge, lift_along_b2=False)


def make_rv_rhs(controls: ControlProfile, env: Environment) -> Callable:
    """Right-hand side of the ten-parameter form with zero gauge rates."""
    return _make_two_quaternion_rhs(controls, env, gauge=None, lift_along_b2=False)


def make_rvl_rhs(controls: ControlProfile, env: Environment) -> Callable:
    """Right-hand side of the lift-aligned ten-parameter form.

    In ``sigma`` bank mode the ``wb1`` profile is the native bank-rate
    command.  In ``beta`` mode the command is derived each evaluation so
    the physical bank angle tracks the bank profile exactly.
    """
    return _make_two_quaternion_rhs(controls, env, gauge=None, lift_along_b2=True)


def _make_two_quaternion_rhs(controls, env, gauge, lift_along_b2):
    (mu, re, we, rho0, hscale, sref, cla, cd0, kdrag, m, delta) = _unpack_env(env)
    alpha_of = controls.alpha
    bank_of = controls.bank
    wb1_of = controls.wb1
    thrust_of = controls.thrust
    beta_mode = controls.bank_mode == "beta"

    def rhs(t, y):
        r = y[0]
        ea1 = y[1]
        ea2 = y[2]
        ea3 = y[3]
        eta_a = y[4]
        v = y[5]
        eb1 = y[6]
        eb2 = y[7]
        eb3 = y[8]
        eta_b = y[9]
        if r <= 0.0:
            raise SingularityError("nonpositive radius")
        if v <= 0.0:
            raise SingularityError("kinetic singularity: nonpositive speed")

        b11 = 1.0 - 2.0 * (eb2 * eb2 + eb3 * eb3)
        b12 = 2.0 * (eb1 * eb2 + eb3 * eta_b)
        b13 = 2.0 * (eb1 * eb3 - eb2 * eta_b)
        b21 = 2.0 * (eb1 * eb2 - eb3 * eta_b)
        b22 = 1.0 - 2.0 * (eb3 * eb3 + eb1 * eb1)
        b23 = 2.0 * (eb2 * eb3 + eb1 * eta_b)
        b31 = 2.0 * (eb1 * eb3 + eb2 * eta_b)
        b32 = 2.0 * (eb2 * eb3 - eb1 * eta_b)
        b33 = 1.0 - 2.0 * (eb1 * eb1 + eb2 * eb2)

        a13 = 2.0 * (ea1 * ea3 - ea2 * eta_a)
        a23 = 2.0 * (ea2 * ea3 + ea1 * eta_a)
        a33 = 1.0 - 2.0 * (ea1 * ea1 + ea2 * ea2)

        alpha = alpha_of(t)
        thrust = thrust_of(t)
        rho = rho0 * exp((re - r) / hscale) if rho0 != 0.0 else 0.0
        qdyn = 0.5 * rho * v * v
        cl = cla * alpha
        lift = qdyn * sref * cl
        drag = qdyn * sref * (cd0 + kdrag * cl * cl)
        if thrust != 0.0:
            ad = alpha + delta
            axial = thrust * cos(ad) - drag
            transverse = thrust * sin(ad) + lift
        else:
            axial = -drag
            transverse = lift

        if lift_along_b2:
            f2_aero = transverse
            f3_aero = 0.0
        elif transverse != 0.0:
            if beta_mode:
                sigma = bank_of(t) + atan2(b31, b21)
            else:
                sigma = bank_of(t)
            f2_aero = transverse * cos(sigma)
            f3_aero = transverse * sin(sigma)
        else:
            f2_aero = 0.0
            f3_aero = 0.0

        grav = m * mu / (r * r)
        f1 = axial - grav * b11
        f2 = f2_aero - grav * b21
        f3 = f3_aero - grav * b31

        if we != 0.0:
            be23 = b21 * a13 + b22 * a23 + b23 * a33
            be33 = b31 * a13 + b32 * a23 + b33 * a33
            cor = 2.0 * m * we * v
            g1 = a13 * a13 - 1.0
            g2 = a13 * a23
            g3 = a13 * a33
            cen = m * r * we * we
            ft1 = f1 - cen * (b11 * g1 + b12 * g2 + b13 * g3)
            ft2 = f2 - cor * be33 - cen * (b21 * g1 + b22 * g2 + b23 * g3)
            ft3 = f3 + cor * be23 - cen * (b31 * g1 + b32 * g2 + b33 * g3)
        else:
            ft1 = f1
            ft2 = f2
            ft3 = f3

        two_v_r = 2.0 * v / r
        wa2 = two_v_r * (eta_b * eb2 - eb1 * eb3)
        wa3 = two_v_r * (eta_b * eb3 + eb1 * eb2)

        minv = 1.0 / (m * v)
        wb2 = -ft3 * minv - two_v_r * (eb1 * eb3 + eb2 * eta_b)
        wb3 = ft2 * minv + two_v_r * (eb1 * eb2 - eb3 * eta_b)

        if gauge is not None:
            wa1, wb1 = gauge(t)
            wa1 = float(wa1)
            wb1 = float(wb1)
            wb2 -= wa1 * b21
            wb3 -= wa1 * b31
        elif lift_along_b2:
            wa1 = 0.0
            if beta_mode:
                denom = 1.0 - b11 * b11
                if denom < VERTICAL_SIN_EPS:
                    raise SingularityError(
                        "bank tracking undefined in vertical flight"
                    )
                wb1 = bank_of.rate(t) + (b11 / denom) * (wb2 * b21 + wb3 * b31)
            else:
                wb1 = wb1_of(t)
        else:
            wa1 = 0.0
            wb1 = 0.0

        out = np.empty(10)
        out[0] = v * b11
        out[1] = 0.5 * (eta_a * wa1 - ea3 * wa2 + ea2 * wa3)
        out[2] = 0.5 * (ea3 * wa1 + eta_a * wa2 - ea1 * wa3)
        out[3] = 0.5 * (-ea2 * wa1 + ea1 * wa2 + eta_a * wa3)
        out[4] = -0.5 * (ea1 * wa1 + ea2 * wa2 + ea3 * wa3)
        out[5] = ft1 / m
        out[6] = 0.5 * (eta_b * wb1 - eb3 * wb2 + eb2 * wb3)
        out[7] = 0.5 * (eb3 * wb1 + eta_b * wb2 - eb1 * wb3)
        out[8] = 0.5 * (-eb2 * wb1 + eb1 * wb2 + eta_b * wb3)
        out[9] = -0.5 * (eb1 * wb1 + eb2 * wb2 + eb3 * wb3)
        return out

    return rhs


def make_rvh_rhs(controls: ControlProfile, env: Environment) -> Callable:
    """Right-hand side of the eight-parameter angular-momentum-gauge form."""
    (mu, re, we, rho0, hscale, sref, cla, cd0, kdrag, m, delta) = _unpack_env(env)
    alpha_of = controls.alpha
    bank_of = controls.bank
    thrust_of = controls.thrust
    beta_mode = controls.bank_mode == "beta"

    def rhs(t, y):
        r = y[0]
        ea1 = y[1]
        ea2 = y[2]
        ea3 = y[3]
        eta_a = y[4]
        v = y[5]
        eb3 = y[6]
        eta_b = y[7]
        if r <= 0.0:
            raise SingularityError("nonpositive radius")
        if v <= 0.0:
            raise SingularityError("kinetic singularity: nonpositive speed")
        pair = eb3 * eta_b
        if abs(pair) <= RVH_SINGULARITY_EPS:
            raise SingularityError("rvh vertical-flight singularity")

        b11 = 1.0 - 2.0 * eb3 * eb3
        b12 = 2.0 * pair
        b21 = -b12
        b22 = b11

        a13 = 2.0 * (ea1 * ea3 - ea2 * eta_a)
        a23 = 2.0 * (ea2 * ea3 + ea1 * eta_a)
        a33 = 1.0 - 2.0 * (ea1 * ea1 + ea2 * ea2)

        alpha = alpha_of(t)
        thrust = thrust_of(t)
        rho = rho0 * exp((re - r) / hscale) if rho0 != 0.0 else 0.0
        qdyn = 0.5 * rho * v * v
        cl = cla * alpha
        lift = qdyn * sref * cl
        drag = qdyn * sref * (cd0 + kdrag * cl * cl)
        if thrust != 0.0:
            ad = alpha + delta
            axial = thrust * cos(ad) - drag
            transverse = thrust * sin(ad) + lift
        else:
            axial = -drag
            transverse = lift

        if transverse != 0.0:
            # The in-plane gauge keeps C_BA(2,1) = -sin(angle) < 0 and
            # C_BA(3,1) = 0, so the physical bank differs from the native
            # one by exactly pi.
            sigma = bank_of(t) + pi if beta_mode else bank_of(t)
            f2_aero = transverse * cos(sigma)
            f3_aero = transverse * sin(sigma)
        else:
            f2_aero = 0.0
            f3_aero = 0.0

        grav = m * mu / (r * r)
        f1 = axial - grav * b11
        f2 = f2_aero - grav * b21
        f3 = f3_aero

        if we != 0.0:
            be23 = b21 * a13 + b22 * a23
            be33 = a33
            cor = 2.0 * m * we * v
            g1 = a13 * a13 - 1.0
            g2 = a13 * a23
            g3 = a13 * a33
            cen = m * r * we * we
            ft1 = f1 - cen * (b11 * g1 + b12 * g2)
            ft2 = f2 - cor * be33 - cen * (b21 * g1 + b22 * g2)
            ft3 = f3 + cor * be23 - cen * g3
        else:
            ft1 = f1
            ft2 = f2
            ft3 = f3

        wa1 = ft3 / (2.0 * m * v * pair)
        wa3 = (2.0 * v / r) * eta_b * eb3
        wb3 = ft2 / (m * v) - (2.0 * v / r) * eta_b * eb3

        out = np.empty(8)
        out[0] = v * b11
        out[1] = 0.5 * (wa1 * eta_a + wa3 * ea2)
        out[2] = 0.5 * (wa1 * ea3 - wa3 * ea1)
        out[3] = 0.5 * (-wa1 * ea2 + wa3 * eta_a)
        out[4] = -0.5 * (wa1 * ea1 + wa3 * ea3)
        out[5] = ft1 / m
        out[6] = 0.5 * wb3 * eta_b
        out[7] = -0.5 * wb3 * eb3
        return out

    return rhs


def make_cartesian_rhs(controls: ControlProfile, env: Environment) -> Callable:
    """Ground-truth right-hand side assembled directly in observation coordinates.

    The bank command is always the physical bank angle here; with a nonzero
    transverse force the lift direction is built from the {position,
    velocity} plane and is undefined in vertical flight.
    """
    (mu, re, we, rho0, hscale, sref, cla, cd0, kdrag, m, delta) = _unpack_env(env)
    alpha_of = controls.alpha
    bank_of = controls.bank
    thrust_of = controls.thrust

    def rhs(t, y):
        px, py, pz = y[0], y[1], y[2]
        vx, vy, vz = y[3], y[4], y[5]
        r2 = px * px + py * py + pz * pz
        r = r2**0.5
        v = (vx * vx + vy * vy + vz * vz) ** 0.5
        if r <= 0.0:
            raise SingularityError("nonpositive radius")
        if v <= 0.0:
            raise SingularityError("kinetic singularity: nonpositive speed")

        alpha = alpha_of(t)
        thrust = thrust_of(t)
        rho = rho0 * exp((re - r) / hscale) if rho0 != 0.0 else 0.0
        qdyn = 0.5 * rho * v * v
        cl = cla * alpha
        lift = qdyn * sref * cl
        drag = qdyn * sref * (cd0 + kdrag * cl * cl)
        if thrust != 0.0:
            ad = alpha + delta
            axial = thrust * cos(ad) - drag
            transverse = thrust * sin(ad) + lift
        else:
            axial = -drag
            transverse = lift

        ax = (axial / (m * v)) * vx
        ay = (axial / (m * v)) * vy
        az = (axial / (m * v)) * vz

        if transverse != 0.0:
            hx = py * vz - pz * vy
            hy = pz * vx - px * vz
            hz = px * vy - py * vx
            hn = (hx * hx + hy * hy + hz * hz) ** 0.5
            if hn <= VERTICAL_SIN_EPS * r * v:
                raise SingularityError(
                    "lift direction undefined in vertical flight"
                )
            g2x, g2y, g2z = -hx / hn, -hy / hn, -hz / hn
            g3x, g3y, g3z = vx / v, vy / v, vz / v
            g1x = g2y * g3z - g2z * g3y
            g1y = g2z * g3x - g2x * g3z
            g1z = g2x * g3y - g2y * g3x
            beta = bank_of(t)
            cb = cos(beta)
            sb = sin(beta)
            scale = transverse / m
            ax += scale * (cb * g1x + sb * g2x)
            ay += scale * (cb * g1y + sb * g2y)
            az += scale * (cb * g1z + sb * g2z)

        gscale = mu / (r2 * r)
        ax -= gscale * px
        ay -= gscale * py
        az -= gscale * pz

        if we != 0.0:
            ax += 2.0 * we * vy + we * we * px
            ay += -2.0 * we * vx + we * we * py

        return np.array([vx, vy, vz, ax, ay, az])

    return rhs


def make_spherical_rhs(controls: ControlProfile, env: Environment) -> Callable:
    """Right-hand side of the spherical baseline.

    Divides by cos(flight path angle) and cos(latitude); both vertical
    flight and pole crossing raise instead of returning garbage.  The bank
    command is the physical bank angle.
    """
    (mu, re, we, rho0, hscale, sref, cla, cd0, kdrag, m, delta) = _unpack_env(env)
    alpha_of = controls.alpha
    bank_of = controls.bank
    thrust_of = controls.thrust
    gamma_max = pi / 2 - SPHERICAL_GAMMA_EPS

    def rhs(t, y):
        r = y[0]
        lat = y[2]
        v = y[3]
        gamma = y[4]
        psi = y[5]
        if r <= 0.0:
            raise SingularityError("nonpositive radius")
        if v <= 0.0:
            raise SingularityError("kinetic singularity: nonpositive speed")
        if abs(gamma) >= gamma_max:
            raise SingularityError("spherical vertical-flight singularity")
        if abs(lat) >= gamma_max:
            raise SingularityError("spherical pole singularity")

        sg = sin(gamma)
        cg = cos(gamma)
        sp = sin(psi)
        cp = cos(psi)
        st = sin(lat)
        ct = cos(lat)

        alpha = alpha_of(t)
        thrust = thrust_of(t)
        rho = rho0 * exp((re - r) / hscale) if rho0 != 0.0 else 0.0
        qdyn = 0.5 * rho * v * v
        cl = cla * alpha
        lift = qdyn * sref * cl
        drag = qdyn * sref * (cd0 + kdrag * cl * cl)
        if thrust != 0.0:
            ad = alpha + delta
            axial = thrust * cos(ad) - drag
            transverse = thrust * sin(ad) + lift
        else:
            axial = -drag
            transverse = lift
        beta = bank_of(t)
        cb = cos(beta)
        sb = sin(beta)

        g = mu / (r * r)
        we2r = we * we * r

        rdot = v * sg
        londot = v * cg * sp / (r * ct)
        latdot = v * cg * cp / r
        vdot = axial / m - g * sg + we2r * ct * (sg * ct - cg * cp * st)
        gammadot = (
            (transverse * cb) / (m * v)
            + (v / r - g / v) * cg
            + 2.0 * we * sp * ct
            + (we2r / v) * ct * (cg * ct + sg * cp * st)
        )
        psidot = (
            (transverse * sb) / (m * v * cg)
            + (v / r) * cg * sp * st / ct
            - 2.0 * we * ((sg / cg) * cp * ct - st)
            + (we2r / (v * cg)) * sp * st * ct
        )
        return np.array([rdot, londot, latdot, vdot, gammadot, psidot])

    return rhs


def beta_from_sigma(sigma: float, c_ba: np.ndarray) -> float:
    """Plane-referenced bank angle from the gauge bank angle.

    Raises
    ------
    SingularityError
        In vertical flight, where the reference plane is undefined.
    """
    c21 = c_ba[1, 0]
    c31 = c_ba[2, 0]
    if c21 * c21 + c31 * c31 < VERTICAL_SIN_EPS * VERTICAL_SIN_EPS:
        raise SingularityError("beta undefined in vertical flight")
    return atan2(
        sin(sigma) * c21 - cos(sigma) * c31,
        cos(sigma) * c21 + sin(sigma) * c31,
    )


def sigma_from_beta(beta: float, c_ba: np.ndarray) -> float:
    """Inverse of :func:`beta_from_sigma` (same vertical-flight guard)."""
    c21 = c_ba[1, 0]
    c31 = c_ba[2, 0]
    if c21 * c21 + c31 * c31 < VERTICAL_SIN_EPS * VERTICAL_SIN_EPS:
        raise SingularityError("beta undefined in vertical flight")
    return beta + atan2(c31, c21)


def beta_rate(
    sigma_dot: float, wb1: float, wb2: float, wb3: float, c_ba: np.ndarray
) -> float:
    """Rate of the plane-referenced bank angle.

    Raises
    ------
    SingularityError
        In vertical flight.
    """
    c11 = c_ba[0, 0]
    denom = 1.0 - c11 * c11
    if denom < VERTICAL_SIN_EPS:
        raise SingularityError("beta rate undefined in vertical flight")
    return (sigma_dot + wb1) - (c11 / denom) * (wb2 * c_ba[1, 0] + wb3 * c_ba[2, 0])


# --- typed wrappers -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RvStateRates:
    """Time derivatives of the ten-parameter state."""

    r_dot: float
    qa_rates: np.ndarray
    v_dot: float
    qb_rates: np.ndarray

    @classmethod
    def from_array(cls, ydot) -> "RvStateRates":
        ydot = np.asarray(ydot, dtype=float)
        return cls(float(ydot[0]), ydot[1:5].copy(), float(ydot[5]), ydot[6:10].copy())


@dataclass(frozen=True, eq=False)
class RvhStateRates:
    """Time derivatives of the eight-parameter state."""

    r_dot: float
    qa_rates: np.ndarray
    v_dot: float
    eps_b3_dot: float
    eta_b_dot: float


@dataclass(frozen=True)
class SphericalRates:
    """Time derivatives of the spherical baseline state."""

    r_dot: float
    lon_dot: float
    lat_dot: float
    v_dot: float
    gamma_dot: float
    psi_dot: float


@dataclass(frozen=True)
class GaugeInputs:
    """The two free angular-velocity components of the general form (rad/s)."""

    wa1: float
    wb1: float


def _profile_from_input(u: ControlInput, bank_mode: str = "sigma") -> ControlProfile:
    return ControlProfile.constant(
        alpha=u.alpha, bank=u.sigma, wb1=u.wb1, thrust=u.thrust, bank_mode=bank_mode
    )


def general_derivatives(
    state: RvState, gauge: GaugeInputs, u: ControlInput, env: Environment
):
    """General-form rates with explicit gauge inputs; returns rates and angular rates."""
    rhs = make_general_rhs(
        _profile_from_input(u), env, gauge=lambda t: (gauge.wa1, gauge.wb1)
    )
    y = state.to_array()
    ydot = rhs(0.0, y)
    rates = RvStateRates.from_array(ydot)
    wa = omega_from_rate_arrays(ydot[1:5], y[1:5])
    wb = omega_from_rate_arrays(ydot[6:10], y[6:10])
    angular = AngularRates(wa[0], wa[1], wa[2], wb[0], wb[1], wb[2])
    return rates, angular


def rv_derivatives(state: RvState, u: ControlInput, env: Environment) -> RvStateRates:
    """Rates of the ten-parameter zero-gauge form."""
    rhs = make_rv_rhs(_profile_from_input(u), env)
    return RvStateRates.from_array(rhs(0.0, state.to_array()))


def rvl_derivatives(state: RvlState, u: ControlInput, env: Environment) -> RvStateRates:
    """Rates of the lift-aligned form; ``u.wb1`` is the bank-rate command."""
    rhs = make_rvl_rhs(_profile_from_input(u), env)
    return RvStateRates.from_array(rhs(0.0, state.to_array()))


def rvh_derivatives(state: RvhState, u: ControlInput, env: Environment) -> RvhStateRates:
    """Rates of the eight-parameter form."""
    rhs = make_rvh_rhs(_profile_from_input(u), env)
    ydot = rhs(0.0, state.to_array())
    return RvhStateRates(
        float(ydot[0]), ydot[1:5].copy(), float(ydot[5]), float(ydot[6]), float(ydot[7])
    )


def cartesian_derivatives(
    state: CartesianState, u: ControlInput, env: Environment, beta: float = 0.0
) -> np.ndarray:
    """Ground-truth rates ``[velocity, acceleration]`` in observation coordinates."""
    profile = ControlProfile.constant(
        alpha=u.alpha, bank=beta, thrust=u.thrust, bank_mode="beta"
    )
    rhs = make_cartesian_rhs(profile, env)
    return rhs(0.0, state.to_array())


def spherical_derivatives(
    state: SphericalState, u: ControlInput, env: Environment, beta: float = 0.0
) -> SphericalRates:
    """Rates of the spherical baseline state."""
    profile = ControlProfile.constant(
        alpha=u.alpha, bank=beta, thrust=u.thrust, bank_mode="beta"
    )
    rhs = make_spherical_rhs(profile, env)
    return SphericalRates(*(float(x) for x in rhs(0.0, state.to_array())))


# --- parameterization registry -------------------------------------------


def _rv_to_cartesian_arr(y) -> CartesianState:
    return rv_to_cartesian(RvState.from_array(y))


def _rvh_to_cartesian_arr(y) -> CartesianState:
    return rvh_to_cartesian(RvhState.from_array(y))


def _spherical_to_cartesian_arr(y) -> CartesianState:
    return spherical_to_cartesian(SphericalState.from_array(y))


def _rv_from_cartesian(c, controls, env):
    return cartesian_to_rv(c).to_array()


def rvl_twist_angle(c: CartesianState, controls: ControlProfile) -> float:
    """Initial twist pointing the lift gauge's second axis at the commanded bank.

    In ``sigma`` mode the twist equals the initial bank command, which makes
    a zero bank-rate command equivalent to the rv form flying a constant
    bank.  In ``beta`` mode the twist also absorbs the gauge offset of the
    shortest-arc construction so the physical bank starts on profile.
    """
    bank0 = controls.bank(0.0)
    if controls.bank_mode == "sigma":
        return bank0
    base = cartesian_to_rv(c)
    c_ba = dcm_from_quat(base.qb)
    chi = atan2(c_ba[2, 0], c_ba[1, 0])
    return chi + bank0


def _rvl_from_cartesian(c, controls, env):
    return cartesian_to_rvl(c, twist=rvl_twist_angle(c, controls)).to_array()


def _rvh_from_cartesian(c, controls, env):
    return cartesian_to_rvh(c).to_array()


def _spherical_from_cartesian(c, controls, env):
    return cartesian_to_spherical(c).to_array()


@dataclass(frozen=True, eq=False)
class Parameterization:
    """Everything the propagator and scenario runner need for one state form."""

    name: str
    dim: int
    make_rhs: Callable
    to_cartesian: Callable
    from_cartesian: Callable
    quat_spans: tuple
    scales: np.ndarray
    radius_index: int  # -1 when the radius must be derived from the array

    def radius(self, y) -> float:
        if self.radius_index >= 0:
            return float(y[self.radius_index])
        return float(np.linalg.norm(y[0:3]))

    def speed(self, y) -> float:
        if self.name == "cartesian":
            return float(np.linalg.norm(y[3:6]))
        return float(y[5] if self.name != "spherical" else y[3])


PARAMETERIZATIONS = {
    "rv": Parameterization(
        name="rv",
        dim=10,
        make_rhs=make_rv_rhs,
        to_cartesian=_rv_to_cartesian_arr,
        from_cartesian=_rv_from_cartesian,
        quat_spans=((1, 5), (6, 10)),
        scales=np.array([_LENGTH_SCALE, 1, 1, 1, 1, _SPEED_SCALE, 1, 1, 1, 1], dtype=float),
        radius_index=0,
    ),
    "rvl": Parameterization(
        name="rvl",
        dim=10,
        make_rhs=make_rvl_rhs,
        to_cartesian=_rv_to_cartesian_arr,
        from_cartesian=_rvl_from_cartesian,
        quat_spans=((1, 5), (6, 10)),
        scales=np.array([_LENGTH_SCALE, 1, 1, 1, 1, _SPEED_SCALE, 1, 1, 1, 1], dtype=float),
        radius_index=0,
    ),
    "rvh": Parameterization(
        name="rvh",
        dim=8,
        make_rhs=make_rvh_rhs,
        to_cartesian=_rvh_to_cartesian_arr,
        from_cartesian=_rvh_from_cartesian,
        quat_spans=((1, 5), (6, 8)),
        scales=np.array([_LENGTH_SCALE, 1, 1, 1, 1, _SPEED_SCALE, 1, 1], dtype=float),
        radius_index=0,
    ),
    "spherical": Parameterization(
        name="spherical",
        dim=6,
        make_rhs=make_spherical_rhs,
        to_cartesian=_spherical_to_cartesian_arr,
        from_cartesian=_spherical_from_cartesian,
        quat_spans=(),
        scales=np.array([_LENGTH_SCALE, 1, 1, _SPEED_SCALE, 1, 1], dtype=float),
        radius_index=0,
    ),
    "cartesian": Parameterization(
        name="cartesian",
        dim=6,
        make_rhs=make_cartesian_rhs,
        to_cartesian=lambda y: CartesianState.from_array(y),
        from_cartesian=lambda c, controls, env: c.to_array(),
        quat_spans=(),
        scales=np.array(
            [_LENGTH_SCALE] * 3 + [_SPEED_SCALE] * 3, dtype=float
        ),
        radius_index=-1,
    ),
}


# --- per-sample diagnostics ------------------------------------------------


def sample_diagnostics(name: str, t: float, y, controls: ControlProfile, env: Environment):
    """Derived quantities at one propagated sample.

    Angular rates are recovered from the actual quaternion rates, the bank
    angle uses the plane-referenced map (0.0 where it is undefined), and the
    angular-momentum magnitude and specific orbital energy come from the
    Cartesian conversion.
    """
    y = np.asarray(y, dtype=float)
    spec = PARAMETERIZATIONS[name]
    cart = spec.to_cartesian(y)
    h_mag = float(np.linalg.norm(np.cross(cart.position, cart.velocity)))
    energy = 0.5 * cart.v**2 - env.body.mu / cart.r
    out = {
        "x": float(cart.position[0]),
        "y": float(cart.position[1]),
        "z": float(cart.position[2]),
        "vx": float(cart.velocity[0]),
        "vy": float(cart.velocity[1]),
        "vz": float(cart.velocity[2]),
        "r": cart.r,
        "v": cart.v,
        "h_mag": h_mag,
        "energy": energy,
        "alpha": controls.alpha(t),
        "thrust": controls.thrust(t),
    }

    rhs = spec.make_rhs(controls, env)
    try:
        ydot = rhs(t, y)
    except SingularityError:
        ydot = None

    nan = float("nan")
    if name in ("rv", "rvl"):
        out["norm_qa"] = float(np.linalg.norm(y[1:5]))
        out["norm_qb"] = float(np.linalg.norm(y[6:10]))
        out.update(
            eps_a1=y[1], eps_a2=y[2], eps_a3=y[3], eta_a=y[4],
            eps_b1=y[6], eps_b2=y[7], eps_b3=y[8], eta_b=y[9],
        )
        c_ba = dcm_from_quat(renormalize(y[6:10]))
        if name == "rv":
            sigma = (
                controls.bank(t)
                if controls.bank_mode == "sigma"
                else _safe_sigma_from_beta(controls.bank(t), c_ba)
            )
        else:
            sigma = 0.0
        out["sigma"] = sigma
        try:
            out["beta"] = beta_from_sigma(sigma, c_ba)
        except SingularityError:
            out["beta"] = 0.0
        if ydot is not None:
            wa = omega_from_rate_arrays(ydot[1:5], y[1:5])
            wb = omega_from_rate_arrays(ydot[6:10], y[6:10])
            out["angular_rates"] = AngularRates(*wa, *wb)
    elif name == "rvh":
        out["norm_qa"] = float(np.linalg.norm(y[1:5]))
        out["norm_qb"] = float(np.hypot(y[6], y[7]))
        out.update(
            eps_a1=y[1], eps_a2=y[2], eps_a3=y[3], eta_a=y[4],
            eps_b1=0.0, eps_b2=0.0, eps_b3=y[6], eta_b=y[7],
        )
        sigma = (
            controls.bank(t)
            if controls.bank_mode == "sigma"
            else controls.bank(t) + pi
        )
        out["sigma"] = sigma
        c_ba = RvhState.from_array(y).c_ba()
        try:
            out["beta"] = beta_from_sigma(sigma, c_ba)
        except SingularityError:
            out["beta"] = 0.0
        out["h_param"] = 2.0 * y[0] * y[5] * y[6] * y[7]
        if ydot is not None:
            wa = omega_from_rate_arrays(ydot[1:5], y[1:5])
            pair_norm_sq = y[6] * y[6] + y[7] * y[7]
            wb3 = 2.0 * (y[7] * ydot[6] - ydot[7] * y[6]) / pair_norm_sq
            out["angular_rates"] = AngularRates(wa[0], wa[1], wa[2], 0.0, 0.0, wb3)
    else:
        out["norm_qa"] = nan
        out["norm_qb"] = nan
        out.update(
            eps_a1=nan, eps_a2=nan, eps_a3=nan, eta_a=nan,
            eps_b1=nan, eps_b2=nan, eps_b3=nan, eta_b=nan,
        )
        out["sigma"] = nan
        out["beta"] = controls.bank(t)
    return out


def _safe_sigma_from_beta(beta, c_ba):
    try:
        return sigma_from_beta(beta, c_ba)
    except SingularityError:
        return 0.0
