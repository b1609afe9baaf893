"""Quaternion-based 3DOF point-mass flight dynamics over a rotating central body.

Three gauge choices of a two-quaternion state description (``rv``, ``rvl``,
``rvh``) alongside spherical and Cartesian baselines, with force models,
numerical propagation, and a scenario CLI.  The ``rv`` and ``rvl`` forms
stay finite in vertical flight where the spherical azimuth equation and the
angular-momentum gauge break down.
"""

from .controls import ControlProfile, PiecewiseLinear
from .dynamics import (
    PARAMETERIZATIONS,
    GaugeInputs,
    RvhStateRates,
    RvStateRates,
    SphericalRates,
    beta_from_sigma,
    beta_rate,
    cartesian_derivatives,
    general_derivatives,
    rv_derivatives,
    rvh_derivatives,
    rvl_derivatives,
    sigma_from_beta,
    spherical_derivatives,
)
from .environment import (
    EARTH,
    STANDARD_ATMOSPHERE,
    AeroModel,
    Atmosphere,
    CentralBody,
    ControlInput,
    Environment,
    ForceComponents,
    Vehicle,
    aero_forces,
    apparent_force_B,
    density,
    net_force_B,
)
from .errors import ConfigError, PropagationError, QuatflightError, SingularityError
from .propagation import IntegratorConfig, StopEvent, Trajectory, propagate
from .quat import (
    AxisAngle,
    UnitQuaternion,
    dcm_from_axis_angle,
    dcm_from_quat,
    omega_from_quat_rates,
    quat_from_axis_angle,
    quat_from_dcm,
    quat_rates,
    renormalize,
    skew,
)
from .scenario import (
    ScenarioConfig,
    bundled_scenario_path,
    load_scenario,
    run_scenario,
)
from .states import (
    AngularRates,
    CartesianState,
    RvhState,
    RvlState,
    RvState,
    SphericalState,
    bank_basis_g,
    cartesian_to_rv,
    cartesian_to_rvh,
    cartesian_to_rvl,
    cartesian_to_spherical,
    rv_to_cartesian,
    rvh_to_cartesian,
    spherical_to_cartesian,
)

__version__ = "0.1.0"

__all__ = [
    "AeroModel",
    "AngularRates",
    "Atmosphere",
    "AxisAngle",
    "CartesianState",
    "CentralBody",
    "ConfigError",
    "ControlInput",
    "ControlProfile",
    "EARTH",
    "Environment",
    "ForceComponents",
    "GaugeInputs",
    "IntegratorConfig",
    "PARAMETERIZATIONS",
    "PiecewiseLinear",
    "PropagationError",
    "QuatflightError",
    "RvStateRates",
    "RvState",
    "RvhState",
    "RvhStateRates",
    "RvlState",
    "ScenarioConfig",
    "SingularityError",
    "SphericalRates",
    "SphericalState",
    "STANDARD_ATMOSPHERE",
    "StopEvent",
    "Trajectory",
    "UnitQuaternion",
    "Vehicle",
    "aero_forces",
    "apparent_force_B",
    "bank_basis_g",
    "beta_from_sigma",
    "beta_rate",
    "bundled_scenario_path",
    "cartesian_derivatives",
    "cartesian_to_rv",
    "cartesian_to_rvh",
    "cartesian_to_rvl",
    "cartesian_to_spherical",
    "dcm_from_axis_angle",
    "dcm_from_quat",
    "density",
    "general_derivatives",
    "load_scenario",
    "net_force_B",
    "omega_from_quat_rates",
    "propagate",
    "quat_from_axis_angle",
    "quat_from_dcm",
    "quat_rates",
    "renormalize",
    "run_scenario",
    "rv_derivatives",
    "rv_to_cartesian",
    "rvh_derivatives",
    "rvh_to_cartesian",
    "rvl_derivatives",
    "sigma_from_beta",
    "skew",
    "spherical_derivatives",
    "spherical_to_cartesian",
]
