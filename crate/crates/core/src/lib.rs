//! Spontaneous emission of a moving two-level emitter, Roentgen term
//! included: decay rate and vacuum momentum drift by three independent
//! routes, plus the relativistic bookkeeping that explains the drift.
//!
//! The three routes are
//!
//! 1. closed forms, first order in the recoil ratio epsilon and velocity
//!    ratio beta ([`golden_rule::decay_rate_closed`],
//!    [`golden_rule::momentum_drift_closed`]);
//! 2. golden-rule quadrature over emission directions with the frequency
//!    integral resolved analytically at the Doppler-recoil root
//!    ([`golden_rule::decay_rate_quadrature`],
//!    [`golden_rule::momentum_drift_quadrature`]);
//! 3. time-domain amplitude dynamics on a discretized mode bath
//!    ([`dynamics::evolve`]) with rate and drift extracted by fitting.
//!
//! [`relativity`] closes the loop: the drift is the momentum a body sheds
//! when its rest mass decays at constant velocity, not a friction force.
//!
//! All numerics are generic over the floating-point scalar through
//! [`scalar::Scalar`]; the `*F` aliases fix `f64`.

// Validation guards are written as `!(x > limit)` on purpose: the negated
// comparison is false for NaN, so non-numbers are rejected along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod golden_rule;
pub mod quadrature;
pub mod relativity;
pub mod scalar;
pub mod scales;
pub mod vec3;

pub use bath::{
    build_mode_grid, direction_grid, frequency_grid, polarization_basis, DirectionGrid,
    FrequencyGrid, GridMode, Mode, ModeGrid,
};
pub use coupling::{
    b_vector, coupling_g, g_squared_expanded, measure_prefactor, mode_coupling_weight,
    polarization_overlap, polarization_sum_scalar, polarization_sum_vector, CouplingFactors,
};
pub use dynamics::{
    default_sample_stride, default_step, evolve, expect_bxd, expect_p, fit_decay_rate,
    fit_momentum_drift, grid_golden_rule, AmplitudeState, Trajectory, TrajectorySample,
};
pub use error::{Error, Result};
pub use golden_rule::{
    angular_oracles, decay_rate_closed, decay_rate_leading, decay_rate_quadrature,
    decay_rate_quadrature_with, decay_report, detuning, momentum_drift_closed,
    momentum_drift_quadrature, momentum_drift_quadrature_with, omega_plus, radial_integrand,
    AngularChecks, DecayReport, RadialKind, RadialStrategy, RootReduction,
};
pub use quadrature::{gauss_legendre, gauss_legendre_on};
pub use relativity::{
    doppler_pair, emitter_scenario, friction_consistency, mass_rate, EmitterScenario,
    FrictionConsistency,
};
pub use scalar::Scalar;
pub use scales::{AtomParams, Constants, SmallParams, UnitSystem};
pub use vec3::Vec3;

/// Double-precision aliases for the main types.
pub type Vec3F = Vec3<f64>;
pub type AtomF = AtomParams<f64>;
pub type ConstantsF = Constants<f64>;
pub type ModeF = Mode<f64>;
pub type ModeGridF = ModeGrid<f64>;
pub type DirectionGridF = DirectionGrid<f64>;
pub type FrequencyGridF = FrequencyGrid<f64>;
pub type TrajectoryF = Trajectory<f64>;
pub type AmplitudeStateF = AmplitudeState<f64>;
pub type DecayReportF = DecayReport<f64>;
pub type EmitterScenarioF = EmitterScenario<f64>;
