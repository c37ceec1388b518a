//! Relativistic energy-momentum bookkeeping for a moving emitter: the
//! two-photon emitter thought experiment, the mass defect of decay, and the
//! consistency of the friction drift with that defect.

use crate::error::{Error, Result};
use crate::golden_rule::{decay_rate_leading, momentum_drift_closed};
use crate::scales::{AtomParams, Constants};
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// Energy and momentum ledger of a body that emits two equal back-to-back
/// photons in its own rest frame, evaluated in a frame where it moves with
/// velocity `beta * c` along the emission axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmitterScenario<T> {
    /// Photon frequency in the emitter rest frame.
    pub omega_0: T,
    /// Signed velocity over c along the emission axis.
    pub beta: T,
    pub gamma: T,
    /// Lab frequency of the photon emitted against the motion.
    pub omega_l: T,
    /// Lab frequency of the photon emitted along the motion.
    pub omega_r: T,
    /// Change of the body's energy, always -2 hbar omega_0 gamma.
    pub d_energy: T,
    /// Change of the body's momentum, d_energy * v / c^2: the velocity is
    /// unchanged, only the mass drops.
    pub d_momentum: T,
}

/// Doppler-shifted lab frequencies (against, along the motion) of a photon
/// pair emitted at `omega_0` in the frame of a body moving with velocity
/// `beta * c`.
pub fn doppler_pair<T: Scalar>(omega_0: T, beta: T) -> Result<(T, T)> {
    if !(omega_0 > T::zero()) || !omega_0.is_finite() {
        return Err(Error::domain("omega_0 must be positive and finite"));
    }
    if !beta.is_finite() || beta.abs() >= T::one() {
        return Err(Error::domain("|beta| must be below 1"));
    }
    // gamma from (1-beta)(1+beta) avoids cancellation in 1 - beta^2.
    let gamma = ((T::one() - beta) * (T::one() + beta)).sqrt().recip();
    Ok((omega_0 * gamma * (T::one() - beta), omega_0 * gamma * (T::one() + beta)))
}

/// Full ledger of the two-photon emission, Doppler shifts included.
///
/// The photons carry net momentum hbar (omega_r - omega_l) / c along the
/// motion even though they are back-to-back in the rest frame; the body
/// recoils by exactly that amount while its velocity stays fixed, because
/// the energy loss 2 hbar omega_0 gamma lowers its mass. `d_momentum` is
/// constructed as `d_energy * beta / c`, the statement of that balance.
pub fn emitter_scenario<T: Scalar>(
    omega_0: T,
    beta: T,
    constants: Constants<T>,
) -> Result<EmitterScenario<T>> {
    let (omega_l, omega_r) = doppler_pair(omega_0, beta)?;
    let gamma = ((T::one() - beta) * (T::one() + beta)).sqrt().recip();
    let d_energy = -T::of(2.0) * constants.hbar * omega_0 * gamma;
    let d_momentum = d_energy * beta / constants.c;
    Ok(EmitterScenario {
        omega_0,
        beta,
        gamma,
        omega_l,
        omega_r,
        d_energy,
        d_momentum,
    })
}

/// Rate of change of the emitter's rest mass while it decays:
/// dM/dt = -Gamma hbar omega_A / c^2.
pub fn mass_rate<T: Scalar>(gamma_decay: T, omega_a: T, constants: Constants<T>) -> T {
    -gamma_decay * constants.hbar * omega_a / (constants.c * constants.c)
}

/// Comparison of the closed-form vacuum drift with the momentum change
/// required by the decaying rest mass at constant velocity.
#[derive(Clone, Copy, Debug)]
pub struct FrictionConsistency<T> {
    /// Closed-form leading-order momentum drift rate.
    pub drift_closed: Vec3<T>,
    /// v dM/dt: momentum change of a body whose mass decays at the
    /// leading-order rate while its velocity stays fixed.
    pub mass_defect_drift: Vec3<T>,
    pub rel_dev: T,
}

/// Checks that the apparent friction is pure mass loss: the drift
/// -Gamma_0 epsilon p0 equals v dM/dt with dM/dt = -Gamma_0 hbar
/// omega_A / c^2. Both sides use the leading-order rate, so the deviation
/// is rounding only.
pub fn friction_consistency<T: Scalar>(atom: &AtomParams<T>) -> FrictionConsistency<T> {
    let k = atom.constants();
    let gamma0 = decay_rate_leading(atom);
    let drift_closed = momentum_drift_closed(atom);
    let v = atom.p0 / atom.mass;
    let mass_defect_drift = v * mass_rate(gamma0, atom.omega_a, k);
    let scale = drift_closed
        .norm()
        .max(gamma0 * k.hbar * atom.omega_a / (k.c * k.c) * k.c);
    let rel_dev = if scale > T::zero() {
        (drift_closed - mass_defect_drift).norm() / scale
    } else {
        T::zero()
    };
    FrictionConsistency {
        drift_closed,
        mass_defect_drift,
        rel_dev,
    }
}
