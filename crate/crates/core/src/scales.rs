//! Emitter parameters, unit systems, and the small dimensionless ratios that
//! control the slow-motion expansion.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// Unit convention the parameters are expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnitSystem {
    /// hbar = c = eps0 = 1; the transition frequency sets the scale.
    Natural,
    /// SI; physical constants take their CODATA values.
    Si,
}

/// Physical constants under a given unit system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants<T> {
    pub hbar: T,
    pub c: T,
    pub eps0: T,
}

impl<T: Scalar> Constants<T> {
    pub fn natural() -> Self {
        Self {
            hbar: T::one(),
            c: T::one(),
            eps0: T::one(),
        }
    }

    pub fn si() -> Self {
        Self {
            hbar: T::of(1.054_571_817e-34),
            c: T::of(299_792_458.0),
            eps0: T::of(8.854_187_812_8e-12),
        }
    }

    pub fn for_units(units: UnitSystem) -> Self {
        match units {
            UnitSystem::Natural => Self::natural(),
            UnitSystem::Si => Self::si(),
        }
    }
}

/// Parameters of the moving two-level emitter.
///
/// `dipole` is the transition dipole magnitude and `e_d` its unit
/// orientation; `p0` is the initial canonical momentum of the center of mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomParams<T> {
    pub omega_a: T,
    pub dipole: T,
    pub e_d: Vec3<T>,
    pub mass: T,
    pub p0: Vec3<T>,
    pub units: UnitSystem,
}

/// Dimensionless expansion parameters derived from [`AtomParams`].
///
/// `epsilon` is the photon-recoil ratio hbar*omega_A/(M c^2) and `beta` the
/// velocity ratio p0/(M c). `in_regime` is false once either exceeds 0.1;
/// results are still computed, but first-order comparisons are meaningless
/// there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallParams<T> {
    pub epsilon: T,
    pub beta: Vec3<T>,
    pub in_regime: bool,
}

/// Largest `epsilon` or `|beta|` for which the first-order expansion is
/// considered trustworthy.
pub const REGIME_LIMIT: f64 = 0.1;

impl<T: Scalar> AtomParams<T> {
    /// Validates and builds the parameter set.
    ///
    /// Rejects non-finite entries, non-positive frequency or mass, negative
    /// dipole magnitude, a non-unit `e_d`, and speeds at or beyond c.
    pub fn new(
        omega_a: T,
        dipole: T,
        e_d: Vec3<T>,
        mass: T,
        p0: Vec3<T>,
        units: UnitSystem,
    ) -> Result<Self> {
        if !omega_a.is_finite() || !dipole.is_finite() || !mass.is_finite() {
            return Err(Error::domain("omega_a, dipole, and mass must be finite"));
        }
        if !e_d.is_finite() || !p0.is_finite() {
            return Err(Error::domain("e_d and p0 must be finite"));
        }
        if omega_a <= T::zero() {
            return Err(Error::domain("omega_a must be positive"));
        }
        if dipole < T::zero() {
            return Err(Error::domain("dipole magnitude must be non-negative"));
        }
        if mass <= T::zero() {
            return Err(Error::domain("mass must be positive"));
        }
        if (e_d.norm() - T::one()).abs() > T::geometry_tol() {
            return Err(Error::domain("e_d must be a unit vector"));
        }
        let atom = Self {
            omega_a,
            dipole,
            e_d,
            mass,
            p0,
            units,
        };
        if atom.small_params().beta.norm() >= T::one() {
            return Err(Error::domain("|p0/(M c)| must be below 1"));
        }
        Ok(atom)
    }

    /// Builds the parameter set from a full dipole vector (magnitude times
    /// orientation).
    pub fn from_dipole_vector(
        omega_a: T,
        dipole: Vec3<T>,
        mass: T,
        p0: Vec3<T>,
        units: UnitSystem,
    ) -> Result<Self> {
        if !dipole.is_finite() {
            return Err(Error::domain("dipole vector must be finite"));
        }
        let d = dipole.norm();
        let e_d = dipole.normalized().unwrap_or_else(Vec3::unit_z);
        Self::new(omega_a, d, e_d, mass, p0, units)
    }

    pub fn constants(&self) -> Constants<T> {
        Constants::for_units(self.units)
    }

    /// Dimensionless recoil and velocity ratios for this emitter.
    pub fn small_params(&self) -> SmallParams<T> {
        let k = self.constants();
        let epsilon = k.hbar * self.omega_a / (self.mass * k.c * k.c);
        let beta = self.p0 / (self.mass * k.c);
        let limit = T::of(REGIME_LIMIT);
        SmallParams {
            epsilon,
            beta,
            in_regime: epsilon <= limit && beta.norm() <= limit,
        }
    }

    /// Rescales an SI parameter set to natural units with omega_a = 1,
    /// preserving `epsilon`, `beta`, and the decay rate per transition
    /// frequency. Natural-mode input is returned unchanged.
    pub fn to_natural(&self) -> Self {
        match self.units {
            UnitSystem::Natural => *self,
            UnitSystem::Si => {
                let k = self.constants();
                let small = self.small_params();
                // d_nat^2 / (3 pi) must reproduce Gamma/omega_A of the SI input.
                let dipole_scale = self.omega_a / (k.eps0 * k.hbar * k.c * k.c * k.c).sqrt();
                let mass = small.epsilon.recip();
                Self {
                    omega_a: T::one(),
                    dipole: self.dipole * dipole_scale,
                    e_d: self.e_d,
                    mass,
                    p0: small.beta * mass,
                    units: UnitSystem::Natural,
                }
            }
        }
    }
}
