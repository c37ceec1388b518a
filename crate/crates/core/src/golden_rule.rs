//! Golden-rule decay rate and momentum drift: the energy delta function is
//! resolved exactly along each propagation direction by solving for the
//! emitted frequency, then the direction integral is done by solid-angle
//! quadrature. The first-order closed forms live here too as references.

use crate::bath::{DirectionGrid, Mode};
use crate::coupling::{polarization_sum_scalar, polarization_sum_vector};
use crate::error::{Error, Result};
use crate::quadrature::CompensatedSum;
use crate::scales::AtomParams;
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// Energy mismatch of an emission channel,
/// omega_A - omega + k . (p0 - hbar k / 2) / M with k = kappa omega / c.
/// Positive root in omega means the channel conserves energy.
pub fn detuning<T: Scalar>(mode: Mode<T>, p0: Vec3<T>, atom: &AtomParams<T>) -> T {
    let k = atom.constants();
    let wave = mode.kappa * (mode.omega / k.c);
    let half_recoil = wave * (k.hbar / T::of(2.0));
    atom.omega_a - mode.omega + wave.dot(p0 - half_recoil) / atom.mass
}

/// Resonant frequency along one direction and the Jacobian of the detuning
/// there, plus the first-order approximation of the root.
#[derive(Clone, Copy, Debug)]
pub struct RootReduction<T> {
    /// Exact positive root of the detuning, 2 omega_A / (a + sqrt(a^2 + 2 eps))
    /// with a = 1 - kappa . beta. This form stays accurate as eps -> 0.
    pub omega_plus: T,
    /// omega_A (1 + kappa . beta - eps / 2), the root expanded to first order.
    pub omega_plus_linear: T,
    /// |d detuning / d omega| at the root: a + eps omega_plus / omega_A.
    pub jacobian: T,
}

/// Solves the detuning for its positive root along `kappa`.
pub fn omega_plus<T: Scalar>(
    kappa: Vec3<T>,
    p0: Vec3<T>,
    atom: &AtomParams<T>,
) -> Result<RootReduction<T>> {
    let k = atom.constants();
    let beta = p0 / (atom.mass * k.c);
    let eps = atom.small_params().epsilon;
    let a = T::one() - kappa.dot(beta);
    if !(a > T::zero()) {
        return Err(Error::domain(
            "no positive emission frequency: kappa . p0 / (M c) must stay below 1",
        ));
    }
    let two = T::of(2.0);
    let omega = two * atom.omega_a / (a + (a * a + two * eps).sqrt());
    Ok(RootReduction {
        omega_plus: omega,
        omega_plus_linear: atom.omega_a * (T::one() + kappa.dot(beta) - eps / two),
        jacobian: a + eps * omega / atom.omega_a,
    })
}

/// How the per-direction radial integrand is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialStrategy {
    /// Exact root and Jacobian; coupling squared kept to first order in
    /// 1/(M c). Default.
    Exact,
    /// Everything expanded to first order in the recoil and velocity ratios;
    /// the integrand becomes a low-degree polynomial in kappa.
    FirstOrder,
}

/// Which reduced radial integrand to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialKind {
    /// Integrand of the decay rate (omega^3 weighting).
    Rate,
    /// Integrand of the momentum drift magnitude (omega^4 weighting); the
    /// direction vector kappa is applied by the caller.
    Drift,
}

/// Frequency integral collapsed onto the resonant root for one direction.
/// Multiply by the direction weight and the overall prefactor to get the
/// rate (and additionally by -kappa for the drift).
pub fn radial_integrand<T: Scalar>(
    kappa: Vec3<T>,
    p0: Vec3<T>,
    atom: &AtomParams<T>,
    kind: RadialKind,
    strategy: RadialStrategy,
) -> Result<T> {
    let k = atom.constants();
    let beta = p0 / (atom.mass * k.c);
    let eps = atom.small_params().epsilon;
    let two = T::of(2.0);
    let pss = polarization_sum_scalar(kappa, atom.e_d, atom.dipole);
    match strategy {
        RadialStrategy::Exact => {
            let root = omega_plus(kappa, p0, atom)?;
            let wp = root.omega_plus;
            let recoil_shift = kappa * (eps * wp / (two * atom.omega_a));
            let psv = polarization_sum_vector(
                kappa,
                atom.e_d,
                atom.dipole,
                (beta - recoil_shift) * two,
            );
            let f_rate = wp * wp * wp * (pss + psv) / root.jacobian;
            Ok(match kind {
                RadialKind::Rate => f_rate,
                RadialKind::Drift => wp * f_rate,
            })
        }
        RadialStrategy::FirstOrder => {
            let kb = kappa.dot(beta);
            let psv = polarization_sum_vector(kappa, atom.e_d, atom.dipole, beta * two);
            let wa = atom.omega_a;
            let wa3 = wa * wa * wa;
            Ok(match kind {
                RadialKind::Rate => {
                    wa3 * ((T::one() - T::of(1.5) * eps + T::of(4.0) * kb) * pss + psv)
                }
                RadialKind::Drift => {
                    wa3 * wa * ((T::one() - two * eps + T::of(5.0) * kb) * pss + psv)
                }
            })
        }
    }
}

fn rate_prefactor<T: Scalar>(atom: &AtomParams<T>) -> T {
    let k = atom.constants();
    let two_pi_c = T::of(2.0) * T::PI() * k.c;
    T::PI() / (two_pi_c * two_pi_c * two_pi_c * k.hbar * k.eps0)
}

fn drift_prefactor<T: Scalar>(atom: &AtomParams<T>) -> T {
    let k = atom.constants();
    let two_pi_c = T::of(2.0) * T::PI() * k.c;
    T::PI() / (two_pi_c * two_pi_c * two_pi_c * k.c * k.eps0)
}

/// Decay rate by solid-angle quadrature with a chosen radial strategy.
pub fn decay_rate_quadrature_with<T: Scalar>(
    atom: &AtomParams<T>,
    grid: &DirectionGrid<T>,
    strategy: RadialStrategy,
) -> Result<T> {
    let mut acc = CompensatedSum::new();
    for &(kappa, w) in grid.nodes() {
        acc.add(w * radial_integrand(kappa, atom.p0, atom, RadialKind::Rate, strategy)?);
    }
    Ok(rate_prefactor(atom) * acc.value())
}

/// Decay rate by solid-angle quadrature (exact radial strategy).
pub fn decay_rate_quadrature<T: Scalar>(
    atom: &AtomParams<T>,
    grid: &DirectionGrid<T>,
) -> Result<T> {
    decay_rate_quadrature_with(atom, grid, RadialStrategy::Exact)
}

/// Momentum drift by solid-angle quadrature with a chosen radial strategy.
/// Compensated per-component sums keep the odd-integrand cancellation on
/// antipodally symmetric grids at the rounding floor.
pub fn momentum_drift_quadrature_with<T: Scalar>(
    atom: &AtomParams<T>,
    grid: &DirectionGrid<T>,
    strategy: RadialStrategy,
) -> Result<Vec3<T>> {
    let mut acc = [
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    ];
    for &(kappa, w) in grid.nodes() {
        let f = radial_integrand(kappa, atom.p0, atom, RadialKind::Drift, strategy)?;
        let wf = w * f;
        acc[0].add(wf * kappa.x);
        acc[1].add(wf * kappa.y);
        acc[2].add(wf * kappa.z);
    }
    Ok(-Vec3::new(acc[0].value(), acc[1].value(), acc[2].value()) * drift_prefactor(atom))
}

/// Momentum drift by solid-angle quadrature (exact radial strategy).
pub fn momentum_drift_quadrature<T: Scalar>(
    atom: &AtomParams<T>,
    grid: &DirectionGrid<T>,
) -> Result<Vec3<T>> {
    momentum_drift_quadrature_with(atom, grid, RadialStrategy::Exact)
}

/// Leading-order decay rate omega_A^3 d^2 / (3 pi eps0 hbar c^3), with no
/// recoil correction.
pub fn decay_rate_leading<T: Scalar>(atom: &AtomParams<T>) -> T {
    let k = atom.constants();
    let wa = atom.omega_a;
    wa * wa * wa * atom.dipole * atom.dipole
        / (T::of(3.0) * T::PI() * k.eps0 * k.hbar * k.c * k.c * k.c)
}

/// First-order decay rate: the leading rate times (1 - 3 eps / 2), where
/// eps is the recoil ratio hbar omega_A / (M c^2). Velocity-independent.
pub fn decay_rate_closed<T: Scalar>(atom: &AtomParams<T>) -> T {
    let eps = atom.small_params().epsilon;
    decay_rate_leading(atom) * (T::one() - T::of(1.5) * eps)
}

/// First-order momentum drift: -Gamma0 (hbar omega_A / M c^2) p0, with the
/// eps-independent leading rate as prefactor. Antiparallel to p0 and
/// independent of the dipole orientation.
pub fn momentum_drift_closed<T: Scalar>(atom: &AtomParams<T>) -> Vec3<T> {
    let eps = atom.small_params().epsilon;
    atom.p0 * (-decay_rate_leading(atom) * eps)
}

/// Quadrature results next to their closed-form references.
#[derive(Clone, Copy, Debug)]
pub struct DecayReport<T> {
    pub gamma_quad: T,
    pub drift_quad: Vec3<T>,
    pub gamma_closed: T,
    pub drift_closed: Vec3<T>,
    pub rel_dev_gamma: T,
    /// Drift deviation relative to the closed-form magnitude; when that is
    /// zero (p0 = 0) the natural drift scale Gamma hbar omega_A / c is used
    /// instead.
    pub rel_dev_drift: T,
}

/// Runs both quadratures (exact strategy) and compares with closed forms.
pub fn decay_report<T: Scalar>(
    atom: &AtomParams<T>,
    grid: &DirectionGrid<T>,
) -> Result<DecayReport<T>> {
    let k = atom.constants();
    let gamma_quad = decay_rate_quadrature(atom, grid)?;
    let drift_quad = momentum_drift_quadrature(atom, grid)?;
    let gamma_closed = decay_rate_closed(atom);
    let drift_closed = momentum_drift_closed(atom);
    let drift_scale = if drift_closed.norm() > T::zero() {
        drift_closed.norm()
    } else {
        gamma_closed * k.hbar * atom.omega_a / k.c
    };
    Ok(DecayReport {
        gamma_quad,
        drift_quad,
        gamma_closed,
        drift_closed,
        rel_dev_gamma: ((gamma_quad - gamma_closed) / gamma_closed).abs(),
        rel_dev_drift: (drift_quad - drift_closed).norm() / drift_scale,
    })
}

/// The three solid-angle integrals behind the first-order results, each as
/// a (quadrature, analytic) pair. `d_vec` is the full dipole vector and `p`
/// an arbitrary momentum-like vector.
#[derive(Clone, Copy, Debug)]
pub struct AngularChecks<T> {
    /// Integral of d^2 - (d . kappa)^2; analytic (8 pi / 3) d^2.
    pub transverse: (T, T),
    /// Integral of 5 kappa (kappa . p)(d^2 - (d . kappa)^2); analytic
    /// (8 pi / 3)(2 d^2 p - (p . d) d).
    pub beamed: (Vec3<T>, Vec3<T>),
    /// Integral of 2 kappa (d^2 (kappa . p) - (kappa . d)(d . p)); analytic
    /// (8 pi / 3)(d^2 p - (p . d) d).
    pub mixed: (Vec3<T>, Vec3<T>),
}

/// Evaluates the three angular integrals on the given grid against their
/// closed forms.
pub fn angular_oracles<T: Scalar>(
    grid: &DirectionGrid<T>,
    d_vec: Vec3<T>,
    p: Vec3<T>,
) -> AngularChecks<T> {
    let dd = d_vec.norm_sq();
    let mut transverse = CompensatedSum::new();
    let mut beamed = [
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    ];
    let mut mixed = [
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    ];
    for &(kappa, w) in grid.nodes() {
        let dk = d_vec.dot(kappa);
        let trans = dd - dk * dk;
        transverse.add(w * trans);
        let bw = T::of(5.0) * w * kappa.dot(p) * trans;
        let mw = T::of(2.0) * w * (dd * kappa.dot(p) - dk * d_vec.dot(p));
        for (i, &c) in kappa.as_array().iter().enumerate() {
            beamed[i].add(bw * c);
            mixed[i].add(mw * c);
        }
    }
    let sphere = T::of(8.0) * T::PI() / T::of(3.0);
    AngularChecks {
        transverse: (transverse.value(), sphere * dd),
        beamed: (
            Vec3::new(beamed[0].value(), beamed[1].value(), beamed[2].value()),
            (p * (T::of(2.0) * dd) - d_vec * p.dot(d_vec)) * sphere,
        ),
        mixed: (
            Vec3::new(mixed[0].value(), mixed[1].value(), mixed[2].value()),
            (p * dd - d_vec * p.dot(d_vec)) * sphere,
        ),
    }
}
