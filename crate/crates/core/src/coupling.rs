//! Emitter-field coupling: polarization overlaps, the motional correction
//! picked up by a moving dipole, polarization-summed identities, and the
//! continuum measure weight attached to each discretized mode.

use crate::bath::{GridMode, Mode};
use crate::scales::AtomParams;
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// eps . e_d, the coupling of a dipole at rest.
pub fn polarization_overlap<T: Scalar>(mode: Mode<T>, e_d: Vec3<T>) -> T {
    mode.eps_vec.dot(e_d)
}

/// (kappa x eps) x e_d. This direction factor carries both the motional
/// coupling correction and the difference between kinetic and canonical
/// momentum.
pub fn b_vector<T: Scalar>(mode: Mode<T>, e_d: Vec3<T>) -> Vec3<T> {
    mode.kappa.cross(mode.eps_vec).cross(e_d)
}

/// Dimensionless coupling of a moving emitter, evaluated exactly at the
/// given canonical momentum:
///
///   g = eps . e_d + (p - hbar k / 2) . b / (M c),   k = kappa omega / c.
pub fn coupling_g<T: Scalar>(mode: Mode<T>, p: Vec3<T>, atom: &AtomParams<T>) -> T {
    let k = atom.constants();
    let half_recoil = k.hbar * mode.omega / (T::of(2.0) * k.c);
    let pm = p - mode.kappa * half_recoil;
    polarization_overlap(mode, atom.e_d) + pm.dot(b_vector(mode, atom.e_d)) / (atom.mass * k.c)
}

/// g^2 truncated after the term linear in 1/(M c):
///
///   (eps . e_d)^2 + (2 / M c)(eps . e_d)(p0 - hbar k / 2) . b.
///
/// The dropped square of the motional term is O((M c)^-2).
pub fn g_squared_expanded<T: Scalar>(mode: Mode<T>, p0: Vec3<T>, atom: &AtomParams<T>) -> T {
    let k = atom.constants();
    let overlap = polarization_overlap(mode, atom.e_d);
    let half_recoil = k.hbar * mode.omega / (T::of(2.0) * k.c);
    let pm = p0 - mode.kappa * half_recoil;
    overlap * overlap
        + T::of(2.0) * overlap * pm.dot(b_vector(mode, atom.e_d)) / (atom.mass * k.c)
}

/// Sum of (d e_d . eps)^2 over both transverse polarizations, in closed
/// form: d^2 - (d e_d . kappa)^2.
pub fn polarization_sum_scalar<T: Scalar>(kappa: Vec3<T>, e_d: Vec3<T>, d: T) -> T {
    let proj = d * e_d.dot(kappa);
    d * d - proj * proj
}

/// Sum of (d e_d . eps)(a . (kappa x eps) x (d e_d)) over both
/// polarizations, in closed form: (d . kappa)(a . d) - d^2 (a . kappa) with
/// d = d e_d. Holds for any vector a.
pub fn polarization_sum_vector<T: Scalar>(kappa: Vec3<T>, e_d: Vec3<T>, d: T, a: Vec3<T>) -> T {
    let d_vec = e_d * d;
    d_vec.dot(kappa) * a.dot(d_vec) - d * d * a.dot(kappa)
}

/// Continuum measure prefactor d^2 / (2 (2 pi c)^3 hbar eps0). Multiplied by
/// omega^3 and the quadrature weights it converts per-mode sums into the
/// free-space integral; the quantization volume cancels out.
pub fn measure_prefactor<T: Scalar>(atom: &AtomParams<T>) -> T {
    let k = atom.constants();
    let two_pi_c = T::of(2.0) * T::PI() * k.c;
    atom.dipole * atom.dipole
        / (T::of(2.0) * two_pi_c * two_pi_c * two_pi_c * k.hbar * k.eps0)
}

/// Effective squared Rabi coupling of one discretized mode,
/// prefactor * omega^3 * w_dir * w_om.
pub fn mode_coupling_weight<T: Scalar>(gm: &GridMode<T>, atom: &AtomParams<T>) -> T {
    let om = gm.mode.omega;
    measure_prefactor(atom) * om * om * om * gm.w_dir * gm.w_om
}

/// Everything the dynamics engine needs per mode: the coupling at the
/// initial momentum, the direction factor, and the measure weight.
#[derive(Clone, Copy, Debug)]
pub struct CouplingFactors<T> {
    pub g: T,
    pub b_vec: Vec3<T>,
    pub omega_rabi_sq_weight: T,
}

impl<T: Scalar> CouplingFactors<T> {
    pub fn for_mode(gm: &GridMode<T>, atom: &AtomParams<T>) -> Self {
        Self {
            g: coupling_g(gm.mode, atom.p0, atom),
            b_vec: b_vector(gm.mode, atom.e_d),
            omega_rabi_sq_weight: mode_coupling_weight(gm, atom),
        }
    }
}
