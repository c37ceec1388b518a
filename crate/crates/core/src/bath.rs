//! Discretized radiation bath: propagation directions with solid-angle
//! weights, transverse polarization bases, positive frequency nodes, and the
//! enumerated mode list the dynamics engine consumes.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// Below this sine of the polar angle the azimuthal basis is degenerate and
/// the polarization convention falls back to the x axis.
pub const POLE_FALLBACK_TOL: f64 = 1e-8;

/// One plane-wave mode: unit propagation direction `kappa`, angular frequency
/// `omega`, polarization slot `lambda` in {1, 2}, and the unit polarization
/// vector itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode<T> {
    pub kappa: Vec3<T>,
    pub omega: T,
    pub lambda: u8,
    pub eps_vec: Vec3<T>,
}

impl<T: Scalar> Mode<T> {
    /// Validates unit norms, transversality, and the frequency sign.
    pub fn new(kappa: Vec3<T>, omega: T, lambda: u8, eps_vec: Vec3<T>) -> Result<Self> {
        let tol = T::geometry_tol();
        if !kappa.is_finite() || !eps_vec.is_finite() || !omega.is_finite() {
            return Err(Error::domain("mode entries must be finite"));
        }
        if omega <= T::zero() {
            return Err(Error::domain("mode frequency must be positive"));
        }
        if lambda != 1 && lambda != 2 {
            return Err(Error::domain("polarization index must be 1 or 2"));
        }
        if (kappa.norm() - T::one()).abs() > tol {
            return Err(Error::domain("kappa must be a unit vector"));
        }
        if (eps_vec.norm() - T::one()).abs() > tol {
            return Err(Error::domain("eps_vec must be a unit vector"));
        }
        if kappa.dot(eps_vec).abs() > tol {
            return Err(Error::domain("polarization must be transverse to kappa"));
        }
        Ok(Self {
            kappa,
            omega,
            lambda,
            eps_vec,
        })
    }
}

/// Orthonormal transverse pair for a propagation direction.
///
/// The first vector is the normalized z x kappa, or x-hat when kappa is
/// within [`POLE_FALLBACK_TOL`] of the poles; the second is kappa x eps1, so
/// (kappa, eps1, eps2) is right-handed.
pub fn polarization_basis<T: Scalar>(kappa: Vec3<T>) -> Result<(Vec3<T>, Vec3<T>)> {
    if (kappa.norm() - T::one()).abs() > T::geometry_tol() {
        return Err(Error::domain("kappa must be a unit vector"));
    }
    let zk = Vec3::unit_z().cross(kappa);
    let eps1 = if zk.norm() <= T::of(POLE_FALLBACK_TOL) {
        Vec3::unit_x()
    } else {
        zk.normalized().expect("norm checked above")
    };
    let eps2 = kappa.cross(eps1);
    Ok((eps1, eps2))
}

/// Unit directions and solid-angle weights summing to 4 pi.
#[derive(Clone, Debug)]
pub struct DirectionGrid<T> {
    nodes: Vec<(Vec3<T>, T)>,
}

impl<T: Scalar> DirectionGrid<T> {
    /// Wraps explicit nodes as given, with no symmetry or normalization
    /// guarantees; meant for hand-built baths. Use [`direction_grid`] for a
    /// proper product rule.
    pub fn from_nodes(nodes: Vec<(Vec3<T>, T)>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[(Vec3<T>, T)] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> T {
        self.nodes.iter().map(|&(_, w)| w).sum()
    }
}

/// Product rule over the sphere: Gauss–Legendre in cos(theta), uniform in
/// azimuth, weights summing to 4 pi.
///
/// For even `n_azimuth` every direction's antipode is present with bitwise
/// negated components, so odd integrands cancel exactly.
pub fn direction_grid<T: Scalar>(n_polar: usize, n_azimuth: usize) -> Result<DirectionGrid<T>> {
    if n_polar < 2 {
        return Err(Error::domain("need at least 2 polar nodes"));
    }
    if n_azimuth < 4 {
        return Err(Error::domain("need at least 4 azimuthal nodes"));
    }
    let polar = gauss_legendre::<T>(n_polar)?;
    let two_pi = T::of(2.0) * T::PI();
    let m = n_azimuth;
    let mf = T::from_usize(m).expect("azimuth count fits in scalar");

    // Trig table with the second half negated bitwise when m is even, so the
    // grid is exactly antipodally symmetric.
    let mut trig = Vec::with_capacity(m);
    let direct = if m.is_multiple_of(2) { m / 2 } else { m };
    for j in 0..direct {
        let phi = two_pi * T::from_usize(j).unwrap() / mf;
        trig.push((phi.cos(), phi.sin()));
    }
    if m.is_multiple_of(2) {
        for j in 0..m / 2 {
            let (c, s) = trig[j];
            trig.push((-c, -s));
        }
    }

    let w_phi = two_pi / mf;
    let mut nodes = Vec::with_capacity(n_polar * m);
    for &(ct, w_ct) in &polar {
        let st = (T::one() - ct * ct).sqrt();
        for &(c, s) in &trig {
            nodes.push((Vec3::new(st * c, st * s, ct), w_ct * w_phi));
        }
    }
    Ok(DirectionGrid { nodes })
}

/// Strictly positive, strictly increasing frequency nodes with weights
/// summing to the window length.
#[derive(Clone, Debug)]
pub struct FrequencyGrid<T> {
    nodes: Vec<(T, T)>,
    center: T,
    halfwidth: T,
}

impl<T: Scalar> FrequencyGrid<T> {
    /// Wraps explicit nodes as given; meant for hand-built baths. Use
    /// [`frequency_grid`] for a Gauss–Legendre rule over a window.
    pub fn from_nodes(nodes: Vec<(T, T)>, center: T, halfwidth: T) -> Self {
        Self {
            nodes,
            center,
            halfwidth,
        }
    }

    pub fn nodes(&self) -> &[(T, T)] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn center(&self) -> T {
        self.center
    }

    pub fn halfwidth(&self) -> T {
        self.halfwidth
    }

    /// Window endpoints (low, high).
    pub fn window(&self) -> (T, T) {
        (self.center - self.halfwidth, self.center + self.halfwidth)
    }

    /// Smallest gap between adjacent nodes.
    pub fn min_spacing(&self) -> T {
        self.nodes
            .windows(2)
            .map(|p| p[1].0 - p[0].0)
            .fold(T::infinity(), T::min)
    }

    /// Largest gap between adjacent nodes. Beyond roughly 2 pi over this the
    /// discretized bath stops mimicking an irreversible continuum, so it
    /// bounds the usable evolution time.
    pub fn max_spacing(&self) -> T {
        self.nodes
            .windows(2)
            .map(|p| p[1].0 - p[0].0)
            .fold(T::zero(), T::max)
    }
}

/// Gauss–Legendre window [center - halfwidth, center + halfwidth].
pub fn frequency_grid<T: Scalar>(center: T, halfwidth: T, n: usize) -> Result<FrequencyGrid<T>> {
    if n < 2 {
        return Err(Error::domain("need at least 2 frequency nodes"));
    }
    if !(halfwidth > T::zero()) {
        return Err(Error::domain("frequency halfwidth must be positive"));
    }
    if !(center - halfwidth > T::zero()) {
        return Err(Error::domain(
            "frequency window must stay strictly positive",
        ));
    }
    let nodes = gauss_legendre(n)?
        .into_iter()
        .map(|(x, w)| (center + halfwidth * x, halfwidth * w))
        .collect();
    Ok(FrequencyGrid {
        nodes,
        center,
        halfwidth,
    })
}

/// A bath mode together with its solid-angle and frequency quadrature
/// weights; the coupling module turns the pair into an effective squared
/// coupling.
#[derive(Clone, Copy, Debug)]
pub struct GridMode<T> {
    pub mode: Mode<T>,
    pub w_dir: T,
    pub w_om: T,
}

/// The full enumerated bath: every (direction, frequency, polarization)
/// triple.
#[derive(Clone, Debug)]
pub struct ModeGrid<T> {
    directions: DirectionGrid<T>,
    frequencies: FrequencyGrid<T>,
    modes: Vec<GridMode<T>>,
}

impl<T: Scalar> ModeGrid<T> {
    pub fn directions(&self) -> &DirectionGrid<T> {
        &self.directions
    }

    pub fn frequencies(&self) -> &FrequencyGrid<T> {
        &self.frequencies
    }

    pub fn modes(&self) -> &[GridMode<T>] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Assembles a grid from parts already validated elsewhere. Intended for
    /// tests that need hand-built baths (single resonant mode, custom
    /// weights); normal construction goes through [`build_mode_grid`].
    pub fn from_parts(
        directions: DirectionGrid<T>,
        frequencies: FrequencyGrid<T>,
        modes: Vec<GridMode<T>>,
    ) -> Self {
        Self {
            directions,
            frequencies,
            modes,
        }
    }
}

/// Enumerates the two polarizations of every (direction, frequency) pair.
pub fn build_mode_grid<T: Scalar>(
    directions: DirectionGrid<T>,
    frequencies: FrequencyGrid<T>,
) -> Result<ModeGrid<T>> {
    if directions.is_empty() || frequencies.is_empty() {
        return Err(Error::domain("mode grid needs non-empty factors"));
    }
    let mut modes = Vec::with_capacity(2 * directions.len() * frequencies.len());
    for &(kappa, w_dir) in directions.nodes() {
        let (eps1, eps2) = polarization_basis(kappa)?;
        for &(omega, w_om) in frequencies.nodes() {
            for (lambda, eps_vec) in [(1u8, eps1), (2u8, eps2)] {
                modes.push(GridMode {
                    mode: Mode::new(kappa, omega, lambda, eps_vec)?,
                    w_dir,
                    w_om,
                });
            }
        }
    }
    Ok(ModeGrid {
        directions,
        frequencies,
        modes,
    })
}
