//! Time-domain engine: integrates the coupled excited-state and one-photon
//! amplitudes on a discretized bath, samples population, momentum, and the
//! kinetic-canonical momentum difference, and extracts rates by fitting.

use num_complex::Complex;
use rayon::prelude::*;

use crate::bath::ModeGrid;
use crate::coupling::{b_vector, coupling_g, measure_prefactor, mode_coupling_weight};
use crate::error::{Error, Result};
use crate::golden_rule::{detuning, omega_plus};
use crate::quadrature::CompensatedSum;
use crate::scales::AtomParams;
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// Modes per work unit in parallel reductions. Fixed so partial sums, and
/// with them every reported digit, do not depend on the thread count.
const CHUNK: usize = 8192;

/// Steps between rebuilding the running phase factors from the absolute
/// time, bounding multiplicative rounding drift.
const RESYNC_STEPS: usize = 256;

/// Hard limit on integrator norm drift before the run is declared failed.
const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Fit window in units of 1/rate: early enough to avoid the late-time
/// discretization artifacts, late enough to skip the initial transient.
const FIT_WINDOW: (f64, f64) = (0.2, 1.0);

/// Amplitudes at one instant: the excited state and one entry per mode of
/// the grid the state was evolved on. The oscillating phases are explicit
/// in the equations of motion, not absorbed into these coefficients.
#[derive(Clone, Debug)]
pub struct AmplitudeState<T> {
    pub t: T,
    pub c_e: Complex<T>,
    pub c_modes: Vec<Complex<T>>,
}

impl<T: Scalar> AmplitudeState<T> {
    /// Total probability |c_e|^2 + sum |c_modes|^2; conserved by the exact
    /// flow, so its drift measures integrator error.
    pub fn norm_sq(&self) -> T {
        let mut acc = CompensatedSum::new();
        acc.add(self.c_e.norm_sqr());
        for c in &self.c_modes {
            acc.add(c.norm_sqr());
        }
        acc.value()
    }
}

/// One sampled instant of an evolution run.
#[derive(Clone, Copy, Debug)]
pub struct TrajectorySample<T> {
    pub t: T,
    /// Excited-state population |c_e|^2.
    pub population: T,
    /// Canonical momentum expectation.
    pub momentum: Vec3<T>,
    /// Expectation of the field-induced difference between kinetic and
    /// canonical momentum (the B x d observable).
    pub roentgen_momentum: Vec3<T>,
    /// Total probability; deviation from 1 is integrator error.
    pub norm: T,
}

/// Sampled observables of one evolution run.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub samples: Vec<TrajectorySample<T>>,
    pub final_state: AmplitudeState<T>,
    /// 2 pi over the largest frequency gap: past this time the discrete
    /// bath no longer mimics an irreversible continuum.
    pub horizon: T,
    pub warnings: Vec<String>,
}

/// Step size advancing the fastest explicit phase by about 0.06 rad per
/// step, well inside the integrator's accuracy range.
pub fn default_step<T: Scalar>(grid: &ModeGrid<T>) -> T {
    T::of(0.06) / grid.frequencies().halfwidth()
}

/// Sampling stride that keeps a run at roughly 512 stored samples.
pub fn default_sample_stride(n_steps: usize) -> usize {
    n_steps.div_ceil(512).max(1)
}

/// Per-mode constants of one run.
struct ModeCoef<T> {
    /// Effective Rabi coupling times the dimensionless coupling, the single
    /// scalar entering the equations of motion.
    og: T,
    /// Energy mismatch of the mode.
    det: T,
    /// Phase advance over half a step, e^{i det h / 2}.
    rot_half: Complex<T>,
    omega: T,
    kappa: Vec3<T>,
    /// Effective Rabi coupling times (kappa x eps) x e_d, the weight of the
    /// mode in the kinetic-canonical momentum difference.
    oeff_b: Vec3<T>,
}

fn mode_coefficients<T: Scalar>(grid: &ModeGrid<T>, atom: &AtomParams<T>, h: T) -> Vec<ModeCoef<T>> {
    grid.modes()
        .iter()
        .map(|gm| {
            let oeff = mode_coupling_weight(gm, atom).sqrt();
            let det = detuning(gm.mode, atom.p0, atom);
            ModeCoef {
                og: oeff * coupling_g(gm.mode, atom.p0, atom),
                det,
                rot_half: Complex::cis(det * h / T::of(2.0)),
                omega: gm.mode.omega,
                kappa: gm.mode.kappa,
                oeff_b: b_vector(gm.mode, atom.e_d) * oeff,
            }
        })
        .collect()
}

fn observe<T: Scalar>(
    t: T,
    c_e: Complex<T>,
    c_modes: &[Complex<T>],
    phases: &[Complex<T>],
    coefs: &[ModeCoef<T>],
    atom: &AtomParams<T>,
) -> TrajectorySample<T> {
    let k = atom.constants();
    let population = c_e.norm_sqr();
    let mut mode_norm = CompensatedSum::new();
    let mut field = [
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    ];
    let mut bxd = [
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    ];
    for ((c, ph), cf) in c_modes.iter().zip(phases).zip(coefs) {
        let w = c.norm_sqr();
        mode_norm.add(w);
        let ow = cf.omega * w;
        field[0].add(ow * cf.kappa.x);
        field[1].add(ow * cf.kappa.y);
        field[2].add(ow * cf.kappa.z);
        let im = (c_e * c.conj() * ph.conj()).im;
        bxd[0].add(cf.oeff_b.x * im);
        bxd[1].add(cf.oeff_b.y * im);
        bxd[2].add(cf.oeff_b.z * im);
    }
    let norm = population + mode_norm.value();
    let momentum = atom.p0 * norm
        - Vec3::new(field[0].value(), field[1].value(), field[2].value()) * (k.hbar / k.c);
    let roentgen_momentum = Vec3::new(bxd[0].value(), bxd[1].value(), bxd[2].value())
        * (-T::of(2.0) * k.hbar / k.c);
    TrajectorySample {
        t,
        population,
        momentum,
        roentgen_momentum,
        norm,
    }
}

fn check_window<T: Scalar>(atom: &AtomParams<T>, grid: &ModeGrid<T>) -> Result<()> {
    let (lo, hi) = grid.frequencies().window();
    for &(kappa, _) in grid.directions().nodes() {
        let wp = omega_plus(kappa, atom.p0, atom)?.omega_plus;
        if wp <= lo || wp >= hi {
            return Err(Error::domain(format!(
                "resonant frequency {wp} falls outside the bath window [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}

/// Integrates the amplitude equations
///
///   dc_e/dt      =  sum_k Omega_k g_k e^{+i det_k t} c_k
///   dc_k/dt      = -Omega_k g_k e^{-i det_k t} c_e
///
/// with the classic fixed-step fourth-order Runge-Kutta scheme, starting
/// from c_e = 1, and samples observables every `sample_every` steps.
///
/// The per-mode stage derivatives are scalar multiples of precomputed unit
/// phases, so each step runs in two passes over the mode arrays: one gather
/// producing the three stage sums the excited amplitude needs, one scatter
/// applying the combined per-mode update.
pub fn evolve<T: Scalar>(
    atom: &AtomParams<T>,
    grid: &ModeGrid<T>,
    t_end: T,
    dt_max: T,
    sample_every: usize,
) -> Result<Trajectory<T>> {
    if grid.is_empty() {
        return Err(Error::domain("mode grid is empty"));
    }
    if !(t_end > T::zero()) || !t_end.is_finite() {
        return Err(Error::domain("t_end must be positive and finite"));
    }
    if !(dt_max > T::zero()) || !dt_max.is_finite() {
        return Err(Error::domain("dt_max must be positive and finite"));
    }
    if sample_every == 0 {
        return Err(Error::domain("sample_every must be at least 1"));
    }
    check_window(atom, grid)?;

    let n_steps = (t_end / dt_max)
        .ceil()
        .to_usize()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::domain("t_end / dt_max does not yield a usable step count"))?;
    let h = t_end / T::from_usize(n_steps).expect("step count fits in scalar");

    let max_gap = grid.frequencies().max_spacing();
    let horizon = if max_gap > T::zero() {
        T::of(2.0) * T::PI() / max_gap
    } else {
        T::infinity()
    };
    let mut warnings = Vec::new();
    if t_end > horizon {
        warnings.push(format!(
            "t_end {t_end} exceeds the bath horizon {horizon}; late-time observables are unreliable"
        ));
    }

    let coefs = mode_coefficients(grid, atom, h);
    let n = coefs.len();
    let mut c_e = Complex::new(T::one(), T::zero());
    let mut c_modes = vec![Complex::new(T::zero(), T::zero()); n];
    let mut phases = vec![Complex::new(T::one(), T::zero()); n];

    // Reduction constants reused by every step: total squared coupling and
    // its half-step-rotated counterpart.
    let (w_total, r_total) = {
        let mut w = CompensatedSum::new();
        let mut r_re = CompensatedSum::new();
        let mut r_im = CompensatedSum::new();
        for cf in &coefs {
            let sq = cf.og * cf.og;
            w.add(sq);
            r_re.add(sq * cf.rot_half.re);
            r_im.add(sq * cf.rot_half.im);
        }
        (w.value(), Complex::new(r_re.value(), r_im.value()))
    };

    let half = T::of(0.5);
    let sixth = T::of(6.0).recip();
    let mut samples = Vec::with_capacity(n_steps / sample_every + 2);
    samples.push(observe(T::zero(), c_e, &c_modes, &phases, &coefs, atom));

    for step in 0..n_steps {
        // Gather: stage sums over modes at the start, middle, and end phase
        // of the step.
        let partials: Vec<(Complex<T>, Complex<T>, Complex<T>)> = coefs
            .par_chunks(CHUNK)
            .zip(phases.par_chunks(CHUNK))
            .zip(c_modes.par_chunks(CHUNK))
            .map(|((cf_chunk, ph_chunk), cm_chunk)| {
                let mut s1 = Complex::new(T::zero(), T::zero());
                let mut s2 = s1;
                let mut s3 = s1;
                for ((cf, ph), cm) in cf_chunk.iter().zip(ph_chunk).zip(cm_chunk) {
                    let p2 = *ph * cf.rot_half;
                    let p3 = p2 * cf.rot_half;
                    s1 += (*ph * cf.og) * *cm;
                    s2 += (p2 * cf.og) * *cm;
                    s3 += (p3 * cf.og) * *cm;
                }
                (s1, s2, s3)
            })
            .collect();
        let mut s1 = Complex::new(T::zero(), T::zero());
        let mut s2 = s1;
        let mut s3 = s1;
        for (a, b, c) in partials {
            s1 += a;
            s2 += b;
            s3 += c;
        }

        let k1e = s1;
        let k2e = s2 - r_total * c_e * (h * half);
        let k3e = s2 - (c_e + k1e * (h * half)) * (w_total * h * half);
        let k4e = s3 - r_total * (c_e + k2e * (h * half)) * h;

        // Scatter: per-mode combined update. The stage derivatives of each
        // mode amplitude are its conjugated stage phases times scalar stage
        // values of the excited amplitude.
        let a1 = c_e;
        let a2 = c_e * T::of(4.0) + (k1e + k2e) * h;
        let a3 = c_e + k3e * h;
        let h6 = h * sixth;
        coefs
            .par_chunks(CHUNK)
            .zip(phases.par_chunks_mut(CHUNK))
            .zip(c_modes.par_chunks_mut(CHUNK))
            .for_each(|((cf_chunk, ph_chunk), cm_chunk)| {
                for ((cf, ph), cm) in cf_chunk.iter().zip(ph_chunk).zip(cm_chunk) {
                    let c1 = ph.conj();
                    let q = cf.rot_half.conj();
                    let c2 = c1 * q;
                    let c3 = c2 * q;
                    *cm -= (c1 * a1 + c2 * a2 + c3 * a3) * (cf.og * h6);
                    *ph = (*ph * cf.rot_half) * cf.rot_half;
                }
            });
        c_e += (k1e + (k2e + k3e) * T::of(2.0) + k4e) * h6;

        let done = step + 1;
        if done % RESYNC_STEPS == 0 && done != n_steps {
            let t_now = h * T::from_usize(done).unwrap();
            coefs
                .par_chunks(CHUNK)
                .zip(phases.par_chunks_mut(CHUNK))
                .for_each(|(cf_chunk, ph_chunk)| {
                    for (cf, ph) in cf_chunk.iter().zip(ph_chunk) {
                        *ph = Complex::cis(cf.det * t_now);
                    }
                });
        }

        if done % sample_every == 0 || done == n_steps {
            let t_now = h * T::from_usize(done).unwrap();
            let sample = observe(t_now, c_e, &c_modes, &phases, &coefs, atom);
            if (sample.norm - T::one()).abs() > T::of(NORM_DRIFT_LIMIT) {
                return Err(Error::numerical(format!(
                    "norm drifted to {} at t = {t_now}; reduce the step size",
                    sample.norm
                )));
            }
            samples.push(sample);
        }
    }

    Ok(Trajectory {
        samples,
        final_state: AmplitudeState {
            t: t_end,
            c_e,
            c_modes,
        },
        horizon,
        warnings,
    })
}

/// Golden-rule rate evaluated with this grid's own direction set, so the
/// dynamics and the rate it is compared against share discretization error:
/// 2 pi sum over directions and polarizations of the measure density times
/// g^2 at the resonant frequency, divided by the detuning Jacobian.
pub fn grid_golden_rule<T: Scalar>(atom: &AtomParams<T>, grid: &ModeGrid<T>) -> Result<T> {
    let (lo, hi) = grid.frequencies().window();
    let pref = measure_prefactor(atom);
    let mut acc = CompensatedSum::new();
    for &(kappa, w_dir) in grid.directions().nodes() {
        let root = omega_plus(kappa, atom.p0, atom)?;
        let wp = root.omega_plus;
        if wp <= lo || wp >= hi {
            return Err(Error::domain(format!(
                "resonant frequency {wp} falls outside the bath window [{lo}, {hi}]"
            )));
        }
        let (e1, e2) = crate::bath::polarization_basis(kappa)?;
        let mut g_sq = T::zero();
        for (lambda, eps_vec) in [(1u8, e1), (2u8, e2)] {
            let mode = crate::bath::Mode::new(kappa, wp, lambda, eps_vec)?;
            let g = coupling_g(mode, atom.p0, atom);
            g_sq += g * g;
        }
        acc.add(w_dir * wp * wp * wp / root.jacobian * g_sq);
    }
    Ok(T::of(2.0) * T::PI() * pref * acc.value())
}

/// Canonical momentum expectation of a state on its grid:
/// p0 (|c_e|^2 + sum |c_k|^2) - (hbar / c) sum omega_k kappa_k |c_k|^2.
pub fn expect_p<T: Scalar>(
    state: &AmplitudeState<T>,
    grid: &ModeGrid<T>,
    atom: &AtomParams<T>,
) -> Result<Vec3<T>> {
    if state.c_modes.len() != grid.len() {
        return Err(Error::domain("state and grid have different mode counts"));
    }
    let k = atom.constants();
    let mut norm = CompensatedSum::new();
    norm.add(state.c_e.norm_sqr());
    let mut field = [
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    ];
    for (c, gm) in state.c_modes.iter().zip(grid.modes()) {
        let w = c.norm_sqr();
        norm.add(w);
        let ow = gm.mode.omega * w;
        field[0].add(ow * gm.mode.kappa.x);
        field[1].add(ow * gm.mode.kappa.y);
        field[2].add(ow * gm.mode.kappa.z);
    }
    Ok(atom.p0 * norm.value()
        - Vec3::new(field[0].value(), field[1].value(), field[2].value()) * (k.hbar / k.c))
}

/// Expectation of the kinetic-canonical momentum difference (B x d):
/// -(2 hbar / c) Im sum_k Omega_k b_k c_e c_k^* e^{-i det_k t}.
pub fn expect_bxd<T: Scalar>(
    state: &AmplitudeState<T>,
    grid: &ModeGrid<T>,
    atom: &AtomParams<T>,
) -> Result<Vec3<T>> {
    if state.c_modes.len() != grid.len() {
        return Err(Error::domain("state and grid have different mode counts"));
    }
    let k = atom.constants();
    let mut acc = [
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    ];
    for (c, gm) in state.c_modes.iter().zip(grid.modes()) {
        let oeff = mode_coupling_weight(gm, atom).sqrt();
        let det = detuning(gm.mode, atom.p0, atom);
        let im = (state.c_e * c.conj() * Complex::cis(-det * state.t)).im;
        let b = b_vector(gm.mode, atom.e_d) * oeff;
        acc[0].add(b.x * im);
        acc[1].add(b.y * im);
        acc[2].add(b.z * im);
    }
    Ok(Vec3::new(acc[0].value(), acc[1].value(), acc[2].value())
        * (-T::of(2.0) * k.hbar / k.c))
}

fn fit_samples<T: Scalar>(traj: &Trajectory<T>, rate_ref: T) -> Result<Vec<&TrajectorySample<T>>> {
    if !(rate_ref > T::zero()) {
        return Err(Error::domain("reference rate must be positive"));
    }
    let lo = T::of(FIT_WINDOW.0) / rate_ref;
    let hi = T::of(FIT_WINDOW.1) / rate_ref;
    let picked: Vec<_> = traj
        .samples
        .iter()
        .filter(|s| s.t >= lo && s.t <= hi)
        .collect();
    if picked.len() < 3 {
        return Err(Error::domain(
            "fit window holds fewer than 3 samples; extend t_end or lower the sample stride",
        ));
    }
    Ok(picked)
}

fn least_squares_slope<T: Scalar>(xs: &[T], ys: &[T]) -> T {
    let n = T::from_usize(xs.len()).expect("sample count fits in scalar");
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut num = T::zero();
    let mut den = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Decay rate from the sampled population: least-squares slope of
/// ln |c_e|^2 over the window [0.2, 1.0] / rate_ref, negated.
///
/// Errors when the window holds fewer than 3 samples, the population is not
/// strictly positive, or the population rises inside the window (the bath
/// horizon was reached).
pub fn fit_decay_rate<T: Scalar>(traj: &Trajectory<T>, rate_ref: T) -> Result<T> {
    let picked = fit_samples(traj, rate_ref)?;
    if picked.iter().any(|s| !(s.population > T::zero())) {
        return Err(Error::domain(
            "population must stay strictly positive over the fit window",
        ));
    }
    let monotone_slack = T::one() + T::of(1e-12);
    for pair in picked.windows(2) {
        if pair[1].population > pair[0].population * monotone_slack {
            return Err(Error::numerical(
                "population is not monotonically decreasing over the fit window",
            ));
        }
    }
    let ts: Vec<T> = picked.iter().map(|s| s.t).collect();
    let lns: Vec<T> = picked.iter().map(|s| s.population.ln()).collect();
    Ok(-least_squares_slope(&ts, &lns))
}

/// Initial momentum drift rate from the sampled momentum, component-wise.
///
/// The momentum follows p(t) = p(0) + D u(t) with the decay clock
/// u(t) = (1 - e^{-rate t}) / rate, so regressing on u instead of t removes
/// the bias a straight-line fit picks up from the decaying source. The
/// returned D is the drift rate at t = 0.
pub fn fit_momentum_drift<T: Scalar>(traj: &Trajectory<T>, rate_ref: T) -> Result<Vec3<T>> {
    let picked = fit_samples(traj, rate_ref)?;
    let clock: Vec<T> = picked
        .iter()
        .map(|s| -(-rate_ref * s.t).exp_m1() / rate_ref)
        .collect();
    let component = |pick: fn(&Vec3<T>) -> T| {
        let ys: Vec<T> = picked.iter().map(|s| pick(&s.momentum)).collect();
        least_squares_slope(&clock, &ys)
    };
    Ok(Vec3::new(
        component(|p| p.x),
        component(|p| p.y),
        component(|p| p.z),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{
        build_mode_grid, direction_grid, frequency_grid, polarization_basis, DirectionGrid,
        FrequencyGrid, GridMode, Mode,
    };
    use crate::golden_rule::{decay_rate_closed, decay_rate_quadrature};
    use crate::scales::UnitSystem;

    fn atom(d: f64, e_d: Vec3<f64>, mass: f64, p0: Vec3<f64>) -> AtomParams<f64> {
        AtomParams::new(1.0, d, e_d, mass, p0, UnitSystem::Natural).unwrap()
    }

    /// Small but physically sensible bath around the transition frequency.
    fn small_bath(n_polar: usize, n_azimuth: usize, n_freq: usize, d: f64) -> ModeGrid<f64> {
        let gamma0 = d * d / (3.0 * std::f64::consts::PI);
        let hw = 25.0 * gamma0;
        build_mode_grid(
            direction_grid(n_polar, n_azimuth).unwrap(),
            frequency_grid(1.0, hw, n_freq).unwrap(),
        )
        .unwrap()
    }

    fn single_mode_grid(kappa: Vec3<f64>, omega: f64) -> ModeGrid<f64> {
        let (e1, _) = polarization_basis(kappa).unwrap();
        let mode = Mode::new(kappa, omega, 1, e1).unwrap();
        ModeGrid::from_parts(
            DirectionGrid::from_nodes(vec![(kappa, 1.0)]),
            FrequencyGrid::from_nodes(vec![(omega, 1.0)], omega, 0.5),
            vec![GridMode {
                mode,
                w_dir: 1.0,
                w_om: 1.0,
            }],
        )
    }

    #[test]
    fn decoupled_emitter_stays_excited() {
        let a = atom(0.0, Vec3::unit_z(), 1000.0, Vec3::zero());
        let grid = small_bath(2, 4, 4, 0.3);
        let traj = evolve(&a, &grid, 5.0, 0.05, 10).unwrap();
        for s in &traj.samples {
            assert_eq!(s.population, 1.0);
            assert_eq!(s.norm, 1.0);
        }
        assert_eq!(traj.final_state.c_e, Complex::new(1.0, 0.0));
    }

    #[test]
    fn single_resonant_mode_rabi_oscillates() {
        let a = atom(1.0, Vec3::unit_x(), 1e290, Vec3::zero());
        let grid = single_mode_grid(Vec3::unit_z(), 1.0);
        let rabi = mode_coupling_weight(&grid.modes()[0], &a).sqrt()
            * coupling_g(grid.modes()[0].mode, a.p0, &a);
        let traj = evolve(&a, &grid, 40.0, 0.02, 50).unwrap();
        for s in &traj.samples {
            let expected = (rabi * s.t).cos().powi(2);
            assert!(
                (s.population - expected).abs() < 1e-8,
                "t={} pop={} expected={}",
                s.t,
                s.population,
                expected
            );
            assert!((s.norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rabi_trajectory_rejects_rate_fit() {
        let a = atom(1.0, Vec3::unit_x(), 1e290, Vec3::zero());
        let grid = single_mode_grid(Vec3::unit_z(), 1.0);
        // Window [20, 100] spans the population minimum near t = 35.
        let traj = evolve(&a, &grid, 150.0, 0.05, 20).unwrap();
        assert!(fit_decay_rate(&traj, 0.01).is_err());
    }

    #[test]
    fn factored_step_matches_direct_runge_kutta() {
        let a = atom(
            1.0,
            Vec3::new(1.0, 1.0, 1.0).normalized().unwrap(),
            1000.0,
            Vec3::new(0.3, -0.2, 0.5),
        );
        let kappas = [
            Vec3::unit_z(),
            Vec3::new(0.6, 0.0, -0.8),
            Vec3::new(0.0, -1.0, 0.0),
        ];
        let omegas = [0.9, 1.0, 1.1];
        let mut modes = Vec::new();
        let mut dirs = Vec::new();
        for (&kappa, &omega) in kappas.iter().zip(&omegas) {
            let (e1, _) = polarization_basis(kappa).unwrap();
            modes.push(GridMode {
                mode: Mode::new(kappa, omega, 1, e1).unwrap(),
                w_dir: 2.0,
                w_om: 0.5,
            });
            dirs.push((kappa, 2.0));
        }
        let grid = ModeGrid::from_parts(
            DirectionGrid::from_nodes(dirs),
            FrequencyGrid::from_nodes(
                omegas.iter().map(|&om| (om, 0.5)).collect(),
                1.0,
                0.3,
            ),
            modes,
        );

        let h = 0.3;
        let n_steps = 2;
        let traj = evolve(&a, &grid, h * n_steps as f64, h, 1).unwrap();

        // Direct textbook Runge-Kutta with explicit stage vectors.
        let og: Vec<f64> = grid
            .modes()
            .iter()
            .map(|gm| mode_coupling_weight(gm, &a).sqrt() * coupling_g(gm.mode, a.p0, &a))
            .collect();
        let det: Vec<f64> = grid
            .modes()
            .iter()
            .map(|gm| detuning(gm.mode, a.p0, &a))
            .collect();
        let rhs = |t: f64, ce: Complex<f64>, cm: &[Complex<f64>]| {
            let mut dce = Complex::new(0.0, 0.0);
            let mut dcm = vec![Complex::new(0.0, 0.0); cm.len()];
            for i in 0..cm.len() {
                let ph = Complex::cis(det[i] * t);
                dce += cm[i] * ph * og[i];
                dcm[i] = -ce * ph.conj() * og[i];
            }
            (dce, dcm)
        };
        let mut ce = Complex::new(1.0, 0.0);
        let mut cm = vec![Complex::new(0.0, 0.0); 3];
        for step in 0..n_steps {
            let t0 = step as f64 * h;
            let (k1e, k1m) = rhs(t0, ce, &cm);
            let y2: Vec<_> = cm.iter().zip(&k1m).map(|(c, k)| c + k * (h / 2.0)).collect();
            let (k2e, k2m) = rhs(t0 + h / 2.0, ce + k1e * (h / 2.0), &y2);
            let y3: Vec<_> = cm.iter().zip(&k2m).map(|(c, k)| c + k * (h / 2.0)).collect();
            let (k3e, k3m) = rhs(t0 + h / 2.0, ce + k2e * (h / 2.0), &y3);
            let y4: Vec<_> = cm.iter().zip(&k3m).map(|(c, k)| c + k * h).collect();
            let (k4e, k4m) = rhs(t0 + h, ce + k3e * h, &y4);
            ce += (k1e + (k2e + k3e) * 2.0 + k4e) * (h / 6.0);
            for i in 0..3 {
                cm[i] += (k1m[i] + (k2m[i] + k3m[i]) * 2.0 + k4m[i]) * (h / 6.0);
            }
        }
        assert!((traj.final_state.c_e - ce).norm() < 1e-14);
        for (got, want) in traj.final_state.c_modes.iter().zip(&cm) {
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn bath_run_tracks_exponential_decay_and_drift() {
        let a = atom(0.3, Vec3::unit_z(), 1000.0, Vec3::new(0.0, 0.0, 1.0));
        let grid = small_bath(4, 8, 201, 0.3);
        let gamma = grid_golden_rule(&a, &grid).unwrap();
        let t_end = 2.0 / gamma;
        let dt = default_step(&grid);
        let traj = evolve(&a, &grid, t_end, dt, 4).unwrap();
        assert!(traj.warnings.is_empty());

        let mut worst = 0.0f64;
        for s in &traj.samples {
            assert!((s.norm - 1.0).abs() < 1e-8);
            assert!(s.population <= 1.0 + 1e-10 && s.population >= 0.0);
            let expected = (-gamma * s.t).exp();
            worst = worst.max((s.population - expected).abs() / expected);
        }
        assert!(worst < 0.06, "population deviation {worst}");

        let fitted = fit_decay_rate(&traj, gamma).unwrap();
        assert!(((fitted - gamma) / gamma).abs() < 0.02, "fitted {fitted} vs {gamma}");

        // drift of the momentum component along the motion
        let drift = fit_momentum_drift(&traj, gamma).unwrap();
        let eps = a.small_params().epsilon;
        let target = -gamma * eps * a.p0.z;
        assert!(
            ((drift.z - target) / target).abs() < 0.08,
            "drift {} vs {target}",
            drift.z
        );

        // the kinetic-canonical difference stays flat next to the drift
        let window: Vec<_> = traj
            .samples
            .iter()
            .filter(|s| s.t >= 0.2 / gamma && s.t <= 1.0 / gamma)
            .collect();
        let mut bxd_rate = 0.0f64;
        let mut p_rate = 0.0f64;
        for pair in window.windows(2) {
            let dt_pair = pair[1].t - pair[0].t;
            bxd_rate += (pair[1].roentgen_momentum - pair[0].roentgen_momentum).norm() / dt_pair;
            p_rate += (pair[1].momentum - pair[0].momentum).norm() / dt_pair;
        }
        assert!(bxd_rate < 0.1 * p_rate, "bxd {bxd_rate} vs p {p_rate}");
    }

    #[test]
    fn rest_frame_momentum_stays_zero() {
        let a = atom(
            0.3,
            Vec3::new(1.0, 1.0, 1.0).normalized().unwrap(),
            1000.0,
            Vec3::zero(),
        );
        let grid = small_bath(4, 8, 51, 0.3);
        let gamma = grid_golden_rule(&a, &grid).unwrap();
        let traj = evolve(&a, &grid, 0.5 / gamma, default_step(&grid), 8).unwrap();
        for s in &traj.samples {
            assert!(s.momentum.norm() < 1e-10, "momentum {:?}", s.momentum);
        }
    }

    #[test]
    fn grid_rate_agrees_with_quadrature_and_closed_form() {
        // essentially no recoil: matches the closed form tightly
        let still = atom(0.3, Vec3::unit_z(), 1e290, Vec3::zero());
        let grid = small_bath(8, 16, 101, 0.3);
        let g = grid_golden_rule(&still, &grid).unwrap();
        let closed = decay_rate_closed(&still);
        assert!(((g - closed) / closed).abs() < 1e-12);

        // small recoil and velocity: same-direction-grid quadrature agrees
        // to the square of the expansion parameters
        let moving = atom(0.3, Vec3::unit_z(), 1e4, Vec3::new(0.0, 0.0, 1.0));
        let g = grid_golden_rule(&moving, &grid).unwrap();
        let quad = decay_rate_quadrature(&moving, grid.directions()).unwrap();
        assert!(((g - quad) / quad).abs() < 1e-6);
    }

    #[test]
    fn momentum_expectation_limits() {
        let a = atom(1.0, Vec3::unit_x(), 1000.0, Vec3::new(0.2, 0.0, 1.0));
        let grid = single_mode_grid(Vec3::unit_z(), 1.0);
        let fresh = AmplitudeState {
            t: 0.0,
            c_e: Complex::new(1.0, 0.0),
            c_modes: vec![Complex::new(0.0, 0.0)],
        };
        assert_eq!(expect_p(&fresh, &grid, &a).unwrap(), a.p0);
        assert_eq!(expect_bxd(&fresh, &grid, &a).unwrap(), Vec3::zero());

        // fully decayed into the single mode: recoil of one photon
        let decayed = AmplitudeState {
            t: 100.0,
            c_e: Complex::new(0.0, 0.0),
            c_modes: vec![Complex::new(0.0, 1.0)],
        };
        let p = expect_p(&decayed, &grid, &a).unwrap();
        assert!((p - (a.p0 - Vec3::new(0.0, 0.0, 1.0))).norm() < 1e-15);
        assert_eq!(expect_bxd(&decayed, &grid, &a).unwrap(), Vec3::zero());

        let mismatched = AmplitudeState {
            t: 0.0,
            c_e: Complex::new(1.0, 0.0),
            c_modes: vec![],
        };
        assert!(expect_p(&mismatched, &grid, &a).is_err());
    }

    #[test]
    fn fits_recover_synthetic_inputs() {
        let dummy_state = AmplitudeState {
            t: 15.0,
            c_e: Complex::new(0.0, 0.0),
            c_modes: vec![],
        };
        let mut samples = Vec::new();
        for i in 0..400 {
            let t = i as f64 * 15.0 / 399.0;
            let u = -(-0.1f64 * t).exp_m1() / 0.1;
            samples.push(TrajectorySample {
                t,
                population: (-0.1f64 * t).exp(),
                momentum: Vec3::new(0.0, 1.0, 3.0) + Vec3::new(0.0, 0.0, -0.002) * u,
                roentgen_momentum: Vec3::zero(),
                norm: 1.0,
            });
        }
        let traj = Trajectory {
            samples,
            final_state: dummy_state,
            horizon: f64::INFINITY,
            warnings: vec![],
        };
        assert!((fit_decay_rate(&traj, 0.1).unwrap() - 0.1).abs() < 1e-12);
        let drift = fit_momentum_drift(&traj, 0.1).unwrap();
        assert!(drift.x.abs() < 1e-15);
        assert!(drift.y.abs() < 1e-12);
        assert!((drift.z + 0.002).abs() < 1e-12);

        // too small a reference rate leaves no samples in the window
        assert!(fit_decay_rate(&traj, 1e-4).is_err());
    }

    #[test]
    fn step_halving_shows_fourth_order_convergence() {
        let a = atom(1.0, Vec3::unit_x(), 1e290, Vec3::zero());
        let grid = single_mode_grid(Vec3::unit_z(), 1.0);
        let pop_end = |dt: f64| {
            evolve(&a, &grid, 40.0, dt, usize::MAX)
                .unwrap()
                .samples
                .last()
                .unwrap()
                .population
        };
        let d1 = (pop_end(0.5) - pop_end(0.25)).abs();
        let d2 = (pop_end(0.25) - pop_end(0.125)).abs();
        assert!(d2 <= d1 / 14.0, "d1 {d1} d2 {d2}");
    }

    #[test]
    fn evolve_rejects_bad_arguments() {
        let a = atom(0.3, Vec3::unit_z(), 1000.0, Vec3::zero());
        let grid = small_bath(2, 4, 4, 0.3);
        assert!(evolve(&a, &grid, -1.0, 0.1, 1).is_err());
        assert!(evolve(&a, &grid, 1.0, 0.0, 1).is_err());
        assert!(evolve(&a, &grid, 1.0, 0.1, 0).is_err());

        // window that misses the resonance
        let offset = build_mode_grid(
            direction_grid(2, 4).unwrap(),
            frequency_grid(2.0, 0.5, 4).unwrap(),
        )
        .unwrap();
        assert!(evolve(&a, &offset, 1.0, 0.1, 1).is_err());
        assert!(grid_golden_rule(&a, &offset).is_err());
    }

    #[test]
    fn oversized_steps_trip_the_norm_guard() {
        let a = atom(0.5, Vec3::unit_z(), 1000.0, Vec3::zero());
        let grid = small_bath(2, 4, 8, 0.5);
        let err = evolve(&a, &grid, 2000.0, 50.0, 1);
        assert!(matches!(err, Err(Error::Numerical(_))));
    }

    #[test]
    fn horizon_warning_fires_beyond_recurrence() {
        let a = atom(0.1, Vec3::unit_z(), 1000.0, Vec3::zero());
        let grid = build_mode_grid(
            direction_grid(2, 4).unwrap(),
            frequency_grid(1.0, 0.3, 4).unwrap(),
        )
        .unwrap();
        let horizon = 2.0 * std::f64::consts::PI / grid.frequencies().max_spacing();
        let traj = evolve(&a, &grid, horizon * 1.5, 0.05, 1000).unwrap();
        assert_eq!(traj.warnings.len(), 1);
        assert!(traj.warnings[0].contains("horizon"));
    }
}
