//! Gauss–Legendre nodes and weights, plus a compensated accumulator used by
//! the direction sums.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1], in
/// ascending node order.
///
/// Roots are found by Newton iteration on the Legendre recurrence and then
/// mirrored, so the returned nodes are exactly symmetric about zero and odd
/// polynomials integrate to exactly zero.
pub fn gauss_legendre<T: Scalar>(n: usize) -> Result<Vec<(T, T)>> {
    if n < 1 {
        return Err(Error::domain("Gauss-Legendre rule needs at least one node"));
    }
    let mut nodes = vec![(T::zero(), T::zero()); n];
    let half = n.div_ceil(2);
    let nf = T::from_usize(n).expect("node count fits in scalar");
    for i in 0..half {
        let k = T::from_usize(i).unwrap();
        // Tricomi-style initial guess for the i-th largest root.
        let mut x = (T::PI() * (k + T::of(0.75)) / (nf + T::of(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, p_deriv) = legendre_with_derivative(n, x);
            dp = p_deriv;
            let dx = p / p_deriv;
            x -= dx;
            if dx.abs() <= T::epsilon() * x.abs().max(T::one()) {
                // one polishing step after convergence
                let (p, p_deriv) = legendre_with_derivative(n, x);
                dp = p_deriv;
                x -= p / p_deriv;
                break;
            }
        }
        let w = T::of(2.0) / ((T::one() - x * x) * dp * dp);
        // store the positive root and its mirror with identical weight
        nodes[n - 1 - i] = (x, w);
        nodes[i] = (-x, w);
    }
    if n % 2 == 1 {
        // the middle root is exactly zero
        let (_, w) = nodes[half - 1];
        nodes[half - 1] = (T::zero(), w);
    }
    Ok(nodes)
}

/// Gauss–Legendre rule mapped onto [a, b].
pub fn gauss_legendre_on<T: Scalar>(a: T, b: T, n: usize) -> Result<Vec<(T, T)>> {
    if !(b > a) {
        return Err(Error::domain("interval must satisfy a < b"));
    }
    let mid = (a + b) * T::of(0.5);
    let half_len = (b - a) * T::of(0.5);
    Ok(gauss_legendre(n)?
        .into_iter()
        .map(|(x, w)| (mid + half_len * x, half_len * w))
        .collect())
}

fn legendre_with_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut p = x;
    for j in 2..=n {
        let jf = T::from_usize(j).unwrap();
        let next = ((T::of(2.0) * jf - T::one()) * x * p - (jf - T::one()) * p_prev) / jf;
        p_prev = p;
        p = next;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    if n == 1 {
        return (x, T::one());
    }
    let nf = T::from_usize(n).unwrap();
    let deriv = nf * (x * p - p_prev) / (x * x - T::one());
    (p, deriv)
}

/// Neumaier-compensated running sum.
///
/// The direction integrals cancel odd integrands pairwise to the last bit;
/// plain summation would reintroduce rounding noise above the rest-frame
/// null tolerances.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CompensatedSum<T> {
    sum: T,
    correction: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            correction: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.correction += (self.sum - t) + x;
        } else {
            self.correction += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.correction
    }
}
