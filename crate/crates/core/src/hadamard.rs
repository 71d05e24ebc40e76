//! Hadamard-product surrogates of the Wronskian built from spectral data.
//!
//! For the mixed family the entire function is
//!     W(lambda) = cos sqrt(lambda) * prod_k (lambda - lambda_k)/(lambda - lambda_k^0),
//! and absorbing the tail (mu_k = 0 for k >= N) through
//!     prod_{k>=0} (lambda - lambda_k^0 - c)/(lambda - lambda_k^0)
//!         = cos sqrt(lambda - c) / cos sqrt(lambda)
//! leaves the finite closed form
//!     W(lambda) = cos sqrt(lambda - c) * prod_{k<N} (lambda - lambda_k)/(lambda - lambda_k^0 - c).
//! The general family uses -sqrt(lambda) sin sqrt(lambda) as the base in the
//! same way. Every apparent pole sits on a zero of the base; evaluation
//! switches to a local Taylor ratio there, so the products are evaluated as
//! entire functions throughout.

use crate::data::{BoundaryCondition, SpectralData};
use crate::error::{Result, SlError};

/// Relative window around a base root inside which the ratio is evaluated
/// by its Taylor expansion (the removable-singularity branch).
const NEAR_TOL: f64 = 1e-4;
/// Tail accumulation controls for the identity sums.
const TAIL_EPS: f64 = 1e-13;
const TAIL_MAX: usize = 4000;

/// Which entire base function the product is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// cos sqrt(z); roots at pi^2 (j + 1/2)^2.
    Mixed,
    /// -sqrt(z) sin sqrt(z); roots at pi^2 j^2.
    General,
}

impl Family {
    pub fn of(bc: &BoundaryCondition) -> Self {
        match bc {
            BoundaryCondition::Mixed { .. } => Family::Mixed,
            BoundaryCondition::General { .. } => Family::General,
        }
    }

    /// j-th root of the base function.
    pub fn root(self, j: usize) -> f64 {
        let pi = std::f64::consts::PI;
        let k = match self {
            Family::Mixed => pi * (j as f64 + 0.5),
            Family::General => pi * j as f64,
        };
        k * k
    }

    /// Unperturbed norming constant of index n.
    pub fn norming0(self, n: usize) -> f64 {
        match self {
            Family::Mixed => -(std::f64::consts::PI * (n as f64 + 0.5)).ln(),
            Family::General => 0.0,
        }
    }

    fn value(self, z: f64) -> f64 {
        match self {
            Family::Mixed => {
                if z >= 0.0 {
                    z.sqrt().cos()
                } else {
                    (-z).sqrt().cosh()
                }
            }
            Family::General => {
                if z.abs() < 1e-3 {
                    -z * (1.0 + z * (-1.0 / 6.0 + z * (1.0 / 120.0 - z / 5040.0)))
                } else if z > 0.0 {
                    let s = z.sqrt();
                    -s * s.sin()
                } else {
                    let g = (-z).sqrt();
                    g * g.sinh()
                }
            }
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Family::Mixed => {
                if z.abs() < 1e-3 {
                    -0.5 + z * (1.0 / 12.0 - z / 240.0)
                } else if z > 0.0 {
                    let s = z.sqrt();
                    -s.sin() / (2.0 * s)
                } else {
                    let g = (-z).sqrt();
                    -g.sinh() / (2.0 * g)
                }
            }
            Family::General => {
                if z.abs() < 1e-3 {
                    -1.0 + z * (1.0 / 3.0 - z / 40.0)
                } else if z > 0.0 {
                    let s = z.sqrt();
                    -s.sin() / (2.0 * s) - s.cos() / 2.0
                } else {
                    let g = (-z).sqrt();
                    -g.sinh() / (2.0 * g) - g.cosh() / 2.0
                }
            }
        }
    }

    /// First three derivatives of the base at its j-th root, for the Taylor
    /// branch of the ratio base(z)/(z - root_j).
    fn taylor_at_root(self, j: usize) -> (f64, f64, f64) {
        let r = self.root(j);
        match self {
            Family::Mixed => {
                let s = r.sqrt();
                let sigma = if j % 2 == 0 { 1.0 } else { -1.0 }; // sin s at the root
                (
                    -sigma / (2.0 * s),
                    sigma / (4.0 * s * s * s),
                    sigma * (s * s - 3.0) / (8.0 * s.powi(5)),
                )
            }
            Family::General => {
                if j == 0 {
                    (-1.0, 1.0 / 3.0, -1.0 / 20.0)
                } else {
                    let eps = if j % 2 == 0 { 1.0 } else { -1.0 }; // cos s at the root
                    (-eps / 2.0, -eps / (4.0 * r), eps * (3.0 + r) / (8.0 * r * r))
                }
            }
        }
    }

    /// Index of the base root nearest to z.
    fn nearest_root(self, z: f64) -> usize {
        if z <= 0.0 {
            return 0;
        }
        let s = z.sqrt() / std::f64::consts::PI;
        let guess = match self {
            Family::Mixed => (s - 0.5).round().max(0.0) as usize,
            Family::General => s.round().max(0.0) as usize,
        };
        let mut best = guess;
        let mut best_d = (z - self.root(guess)).abs();
        for cand in guess.saturating_sub(1)..=guess + 1 {
            let d = (z - self.root(cand)).abs();
            if d < best_d {
                best = cand;
                best_d = d;
            }
        }
        best
    }
}

/// The finite Hadamard product of one spectral data set: base family, the
/// shift c and the stored eigenvalue remainders.
#[derive(Debug, Clone)]
pub struct HadamardProduct {
    family: Family,
    c: f64,
    mu: Vec<f64>,
}

impl HadamardProduct {
    pub fn new(family: Family, c: f64, mu: Vec<f64>) -> Self {
        Self { family, c, mu }
    }

    /// Builds the product from spectral data carrying a full mu sequence.
    pub fn from_data(data: &SpectralData) -> Result<Self> {
        if data.missing_mu0() {
            return Err(SlError::InvalidInput(
                "spectral data is missing mu_0; recover it first".into(),
            ));
        }
        data.validate()?;
        Ok(Self::new(Family::of(&data.bc), data.c, data.mu.clone()))
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Eigenvalue lambda_n, using the stored remainder for n < N and the
    /// tail model (mu_n = 0) beyond.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        let mu = self.mu.get(n).copied().unwrap_or(0.0);
        self.family.root(n) + self.c + mu
    }

    /// W(lambda) and its lambda-derivative. At a root the derivative comes
    /// from the analytically differentiated product; near a base root the
    /// removable factor is evaluated by its Taylor ratio.
    pub fn eval(&self, lambda: f64) -> Result<(f64, f64)> {
        if !lambda.is_finite() {
            return Err(SlError::PoleError { lambda });
        }
        let z = lambda - self.c;
        let fam = self.family;
        let n = self.mu.len();

        let near_j = {
            let j = fam.nearest_root(z);
            let r = fam.root(j);
            if (z - r).abs() <= NEAR_TOL * (1.0 + r.abs()) {
                Some(j)
            } else {
                None
            }
        };

        // Factor list (value, d/dlambda). Paired numerator/denominator
        // factors stay O(1), so long products cannot overflow.
        let mut values: Vec<f64> = Vec::with_capacity(n + 2);
        let mut derivs: Vec<f64> = Vec::with_capacity(n + 2);
        let mut push = |v: f64, d: f64| {
            values.push(v);
            derivs.push(d);
        };

        for k in 0..n {
            if Some(k) == near_j {
                continue;
            }
            let den = z - fam.root(k);
            if den == 0.0 {
                // z sits exactly on a base root that was not flagged as near:
                // cannot happen by construction of the window, but guard it.
                return Err(SlError::PoleError { lambda });
            }
            let num = lambda - self.eigenvalue(k);
            push(num / den, self.mu[k] / (den * den));
        }

        match near_j {
            Some(j) => {
                let r = fam.root(j);
                let e = z - r;
                let (f1, f2, f3) = fam.taylor_at_root(j);
                let ratio = f1 + e * (f2 / 2.0 + e * f3 / 6.0);
                let ratio_d = f2 / 2.0 + e * f3 / 3.0;
                push(ratio, ratio_d);
                if j < n {
                    // The j-th denominator is consumed by the base root; its
                    // numerator stands alone and may legitimately vanish.
                    push(lambda - self.eigenvalue(j), 1.0);
                } else {
                    // Genuine zero of the tail.
                    push(e, 1.0);
                }
            }
            None => {
                push(fam.value(z), fam.derivative(z));
            }
        }

        let zeros = values.iter().filter(|v| **v == 0.0).count();
        let (w, wdot) = match zeros {
            0 => {
                let w: f64 = values.iter().product();
                let logd: f64 = values
                    .iter()
                    .zip(&derivs)
                    .map(|(v, d)| d / v)
                    .sum();
                (w, w * logd)
            }
            1 => {
                let idx = values.iter().position(|v| *v == 0.0).unwrap();
                let rest: f64 = values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != idx)
                    .map(|(_, v)| *v)
                    .product();
                (0.0, derivs[idx] * rest)
            }
            _ => (0.0, 0.0),
        };
        Ok((w, wdot))
    }

    /// W-dot at the n-th root of the product (stored for n < N, tail model
    /// beyond).
    pub fn wdot_at_root(&self, n: usize) -> Result<f64> {
        Ok(self.eval(self.eigenvalue(n))?.1)
    }

    /// sum over n >= start, n != skip, of (2 - e^{sign nu_n} / |W-dot(lambda_n)|),
    /// where nu_n = nu_n^0 + dnu_n for stored n. Past the stored range the
    /// norming shifts are extrapolated by a d/x^2 fit to the stored dnu (the
    /// decay the eigenvalue asymptotics give them) and the terms are
    /// accumulated until negligible, with a C/n^2 closure at the far end.
    pub fn identity_sum(
        &self,
        dnu: &[f64],
        sign: f64,
        start: usize,
        skip: Option<usize>,
    ) -> Result<f64> {
        let n_stored = self.mu.len();
        let mut total = 0.0;
        for n in start..n_stored {
            if Some(n) == skip {
                continue;
            }
            let dn = dnu.get(n).copied().unwrap_or(0.0);
            let nu = self.family.norming0(n) + dn;
            let wdot = self.wdot_at_root(n)?;
            total += 2.0 - (sign * nu).exp() / wdot.abs();
        }

        let dnu_fit = self.fit_dnu_tail(dnu, start, skip);

        // Tail: with nu_n = nu_n^0 the quotient e^{sign nu_n^0}/|base'(root_n)|
        // is exactly 2, so each term reduces to
        // 2 - 2 e^{sign dnu_n} / P_n with
        // P_n = prod_{k<N} (1 - mu_k / (root_n - root_k)).
        let mut terms = Vec::new();
        let tail_start = n_stored.max(start).max(1);
        let mut n = tail_start;
        while n < tail_start + TAIL_MAX {
            let t = self.tail_term(n, sign, dnu_fit);
            terms.push(t);
            if t.abs() < TAIL_EPS && n > tail_start + 8 {
                break;
            }
            n += 1;
        }
        total += terms.iter().sum::<f64>();

        // Remainder of the C/n^2 model fitted on the last quarter of the
        // computed tail terms.
        let stop = tail_start + terms.len(); // first index not computed
        let q_len = (terms.len() / 4).max(4).min(terms.len());
        let fit: f64 = terms[terms.len() - q_len..]
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let idx = (stop - q_len + i) as f64 + 1.0;
                t * idx * idx
            })
            .sum::<f64>()
            / q_len as f64;
        total += fit * inv_square_tail(stop as f64 + 1.0);
        Ok(total)
    }

    /// Least-squares coefficient of dnu_n ~ d / (n + offset)^2 on the last
    /// quarter of the stored shifts.
    fn fit_dnu_tail(&self, dnu: &[f64], start: usize, skip: Option<usize>) -> f64 {
        let offset = match self.family {
            Family::Mixed => 0.5,
            Family::General => 0.0,
        };
        let usable: Vec<(f64, f64)> = (start..self.mu.len().min(dnu.len()))
            .filter(|n| Some(*n) != skip)
            .map(|n| (n as f64 + offset, dnu[n]))
            .collect();
        if usable.len() < 8 {
            return 0.0;
        }
        let q_len = (usable.len() / 4).max(4);
        let (mut suu, mut stu) = (0.0, 0.0);
        for (x, v) in &usable[usable.len() - q_len..] {
            let u = 1.0 / (x * x);
            suu += u * u;
            stu += v * u;
        }
        if suu > 0.0 {
            stu / suu
        } else {
            0.0
        }
    }

    fn tail_term(&self, n: usize, sign: f64, dnu_fit: f64) -> f64 {
        let rn = self.family.root(n);
        let mut p = 1.0;
        for (k, &mu) in self.mu.iter().enumerate() {
            p *= 1.0 - mu / (rn - self.family.root(k));
        }
        let offset = match self.family {
            Family::Mixed => 0.5,
            Family::General => 0.0,
        };
        let x = n as f64 + offset;
        let dn = dnu_fit / (x * x);
        2.0 - 2.0 * (sign * dn).exp() / p
    }
}

/// sum_{k >= K} 1/k^2 by Euler-Maclaurin.
pub(crate) fn inv_square_tail(k: f64) -> f64 {
    1.0 / k + 1.0 / (2.0 * k * k) + 1.0 / (6.0 * k * k * k) - 1.0 / (30.0 * k.powi(5))
}
