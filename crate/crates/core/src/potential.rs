//! Sampled potentials on the unit interval: interpolation, quadrature and
//! the mixed-index Fourier coefficients driving the eigenvalue asymptotics.
//!
//! A potential is a real function q in L^2(0,1) represented by samples on the
//! uniform grid x_j = j/M. Between nodes it is evaluated by a local C^1 cubic
//! (Hermite with fourth-order slope estimates), and integrals use a composite
//! rule of matching order on the same grid, so the whole crate shares one
//! discretization of q.

use crate::error::{Result, SlError};

/// Default grid size: resolves ~100 eigenfunction oscillations at ten or
/// more points per period.
pub const DEFAULT_GRID: usize = 1024;

/// Minimum admissible grid size.
pub const MIN_GRID: usize = 16;

/// A real potential sampled at the nodes x_j = j/M, j = 0..=M.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    samples: Vec<f64>,
    /// Node slopes of the C^1 cubic interpolant (fourth-order estimates).
    slopes: Vec<f64>,
}

impl Potential {
    /// Builds a potential from samples at the M+1 uniform grid nodes.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < MIN_GRID + 1 {
            return Err(SlError::InvalidInput(format!(
                "grid size {} below minimum {MIN_GRID}",
                samples.len().saturating_sub(1)
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(SlError::InvalidInput(format!(
                "non-finite potential sample {bad}"
            )));
        }
        let slopes = node_slopes(&samples, samples.len() - 1);
        Ok(Self { samples, slopes })
    }

    /// Samples f at the default grid.
    pub fn from_fn(f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn_on(f, DEFAULT_GRID)
    }

    /// Samples f at the nodes of an M-cell grid.
    pub fn from_fn_on(f: impl Fn(f64) -> f64, grid_size: usize) -> Self {
        let m = grid_size.max(MIN_GRID);
        let samples = (0..=m).map(|j| f(j as f64 / m as f64)).collect();
        Self::new(samples).expect("finite samples on a valid grid")
    }

    /// The zero potential on an M-cell grid.
    pub fn zero(grid_size: usize) -> Self {
        Self::constant(0.0, grid_size)
    }

    /// A constant potential on an M-cell grid.
    pub fn constant(c: f64, grid_size: usize) -> Self {
        let m = grid_size.max(MIN_GRID);
        Self::new(vec![c; m + 1]).expect("constant samples are finite")
    }

    /// Number of grid cells M.
    pub fn grid_size(&self) -> usize {
        self.samples.len() - 1
    }

    /// Grid spacing 1/M.
    pub fn step(&self) -> f64 {
        1.0 / self.grid_size() as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Evaluates the interpolant at x (clamped to [0,1]). Deterministic:
    /// identical samples give bit-identical values.
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.grid_size();
        let x = x.clamp(0.0, 1.0);
        let scaled = x * m as f64;
        let mut j = scaled.floor() as usize;
        if j >= m {
            j = m - 1;
        }
        let s = scaled - j as f64; // local coordinate in [0,1]
        let h = self.step();
        hermite(
            self.samples[j],
            self.samples[j + 1],
            self.slopes[j] * h,
            self.slopes[j + 1] * h,
            s,
        )
    }

    /// Q_0, the integral of q over [0,1].
    pub fn mean(&self) -> f64 {
        quadrature(&self.samples, self.step())
    }

    /// L^2(0,1) norm of q.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.samples.iter().map(|v| v * v).collect();
        quadrature(&sq, self.step()).max(0.0).sqrt()
    }

    /// Mixed-index Fourier pair (cos, sin) of q at frequency 2 k_n^0 with
    /// k_n^0 = pi (n + 1/2).
    pub fn fourier_mixed(&self, n: usize) -> (f64, f64) {
        let k = std::f64::consts::PI * (n as f64 + 0.5);
        let m = self.grid_size();
        let h = self.step();
        let mut cos_vals = Vec::with_capacity(m + 1);
        let mut sin_vals = Vec::with_capacity(m + 1);
        for (j, &q) in self.samples.iter().enumerate() {
            let x = j as f64 * h;
            let (s, c) = (2.0 * k * x).sin_cos();
            cos_vals.push(q * c);
            sin_vals.push(q * s);
        }
        (quadrature(&cos_vals, h), quadrature(&sin_vals, h))
    }

    /// Pointwise q + factor * p on a shared grid.
    pub fn add_scaled(&self, p: &[f64], factor: f64) -> Result<Self> {
        if p.len() != self.samples.len() {
            return Err(SlError::InvalidInput(format!(
                "grid mismatch: {} vs {} samples",
                self.samples.len(),
                p.len()
            )));
        }
        let samples = self
            .samples
            .iter()
            .zip(p)
            .map(|(a, b)| a + factor * b)
            .collect();
        Self::new(samples)
    }

    /// The reflected potential q*(x) = q(1-x).
    pub fn reflected(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self::new(samples).expect("reflection preserves validity")
    }
}

/// Cubic Hermite on a unit cell; slopes are pre-scaled by the cell width.
fn hermite(f0: f64, f1: f64, d0: f64, d1: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    f0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + d0 * (s3 - 2.0 * s2 + s)
        + f1 * (-2.0 * s3 + 3.0 * s2)
        + d1 * (s3 - s2)
}

/// Fourth-order slope estimates at the grid nodes.
fn node_slopes(f: &[f64], m: usize) -> Vec<f64> {
    let h = 1.0 / m as f64;
    let mut d = vec![0.0; m + 1];
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    for j in 2..m - 1 {
        d[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * h);
    }
    d[m - 1] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4])
        / (12.0 * h);
    d[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4])
        / (12.0 * h);
    d
}

/// Composite quadrature on uniformly spaced values: Simpson panels, with a
/// 3/8 panel at the right end when the interval count is odd. Exact for
/// cubics; fourth order on smooth integrands.
pub fn quadrature(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(n >= 3, "quadrature needs at least four nodes");
    let (simpson_end, mut total) = if n % 2 == 0 {
        (n, 0.0)
    } else {
        // 3/8 rule on the last three intervals.
        let k = n - 3;
        let tail = 3.0 * h / 8.0
            * (values[k] + 3.0 * values[k + 1] + 3.0 * values[k + 2] + values[k + 3]);
        (k, tail)
    };
    if simpson_end > 0 {
        let mut acc = values[0] + values[simpson_end];
        let mut odd = 0.0;
        let mut even = 0.0;
        for (i, &v) in values[1..simpson_end].iter().enumerate() {
            if i % 2 == 0 {
                odd += v;
            } else {
                even += v;
            }
        }
        acc += 4.0 * odd + 2.0 * even;
        total += acc * h / 3.0;
    }
    total
}

/// Node values of the running integral of a sampled function, using the same
/// C^1 cubic reconstruction as `Potential::eval` (fourth order).
pub fn cumulative_integral(values: &[f64], h: f64) -> Vec<f64> {
    let m = values.len() - 1;
    let d = node_slopes(values, m);
    let mut out = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for j in 0..m {
        // Integral of the Hermite cubic over one cell.
        acc += h * (values[j] + values[j + 1]) / 2.0 + h * h * (d[j] - d[j + 1]) / 12.0;
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mean_of_zero_and_constant() {
        assert_eq!(Potential::zero(64).mean(), 0.0);
        assert!((Potential::constant(3.0, 64).mean() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn mean_of_full_cosine_period() {
        let q = Potential::from_fn_on(|x| (2.0 * PI * x).cos(), 256);
        assert!(q.mean().abs() < 1e-10);
    }

    #[test]
    fn l2_norm_cases() {
        assert_eq!(Potential::zero(64).l2_norm(), 0.0);
        assert!((Potential::constant(2.0, 64).l2_norm() - 2.0).abs() < 1e-13);
        let q = Potential::from_fn_on(|x| (PI * x).sin(), 256);
        assert!((q.l2_norm() - 0.5f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn fourier_mixed_cases() {
        let zero = Potential::zero(64);
        assert_eq!(zero.fourier_mixed(3), (0.0, 0.0));

        let one = Potential::constant(1.0, 256);
        let (c, s) = one.fourier_mixed(0);
        assert!(c.abs() < 1e-10, "cos coefficient {c}");
        assert!((s - 2.0 / PI).abs() < 1e-10, "sin coefficient {s}");

        let q = Potential::from_fn_on(|x| (PI * x).cos(), 256);
        let (c, s) = q.fourier_mixed(0);
        assert!((c - 0.5).abs() < 1e-8);
        assert!(s.abs() < 1e-8);
    }

    #[test]
    fn quadrature_exact_for_cubics() {
        // Odd interval count exercises the 3/8 tail panel.
        for m in [64usize, 101] {
            let h = 1.0 / m as f64;
            let vals: Vec<f64> = (0..=m)
                .map(|j| {
                    let x = j as f64 * h;
                    1.5 - 2.0 * x + 3.25 * x * x - 0.75 * x * x * x
                })
                .collect();
            let exact = 1.5 - 1.0 + 3.25 / 3.0 - 0.75 / 4.0;
            assert!(
                (quadrature(&vals, h) - exact).abs() < 1e-14,
                "m = {m}"
            );
        }
    }

    #[test]
    fn grid_refinement_is_fourth_order() {
        let f = |x: f64| (3.0 * x).exp() * (2.0 * PI * x).sin();
        let exact = {
            // integral of e^{3x} sin(2 pi x): standard antiderivative
            let a: f64 = 3.0;
            let b = 2.0 * PI;
            let prim = |x: f64| (a * x).exp() * (a * (b * x).sin() - b * (b * x).cos()) / (a * a + b * b);
            prim(1.0) - prim(0.0)
        };
        let e1 = (Potential::from_fn_on(f, 64).mean() - exact).abs();
        let e2 = (Potential::from_fn_on(f, 128).mean() - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order > 3.7, "observed order {order}");
    }

    #[test]
    fn interpolation_reproduces_cubics_exactly() {
        let f = |x: f64| 0.5 + x - 2.0 * x * x + 0.25 * x * x * x;
        let q = Potential::from_fn_on(f, 32);
        for &x in &[0.011, 0.3337, 0.5, 0.71113, 0.9999] {
            assert!((q.eval(x) - f(x)).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn cumulative_integral_matches_quadrature() {
        let f = |x: f64| (1.3 * x).cos() + x * x;
        let m = 128;
        let h = 1.0 / m as f64;
        let vals: Vec<f64> = (0..=m).map(|j| f(j as f64 * h)).collect();
        let cum = cumulative_integral(&vals, h);
        let exact = |x: f64| (1.3 * x).sin() / 1.3 + x * x * x / 3.0;
        for j in (0..=m).step_by(16) {
            let x = j as f64 * h;
            assert!((cum[j] - exact(x)).abs() < 1e-10, "x = {x}");
        }
        assert!((cum[m] - quadrature(&vals, h)).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Potential::new(vec![0.0; 8]).is_err());
        assert!(Potential::new(vec![f64::NAN; 33]).is_err());
    }
}
