//! The exact isospectral flow shifting a single norming constant.
//!
//! For a target index n and shift t, the transformed pair is
//!     q_n^t = q - 2 (log eta)'' ,   b_n^t = b - (e^t - 1) psi_n^2(1),
//! with eta(x) = 1 + (e^t - 1) int_x^1 psi_n^2. The second log-derivative is
//! expanded through eta' = -(e^t - 1) psi_n^2 and eta'' = -2 (e^t - 1)
//! psi_n psi_n', so the transform is sampled pointwise from trajectories
//! without any grid differentiation. Eigenvalues are preserved; nu_m shifts
//! by exactly t delta_{mn}.

use crate::error::{Result, SlError};
use crate::potential::{cumulative_integral, Potential};
use crate::spectrum::eigenvalues;

/// One flow step: shift nu_n by t.
#[derive(Debug, Clone, Copy)]
pub struct DarbouxStep {
    pub n: usize,
    pub t: f64,
}

/// Applies the Darboux transform for one step, returning the transformed
/// (potential, b). Large shifts are split into substeps of |t| <= 2 to keep
/// the dynamic range of eta small.
pub fn darboux_transform(q: &Potential, b: f64, step: DarbouxStep) -> Result<(Potential, f64)> {
    if !step.t.is_finite() {
        return Err(SlError::InvalidInput(format!("non-finite shift t = {}", step.t)));
    }
    let pieces = (step.t.abs() / 2.0).ceil().max(1.0);
    let dt = step.t / pieces;
    let mut q_cur = q.clone();
    let mut b_cur = b;
    for _ in 0..pieces as usize {
        let (qn, bn) = single_step(&q_cur, b_cur, step.n, dt)?;
        q_cur = qn;
        b_cur = bn;
    }
    Ok((q_cur, b_cur))
}

fn single_step(q: &Potential, b: f64, n: usize, t: f64) -> Result<(Potential, f64)> {
    if t == 0.0 {
        return Ok((q.clone(), b));
    }
    let records = eigenvalues(q, b, n + 1)?;
    let eig = &records[n];
    let h = q.step();
    let m = q.grid_size();

    let psi_sq: Vec<f64> = eig.psi.iter().map(|v| v * v).collect();
    let cumulative = cumulative_integral(&psi_sq, h);
    let total = cumulative[m];
    let growth = t.exp() - 1.0;

    let mut samples = Vec::with_capacity(m + 1);
    let mut min_eta = f64::INFINITY;
    for j in 0..=m {
        // eta = 1 + (e^t - 1) int_x^1 psi^2
        let eta = 1.0 + growth * (total - cumulative[j]);
        min_eta = min_eta.min(eta);
        let eta_p = -growth * psi_sq[j];
        let eta_pp = -2.0 * growth * eig.psi[j] * eig.psi_prime[j];
        samples.push(q.samples()[j] - 2.0 * (eta_pp * eta - eta_p * eta_p) / (eta * eta));
    }
    if min_eta <= 0.0 {
        return Err(SlError::PositivityError {
            index: n,
            t,
            min_eta,
        });
    }
    let psi1 = *eig.psi.last().unwrap();
    let b_new = b - growth * psi1 * psi1;
    Ok((Potential::new(samples)?, b_new))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shift_is_identity() {
        let q = Potential::from_fn_on(|x| 0.5 * (std::f64::consts::PI * x).cos(), 64);
        let (q2, b2) = darboux_transform(&q, 0.3, DarbouxStep { n: 0, t: 0.0 }).unwrap();
        assert_eq!(q.samples(), q2.samples());
        assert_eq!(b2, 0.3);
    }

    #[test]
    fn eta_bounds_hold() {
        // For q = 0, b = 0 the transform of mode 0 keeps eta within
        // [min(1, e^t), max(1, e^t)]; indirectly checked through the mean
        // identity Q_0 + 2b being preserved.
        let q = Potential::zero(256);
        let t = 0.8;
        let (q2, b2) = darboux_transform(&q, 0.0, DarbouxStep { n: 0, t }).unwrap();
        let before = q.mean();
        let after = q2.mean() + 2.0 * b2;
        assert!(
            (after - before).abs() < 1e-8,
            "c drifted: {before} -> {after}"
        );
    }
}
