//! Gradient rows of the spectral map and the explicit biorthogonal dual
//! basis used to invert it.
//!
//! Rows pair against perturbations (p; h) through
//! <(f; g), (p; h)> = int_0^1 f p dx + g h. The duals (1; 0), Z_m, T_m pair
//! to the identity against (1; 2), X_n, Y_n; their derivative parts are
//! assembled from the integrated first-derivative trajectories, never from
//! grid differentiation.

use rayon::prelude::*;

use crate::error::{Result, SlError};
use crate::potential::{quadrature, Potential};
use crate::spectrum::{eigenvalues, EigenRecord};

/// Which spectral quantity a gradient row differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// The constant row (1; 2) for c = Q_0 + 2b.
    Const,
    Lambda,
    Mu,
    Nu,
}

/// One row of the Frechet derivative: a sampled function part plus the
/// boundary (b-direction) scalar.
#[derive(Debug, Clone)]
pub struct GradientRow {
    pub kind: RowKind,
    pub n: usize,
    pub func: Vec<f64>,
    pub boundary: f64,
}

/// Members of the dual system (1; 0), Z_m, T_m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualKind {
    One,
    Z,
    T,
}

#[derive(Debug, Clone)]
pub struct DualVector {
    pub kind: DualKind,
    pub m: usize,
    pub func: Vec<f64>,
    pub boundary: f64,
}

/// The pairing <(f; g), (p; h)>.
pub fn pairing(func: &[f64], boundary: f64, p: &[f64], h_dir: f64, step: f64) -> f64 {
    let prod: Vec<f64> = func.iter().zip(p).map(|(a, b)| a * b).collect();
    quadrature(&prod, step) + boundary * h_dir
}

/// Gradient row of lambda_n: (psi_n^2; psi_n^2(1)).
pub fn lambda_row(eig: &EigenRecord) -> GradientRow {
    let func: Vec<f64> = eig.psi.iter().map(|v| v * v).collect();
    let boundary = *func.last().expect("non-empty trajectory");
    GradientRow {
        kind: RowKind::Lambda,
        n: eig.n,
        func,
        boundary,
    }
}

/// Gradient row of mu_n: X_n = (psi_n^2 - 1; psi_n^2(1) - 2).
pub fn mu_row(eig: &EigenRecord) -> GradientRow {
    let last = eig.psi.last().expect("non-empty trajectory");
    GradientRow {
        kind: RowKind::Mu,
        n: eig.n,
        func: eig.psi.iter().map(|v| v * v - 1.0).collect(),
        boundary: last * last - 2.0,
    }
}

/// Gradient row of nu_n: Y_n = (psi_n chi_n; (psi_n chi_n)(1)).
pub fn nu_row(_q: &Potential, _b: f64, eig: &EigenRecord) -> Result<GradientRow> {
    let func: Vec<f64> = eig.psi.iter().zip(&eig.chi).map(|(p, c)| p * c).collect();
    let boundary = *func.last().expect("non-empty trajectory");
    Ok(GradientRow {
        kind: RowKind::Nu,
        n: eig.n,
        func,
        boundary,
    })
}

/// The Mu and Nu rows X_n, Y_n for n < count, preceded by the constant row
/// (1; 2) differentiating c = Q_0 + 2b.
pub fn gradient_rows(q: &Potential, b: f64, count: usize) -> Result<Vec<GradientRow>> {
    let records = eigenvalues(q, b, count)?;
    gradient_rows_from(q, b, &records)
}

pub fn gradient_rows_from(
    q: &Potential,
    b: f64,
    records: &[EigenRecord],
) -> Result<Vec<GradientRow>> {
    let m = q.grid_size();
    let mut rows = vec![GradientRow {
        kind: RowKind::Const,
        n: usize::MAX,
        func: vec![1.0; m + 1],
        boundary: 2.0,
    }];
    let per_mode: Vec<(GradientRow, GradientRow)> = records
        .par_iter()
        .map(|eig| Ok((mu_row(eig), nu_row(q, b, eig)?)))
        .collect::<Result<_>>()?;
    for (x, y) in per_mode {
        rows.push(x);
        rows.push(y);
    }
    Ok(rows)
}

/// The dual system (1; 0), Z_m = (-2 (psi_m chi_m)'; (psi_m chi_m)(1)),
/// T_m = (2 (psi_m^2)'; -psi_m^2(1)) for m < count.
pub fn dual_basis(q: &Potential, b: f64, count: usize) -> Result<Vec<DualVector>> {
    let records = eigenvalues(q, b, count)?;
    dual_basis_from(q, b, &records)
}

pub fn dual_basis_from(
    q: &Potential,
    b: f64,
    records: &[EigenRecord],
) -> Result<Vec<DualVector>> {
    let m = q.grid_size();
    let mut duals = vec![DualVector {
        kind: DualKind::One,
        m: usize::MAX,
        func: vec![1.0; m + 1],
        boundary: 0.0,
    }];
    let per_mode: Vec<(DualVector, DualVector)> = records
        .par_iter()
        .map(|eig| dual_pair(q, b, eig))
        .collect::<Result<_>>()?;
    for (z, t) in per_mode {
        duals.push(z);
        duals.push(t);
    }
    Ok(duals)
}

/// (Z_m, T_m) for one mode, with (psi chi)' = psi' chi + psi chi' and
/// (psi^2)' = 2 psi psi' from the stored derivative trajectories.
pub fn dual_pair(q: &Potential, _b: f64, eig: &EigenRecord) -> Result<(DualVector, DualVector)> {
    if eig.psi.len() != q.grid_size() + 1 {
        return Err(SlError::InvalidInput(
            "eigen record grid does not match potential".into(),
        ));
    }
    let (chi, chi_prime) = (&eig.chi, &eig.chi_prime);
    let psi_chi_1 = eig.psi.last().unwrap() * chi.last().unwrap();
    let z_func: Vec<f64> = (0..eig.psi.len())
        .map(|j| -2.0 * (eig.psi_prime[j] * chi[j] + eig.psi[j] * chi_prime[j]))
        .collect();
    let psi1 = *eig.psi.last().unwrap();
    // 2 (psi^2)' = 4 psi psi'
    let t_func: Vec<f64> = (0..eig.psi.len())
        .map(|j| 4.0 * eig.psi[j] * eig.psi_prime[j])
        .collect();
    Ok((
        DualVector {
            kind: DualKind::Z,
            m: eig.n,
            func: z_func,
            boundary: psi_chi_1,
        },
        DualVector {
            kind: DualKind::T,
            m: eig.n,
            func: t_func,
            boundary: -psi1 * psi1,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_mu_row_is_negative_cosine() {
        let q = Potential::zero(256);
        let recs = eigenvalues(&q, 0.0, 3).unwrap();
        let row = mu_row(&recs[1]);
        let m = q.grid_size();
        let k = PI * 1.5;
        for j in (0..=m).step_by(32) {
            let x = j as f64 / m as f64;
            let expected = -(2.0 * k * x).cos();
            assert!(
                (row.func[j] - expected).abs() < 1e-8,
                "x = {x}: {} vs {expected}",
                row.func[j]
            );
        }
        // psi^2(1) = 2 sin^2(3 pi / 2) = 2, so the boundary part vanishes
        assert!(row.boundary.abs() < 1e-8);
    }

    #[test]
    fn constant_row_pairs_to_one_with_dual_one() {
        let q = Potential::from_fn_on(|x| 0.4 * (PI * x).cos(), 128);
        let rows = gradient_rows(&q, 0.3, 2).unwrap();
        let duals = dual_basis(&q, 0.3, 2).unwrap();
        let h = q.step();
        let g = pairing(&rows[0].func, rows[0].boundary, &duals[0].func, duals[0].boundary, h);
        assert!((g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn biorthogonality_on_free_problem() {
        let q = Potential::zero(512);
        let b = 0.0;
        let recs = eigenvalues(&q, b, 6).unwrap();
        let rows = gradient_rows_from(&q, b, &recs).unwrap();
        let duals = dual_basis_from(&q, b, &recs).unwrap();
        let h = q.step();
        for (i, row) in rows.iter().enumerate() {
            for (j, dual) in duals.iter().enumerate() {
                let g = pairing(&row.func, row.boundary, &dual.func, dual.boundary, h);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (g - expected).abs() < 1e-6,
                    "row {i} vs dual {j}: {g}"
                );
            }
        }
    }
}
