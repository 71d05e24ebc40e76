//! Reconstruction of (q, b) from spectral data: damped Newton iteration
//! driven by the explicit dual basis, the Darboux chain for pure
//! norming-constant changes, and the scalar recovery formulas for deleted
//! coordinates.

use crate::darboux::{darboux_transform, DarbouxStep};
use crate::data::{BoundaryCondition, SpectralData};
use crate::error::{Result, SlError};
use crate::frechet::dual_basis_from;
use crate::hadamard::{Family, HadamardProduct};
use crate::potential::{Potential, DEFAULT_GRID};
use crate::spectrum::{eigenvalues, spectral_map, unperturbed_norming, EigenRecord};

/// Options for the Newton inversion.
#[derive(Debug, Clone)]
pub struct InvertOptions {
    /// Data-space tolerance: |dc| + l2(d mu) + weighted-l2(d nu).
    pub tol: f64,
    /// Newton iteration cap on the final homotopy leg.
    pub max_iter: usize,
    /// Extra modes beyond the data truncation, pinned to the tail model.
    /// Zero by default: pinning modes the data does not constrain plants
    /// the tail-model error right where the nu-duals amplify it most.
    pub guard_modes: usize,
    /// Step halvings tried before declaring failure.
    pub max_halvings: usize,
    /// Homotopy legs along the data-space segment. None picks the count
    /// from the initial residual; the path keeps individual steps short,
    /// bounding the second-order drift the truncated residual cannot see.
    pub path_segments: Option<usize>,
    /// Grid size of the reconstructed potential when no initial iterate is
    /// supplied.
    pub grid_size: usize,
}

impl Default for InvertOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 40,
            guard_modes: 0,
            max_halvings: 8,
            path_segments: None,
            grid_size: DEFAULT_GRID,
        }
    }
}

/// Residual history of a Newton run.
#[derive(Debug, Clone)]
pub struct InvertDiagnostics {
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct DataDelta {
    dc: f64,
    dmu: Vec<f64>,
    dnu: Vec<f64>,
}

impl DataDelta {
    fn norm(&self) -> f64 {
        let mu: f64 = self.dmu.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nu: f64 = self
            .dnu
            .iter()
            .enumerate()
            .map(|(n, v)| {
                let w = (n + 1) as f64 * v;
                w * w
            })
            .sum::<f64>()
            .sqrt();
        self.dc.abs() + mu + nu
    }
}

/// Forward-solves the iterate and measures the gap to the extended target.
fn measure(
    q: &Potential,
    b: f64,
    target_c: f64,
    target_mu: &[f64],
    target_dnu: &[f64],
    modes: usize,
) -> Result<(Vec<EigenRecord>, DataDelta)> {
    let records = eigenvalues(q, b, modes)?;
    let delta = measure_at(&records, q, b, target_c, target_mu, target_dnu);
    Ok((records, delta))
}

/// The biorthogonal update (dq; db) = dc (1; 0) + sum dmu_m Z_m + sum dnu_m T_m
/// with the duals evaluated at (q, b) through its eigen records.
fn dual_update(
    q: &Potential,
    b: f64,
    records: &[EigenRecord],
    delta: &DataDelta,
) -> Result<(Vec<f64>, f64)> {
    let duals = dual_basis_from(q, b, records)?;
    let m = q.grid_size();
    let mut dq = vec![delta.dc; m + 1]; // dc * (1; 0)
    let mut db = 0.0;
    for i in 0..records.len() {
        let z = &duals[1 + 2 * i];
        let t = &duals[2 + 2 * i];
        let (cmu, cnu) = (delta.dmu[i], delta.dnu[i]);
        for j in 0..=m {
            dq[j] += cmu * z.func[j] + cnu * t.func[j];
        }
        db += cmu * z.boundary + cnu * t.boundary;
    }
    Ok((dq, db))
}

/// Reconstructs (q, b) from spectral data.
///
/// The data mismatch is mapped back through the biorthogonal duals
///     (dq; db) = dc (1; 0) + sum_m dmu_m Z_m + sum_m dnu_m T_m
/// evaluated at the current iterate. Two refinements keep the iterate from
/// drifting in the coordinates the truncated residual cannot see (a
/// second-order effect of long steps): the target is approached along a
/// straight segment in data space split into legs, and each step uses the
/// duals re-evaluated at the step midpoint. Within a leg, steps are halved
/// until the leg residual decreases.
pub fn newton_invert(
    target: &SpectralData,
    initial: Option<(Potential, f64)>,
    opts: &InvertOptions,
) -> Result<(Potential, f64, InvertDiagnostics)> {
    let BoundaryCondition::Mixed { .. } = target.bc else {
        return Err(SlError::InvalidInput(
            "Newton inversion covers the mixed family; general (a, b) is forward-only".into(),
        ));
    };
    target.validate()?;
    if target.missing_mu0() {
        return Err(SlError::InvalidInput(
            "target is missing mu_0: recover it first (recover_mu0)".into(),
        ));
    }
    let modes = target.len() + opts.guard_modes;

    // Default start: q = 0 and 2b = c, so the c-coordinate matches from the
    // outset; the first Newton step redistributes it through the (1; 0) dual.
    let (mut q, mut b) =
        initial.unwrap_or_else(|| (Potential::zero(opts.grid_size), target.c / 2.0));
    let (mut records, start_delta) =
        measure(&q, b, target.c, &target.mu, &target.dnu, modes)?;
    let res0 = start_delta.norm();
    let mut history = vec![res0];
    if res0 < opts.tol {
        return Ok((
            q,
            b,
            InvertDiagnostics {
                residuals: history,
                iterations: 0,
                converged: true,
            },
        ));
    }

    // Data of the starting iterate: the homotopy runs from here to the target.
    let start_c = q.mean() + 2.0 * b;
    let start_mu: Vec<f64> = records.iter().map(|r| r.mu).collect();
    let start_dnu: Vec<f64> = records
        .iter()
        .map(|r| r.nu - unperturbed_norming(r.n))
        .collect();

    let legs = opts
        .path_segments
        .unwrap_or_else(|| ((res0 / 0.04).ceil() as usize).clamp(1, 96));

    for leg in 1..=legs {
        let s = leg as f64 / legs as f64;
        let leg_c = start_c + s * (target.c - start_c);
        let leg_mu: Vec<f64> = start_mu
            .iter()
            .enumerate()
            .map(|(i, v)| v + s * (target.mu.get(i).copied().unwrap_or(0.0) - v))
            .collect();
        let leg_dnu: Vec<f64> = start_dnu
            .iter()
            .enumerate()
            .map(|(i, v)| v + s * (target.dnu.get(i).copied().unwrap_or(0.0) - v))
            .collect();

        let final_leg = leg == legs;
        let leg_tol = if final_leg {
            opts.tol
        } else {
            // Inner legs exist to keep the path short, not to polish.
            (opts.tol).max(1e-4 * res0 / legs as f64)
        };
        let iter_cap = if final_leg { opts.max_iter } else { 6 };

        let mut delta = measure_at(&records, &q, b, leg_c, &leg_mu, &leg_dnu);
        let mut residual = delta.norm();
        let mut stalled = false;
        for iter in 0..iter_cap {
            if residual < leg_tol {
                break;
            }
            // Provisional step from the current duals, then the real step
            // from the duals at the half-way point.
            let (dq1, db1) = dual_update(&q, b, &records, &delta)?;
            let mut update = (dq1, db1);
            if let Ok(q_half) = q.add_scaled(&update.0, 0.5) {
                let b_half = b + 0.5 * update.1;
                if let Ok(rec_half) = eigenvalues(&q_half, b_half, modes) {
                    update = dual_update(&q_half, b_half, &rec_half, &delta)?;
                }
            }
            let (dq, db) = update;

            let mut accepted = false;
            let mut step = 1.0;
            for _ in 0..=opts.max_halvings {
                let q_try = match q.add_scaled(&dq, step) {
                    Ok(qt) => qt,
                    Err(_) => {
                        step *= 0.5;
                        continue;
                    }
                };
                let b_try = b + step * db;
                // A failing forward solve means the step left the set where
                // the enumeration is clean; treat it like an increase.
                if let Ok(rec_try) = eigenvalues(&q_try, b_try, modes) {
                    let delta_try =
                        measure_at(&rec_try, &q_try, b_try, leg_c, &leg_mu, &leg_dnu);
                    let res_try = delta_try.norm();
                    if res_try < residual {
                        q = q_try;
                        b = b_try;
                        records = rec_try;
                        delta = delta_try;
                        residual = res_try;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                if final_leg {
                    return Err(SlError::NoConvergence {
                        iterations: iter,
                        residual,
                    });
                }
                stalled = true;
                break;
            }
        }
        if final_leg {
            if residual >= opts.tol {
                return Err(SlError::NoConvergence {
                    iterations: opts.max_iter,
                    residual,
                });
            }
        } else if stalled && residual > res0 {
            return Err(SlError::NoConvergence {
                iterations: leg,
                residual,
            });
        }
        // Residual against the final target after this leg.
        let to_target = measure_at(&records, &q, b, target.c, &target.mu, &target.dnu);
        history.push(to_target.norm());
    }

    let iterations = history.len() - 1;
    Ok((
        q,
        b,
        InvertDiagnostics {
            residuals: history,
            iterations,
            converged: true,
        },
    ))
}

/// Data gap of already-solved records against a target triple.
fn measure_at(
    records: &[EigenRecord],
    q: &Potential,
    b: f64,
    target_c: f64,
    target_mu: &[f64],
    target_dnu: &[f64],
) -> DataDelta {
    let c = q.mean() + 2.0 * b;
    let dmu: Vec<f64> = records
        .iter()
        .map(|r| target_mu.get(r.n).copied().unwrap_or(0.0) - r.mu)
        .collect();
    let dnu: Vec<f64> = records
        .iter()
        .map(|r| {
            target_dnu.get(r.n).copied().unwrap_or(0.0) - (r.nu - unperturbed_norming(r.n))
        })
        .collect();
    DataDelta {
        dc: target_c - c,
        dmu,
        dnu,
    }
}

/// Moves (q0, b0) to the potential whose norming-constant shifts equal
/// target_dnu, by the Darboux chain k = N-1 down to 0. Eigenvalues are
/// unchanged along the chain.
pub fn flow_norming_constants(
    q0: &Potential,
    b0: f64,
    target_dnu: &[f64],
) -> Result<(Potential, f64)> {
    if target_dnu.is_empty() {
        return Ok((q0.clone(), b0));
    }
    let current = spectral_map(q0, b0, target_dnu.len())?;
    let mut q = q0.clone();
    let mut b = b0;
    for k in (0..target_dnu.len()).rev() {
        let t = target_dnu[k] - current.dnu[k];
        if t.abs() > 1e-13 {
            let (qn, bn) = darboux_transform(&q, b, DarbouxStep { n: k, t })?;
            q = qn;
            b = bn;
        }
    }
    Ok((q, b))
}

/// The function B(c, mu_0, nu_0, ...) = sum (2 - e^{nu_n}/|W-dot(lambda_n)|)
/// of the fixed-b recovery, evaluated through the Hadamard product.
/// mu_rest = (mu_1, ..., mu_{N-1}); dnu covers all indices 0..N.
pub fn b_of_mu0(c: f64, mu0: f64, mu_rest: &[f64], dnu: &[f64]) -> Result<f64> {
    let mut mu = Vec::with_capacity(mu_rest.len() + 1);
    mu.push(mu0);
    mu.extend_from_slice(mu_rest);
    let product = HadamardProduct::new(Family::Mixed, c, mu);
    product.identity_sum(dnu, 1.0, 0, None)
}

/// Recovers the deleted mu_0 for fixed b: B is strictly decreasing in mu_0
/// on (-inf, lambda_1^0 - lambda_0^0 + mu_1) with limits +inf and -inf, so
/// B(mu_0) = b has exactly one root, found by bisection.
pub fn recover_mu0(b: f64, c: f64, mu_rest: &[f64], dnu: &[f64]) -> Result<f64> {
    if mu_rest.is_empty() {
        return Err(SlError::InvalidInput(
            "recover_mu0 needs at least mu_1".into(),
        ));
    }
    if mu_rest.len() + 1 != dnu.len() {
        return Err(SlError::InvalidInput(format!(
            "mu_rest has {} entries, expected {} (dnu length minus one)",
            mu_rest.len(),
            dnu.len() - 1
        )));
    }
    for i in 0..mu_rest.len() - 1 {
        let lower = Family::Mixed.root(i + 1) + mu_rest[i];
        let upper = Family::Mixed.root(i + 2) + mu_rest[i + 1];
        if lower >= upper {
            return Err(SlError::InterlacingViolation {
                index: i + 1,
                lower,
                upper,
            });
        }
    }
    let upper = Family::Mixed.root(1) - Family::Mixed.root(0) + mu_rest[0];
    let scale = 10.0 * (1.0 + b.abs() + c.abs());

    // B > b somewhere below (B -> +inf as mu_0 -> -inf).
    let mut lo = f64::NAN;
    let mut offset = scale;
    for _ in 0..60 {
        let cand = upper - offset;
        if b_of_mu0(c, cand, mu_rest, dnu)? > b {
            lo = cand;
            break;
        }
        offset *= 2.0;
    }
    // B < b somewhere near the open upper end (B -> -inf there).
    let mut hi = f64::NAN;
    let mut eps = scale / 2.0;
    for _ in 0..80 {
        let cand = upper - eps;
        if cand > lo && b_of_mu0(c, cand, mu_rest, dnu)? < b {
            hi = cand;
            break;
        }
        eps *= 0.5;
    }
    if lo.is_nan() || hi.is_nan() {
        return Err(SlError::NoBracket {
            what: "mu_0 recovery (B = b)".into(),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-13 * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        if b_of_mu0(c, mid, mu_rest, dnu)? > b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Recovers the deleted norming constant nu_m from the others:
///     nu_m = log|W-dot(lambda_m)| + log[2 - b + sum_{n != m} (2 - e^{nu_n}/|W-dot(lambda_n)|)].
/// nu_rest lists the shifts nu_n - nu_n^0 for n != m in increasing n.
pub fn recover_nu_m(b: f64, data: &SpectralData, m: usize, nu_rest: &[f64]) -> Result<f64> {
    if m >= data.len() {
        return Err(SlError::InvalidInput(format!(
            "index {m} outside the stored range {}",
            data.len()
        )));
    }
    if nu_rest.len() + 1 != data.len() {
        return Err(SlError::InvalidInput(format!(
            "nu_rest has {} entries, expected {}",
            nu_rest.len(),
            data.len() - 1
        )));
    }
    let product = HadamardProduct::from_data(data)?;
    let mut dnu = Vec::with_capacity(data.len());
    dnu.extend_from_slice(&nu_rest[..m]);
    dnu.push(0.0); // skipped below
    dnu.extend_from_slice(&nu_rest[m..]);

    let sum = product.identity_sum(&dnu, 1.0, 0, Some(m))?;
    let arg = 2.0 - b + sum;
    if arg <= 0.0 {
        return Err(SlError::DomainError {
            what: format!("nu_{m} recovery"),
            value: arg,
        });
    }
    Ok(product.wdot_at_root(m)?.abs().ln() + arg.ln())
}
