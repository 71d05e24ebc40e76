//! Spectrum, norming constants, the paired trace identities and the
//! index-0 recovery for the general boundary conditions
//! psi'(0) - a psi(0) = 0, psi'(1) + b psi(1) = 0.
//!
//! Here sigma_n^0 = pi^2 n^2, the Wronskian is
//! (theta' + a phi' + b (theta + a phi))(1, lambda) and the norming
//! constants are kappa_n = log[(-1)^n (theta + a phi)(1, sigma_n)]. The
//! identities link both boundary constants to the spectral data:
//!     -1 + sum (2 - e^{+kappa_n}/|w-dot(sigma_n)|) = b,
//!     -1 + sum (2 - e^{-kappa_n}/|w-dot(sigma_n)|) = a.

use rayon::prelude::*;

use crate::data::{BoundaryCondition, SpectralData};
use crate::error::{Result, SlError};
use crate::hadamard::{Family, HadamardProduct};
use crate::potential::Potential;
use crate::rootfind::find_root_indexed;
use crate::shooting::{lambda_guard, Shooter};
use crate::spectrum::tail_estimate_offset;

/// One spectral record of the general family:
/// tau_n = sigma_n - sigma_n^0 - Q_0 - 2a - 2b.
#[derive(Debug, Clone, Copy)]
pub struct GeneralEigenRecord {
    pub n: usize,
    pub sigma: f64,
    pub kappa: f64,
    pub wdot: f64,
    pub tau: f64,
}

/// sigma_n^0 = pi^2 n^2.
pub fn unperturbed_sigma(n: usize) -> f64 {
    Family::General.root(n)
}

/// General Wronskian and its lambda-derivative at one lambda.
pub fn general_wronskian(q: &Potential, a: f64, b: f64, lambda: f64) -> Result<(f64, f64)> {
    let shooter = Shooter::new(q);
    lambda_guard(q.l2_norm(), a.abs() + b.abs(), lambda)?;
    general_wronskian_on(&shooter, a, b, lambda)
}

fn general_wronskian_on(shooter: &Shooter, a: f64, b: f64, lambda: f64) -> Result<(f64, f64)> {
    let st = shooter.endpoint(lambda)?;
    let w = st[1] + a * st[3] + b * (st[0] + a * st[2]);
    let wd = st[5] + a * st[7] + b * (st[4] + a * st[6]);
    Ok((w, wd))
}

/// Enumerates the N lowest eigenvalues sigma_n with their norming constants
/// kappa_n and Wronskian derivatives.
pub fn general_eigen(
    q: &Potential,
    a: f64,
    b: f64,
    count: usize,
) -> Result<Vec<GeneralEigenRecord>> {
    if count == 0 {
        return Err(SlError::InvalidInput("eigenvalue count must be >= 1".into()));
    }
    let shooter = Shooter::new(q);
    let q_norm = q.l2_norm();
    let c = q.mean() + 2.0 * a + 2.0 * b;
    let eval = |lam: f64| -> Result<(f64, f64)> {
        lambda_guard(q_norm, a.abs() + b.abs(), lam)?;
        general_wronskian_on(&shooter, a, b, lam)
    };
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let roots: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|n| {
            let seed = unperturbed_sigma(n) + c;
            let gap = pi2 * (n as f64 + 1.0) / 2.0;
            find_root_indexed(&eval, n, seed, gap)
        })
        .collect::<Result<_>>()?;
    for i in 0..count - 1 {
        if roots[i] >= roots[i + 1] {
            return Err(SlError::MultipleRootSuspect { index: i });
        }
    }
    roots
        .into_par_iter()
        .enumerate()
        .map(|(n, sigma)| {
            let st = shooter.endpoint(sigma)?;
            let wdot = st[5] + a * st[7] + b * (st[4] + a * st[6]);
            let boundary_value = st[0] + a * st[2]; // (theta + a phi)(1)
            let signed = if n % 2 == 0 { boundary_value } else { -boundary_value };
            if signed <= 0.0 {
                return Err(SlError::SignError {
                    index: n,
                    value: signed,
                });
            }
            Ok(GeneralEigenRecord {
                n,
                sigma,
                kappa: signed.ln(),
                wdot,
                tau: sigma - unperturbed_sigma(n) - c,
            })
        })
        .collect()
}

/// Spectral data document for the general family: mu carries tau and dnu
/// carries kappa (kappa_n^0 = 0).
pub fn general_spectral_map(q: &Potential, a: f64, b: f64, count: usize) -> Result<SpectralData> {
    let records = general_eigen(q, a, b, count)?;
    Ok(SpectralData {
        c: q.mean() + 2.0 * a + 2.0 * b,
        mu: records.iter().map(|r| r.tau).collect(),
        dnu: records.iter().map(|r| r.kappa).collect(),
        bc: BoundaryCondition::General { a, b },
    })
}

/// Residuals (for b and for a) of the paired trace identities, with the
/// same fitted-tail closure as the mixed case.
pub fn general_identity_residuals(
    q: &Potential,
    a: f64,
    b: f64,
    count: usize,
) -> Result<(f64, f64)> {
    let records = general_eigen(q, a, b, count)?;
    let terms_b: Vec<f64> = records
        .iter()
        .map(|r| 2.0 - r.kappa.exp() / r.wdot.abs())
        .collect();
    let terms_a: Vec<f64> = records
        .iter()
        .map(|r| 2.0 - (-r.kappa).exp() / r.wdot.abs())
        .collect();
    let sum_b = -1.0 + terms_b.iter().sum::<f64>() + tail_estimate_offset(&terms_b, 0.0);
    let sum_a = -1.0 + terms_a.iter().sum::<f64>() + tail_estimate_offset(&terms_a, 0.0);
    Ok((b - sum_b, a - sum_a))
}

/// F = 1/|W-dot(sigma_0)| and G_{-}, G_{+} of the recovery scheme, as
/// functions of the candidate tau_0 with the rest of the data fixed.
pub fn f_and_g(
    c: f64,
    tau0: f64,
    tau_rest: &[f64],
    kappa_rest: &[f64],
) -> Result<(f64, f64, f64)> {
    let mut tau = Vec::with_capacity(tau_rest.len() + 1);
    tau.push(tau0);
    tau.extend_from_slice(tau_rest);
    let mut kappa = Vec::with_capacity(kappa_rest.len() + 1);
    kappa.push(0.0); // placeholder, index 0 never read below
    kappa.extend_from_slice(kappa_rest);

    let product = HadamardProduct::new(Family::General, c, tau);
    let f = 1.0 / product.wdot_at_root(0)?.abs();
    let g_minus = -1.0 - product.identity_sum(&kappa, -1.0, 1, None)?;
    let g_plus = -1.0 - product.identity_sum(&kappa, 1.0, 1, None)?;
    Ok((f, g_minus, g_plus))
}

/// Recovers the deleted (tau_0, kappa_0) from the remaining data by solving
/// e^{-kappa_0} F + G_- = -a and e^{kappa_0} F + G_+ = -b: first the roots
/// of a + G_- and b + G_+ bound the admissible interval, then
/// F^2 = (a + G_-)(b + G_+) is solved by bisection and kappa_0 follows.
pub fn recover_tau0_kappa0(
    a: f64,
    b: f64,
    c: f64,
    tau_rest: &[f64],
    kappa_rest: &[f64],
) -> Result<(f64, f64)> {
    if tau_rest.is_empty() || tau_rest.len() != kappa_rest.len() {
        return Err(SlError::InvalidInput(
            "tau_rest and kappa_rest must be non-empty and equally long".into(),
        ));
    }
    for i in 0..tau_rest.len() - 1 {
        let lower = unperturbed_sigma(i + 1) + tau_rest[i];
        let upper = unperturbed_sigma(i + 2) + tau_rest[i + 1];
        if lower >= upper {
            return Err(SlError::InterlacingViolation {
                index: i + 1,
                lower,
                upper,
            });
        }
    }
    let upper = unperturbed_sigma(1) + tau_rest[0]; // tau_0 < pi^2 + tau_1
    let scale = 10.0 * (1.0 + a.abs() + b.abs() + c.abs());

    // Roots of a + G_- and b + G_+ (both increasing in tau_0).
    let root_of = |offset: f64, sign: f64| -> Result<f64> {
        let g_at = |t0: f64| -> Result<f64> {
            let (_, gm, gp) = f_and_g(c, t0, tau_rest, kappa_rest)?;
            Ok(offset + if sign < 0.0 { gm } else { gp })
        };
        monotone_root(&g_at, upper, scale, "G root in tau_0 recovery")
    };
    let t_minus = root_of(a, -1.0)?;
    let t_plus = root_of(b, 1.0)?;
    let t_star = t_minus.min(t_plus);

    // D = F^2 - (a + G_-)(b + G_+) is increasing on (-inf, t_star) and
    // crosses zero exactly once.
    let d_at = |t0: f64| -> Result<f64> {
        let (f, gm, gp) = f_and_g(c, t0, tau_rest, kappa_rest)?;
        Ok(f * f - (a + gm) * (b + gp))
    };
    let tau0 = monotone_root(&d_at, t_star, scale, "F^2 = G in tau_0 recovery")?;

    let (f, gm, _) = f_and_g(c, tau0, tau_rest, kappa_rest)?;
    let ratio = -f / (a + gm);
    if ratio.is_nan() || ratio <= 0.0 {
        return Err(SlError::DomainError {
            what: "kappa_0 recovery".into(),
            value: ratio,
        });
    }
    Ok((tau0, ratio.ln()))
}

/// Root of an increasing function on (-inf, upper): the lower end expands
/// downward by doubling until the sign goes negative, the upper end creeps
/// toward the open boundary until positive, then plain bisection.
fn monotone_root(
    f: &dyn Fn(f64) -> Result<f64>,
    upper: f64,
    scale: f64,
    what: &str,
) -> Result<f64> {
    let mut lo = f64::NAN;
    let mut offset = scale;
    for _ in 0..60 {
        let cand = upper - offset;
        if f(cand)? < 0.0 {
            lo = cand;
            break;
        }
        offset *= 2.0;
    }
    if lo.is_nan() {
        return Err(SlError::NoBracket { what: what.into() });
    }
    let mut hi = f64::NAN;
    let mut eps = scale / 2.0;
    for _ in 0..80 {
        let cand = upper - eps;
        if cand > lo && f(cand)? > 0.0 {
            hi = cand;
            break;
        }
        eps *= 0.5;
    }
    if hi.is_nan() {
        return Err(SlError::NoBracket { what: what.into() });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-13 * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
