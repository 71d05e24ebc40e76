//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured figure next to its tolerance.

use std::f64::consts::PI;
use std::time::Instant;

use slspec_core::darboux::{darboux_transform, DarbouxStep};
use slspec_core::frechet::{
    dual_basis_from, gradient_rows_from, lambda_row, mu_row, nu_row, pairing,
};
use slspec_core::general_bc::{
    f_and_g, general_eigen, general_identity_residuals, general_spectral_map,
    recover_tau0_kappa0,
};
use slspec_core::inverse::{
    b_of_mu0, newton_invert, recover_mu0, recover_nu_m, InvertOptions,
};
use slspec_core::potential::{quadrature, Potential};
use slspec_core::shooting::{solve_backward, solve_forward};
use slspec_core::spectrum::{
    count_roots, eigenvalues, identity_residual, spectral_map, unperturbed_eigenvalue,
    unperturbed_norming,
};

fn report(criterion: usize, ok: bool, detail: &str) {
    println!(
        "acceptance {criterion:02}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn l2_gap(a: &Potential, b: &Potential) -> f64 {
    let d: Vec<f64> = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y) * (x - y))
        .collect();
    quadrature(&d, a.step()).sqrt()
}

#[test]
fn criterion_01_unperturbed_spectrum() {
    let start = Instant::now();
    let q = Potential::zero(1024);
    let records = eigenvalues(&q, 0.0, 50).unwrap();
    let lambda_err = records
        .iter()
        .map(|r| (r.lambda - unperturbed_eigenvalue(r.n)).abs())
        .fold(0.0, f64::max);
    let nu_err = records
        .iter()
        .map(|r| (r.nu - unperturbed_norming(r.n)).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    report(
        1,
        lambda_err < 1e-8 && nu_err < 1e-8 && elapsed.as_secs_f64() < 5.0,
        &format!(
            "max |lambda - lambda0| = {lambda_err:.2e}, max |nu - nu0| = {nu_err:.2e}, {elapsed:.2?} < 5 s"
        ),
    );
}

#[test]
fn criterion_02_trace_identity() {
    let cases: Vec<(&str, Potential)> = vec![
        ("0", Potential::zero(1024)),
        ("const", Potential::constant(2.0, 1024)),
        ("cos(pi x)", Potential::from_fn(|x| (PI * x).cos())),
        (
            "0.5 cos(2 pi x)",
            Potential::from_fn(|x| 0.5 * (2.0 * PI * x).cos()),
        ),
    ];
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for (_, q) in &cases {
        for b in [0.0, 0.7, -0.7] {
            let t0 = Instant::now();
            let res = identity_residual(q, b, 200).unwrap();
            slowest = slowest.max(t0.elapsed().as_secs_f64());
            worst = worst.max(res.abs());
        }
    }
    report(
        2,
        worst < 1e-5 && slowest < 60.0,
        &format!("12 cases, max |residual| = {worst:.2e} < 1e-5, slowest case {slowest:.2} s < 60 s"),
    );
}

#[test]
fn criterion_03_general_identities() {
    let cases: Vec<Potential> = vec![
        Potential::zero(1024),
        Potential::constant(2.0, 1024),
        Potential::from_fn(|x| (PI * x).cos()),
        Potential::from_fn(|x| 0.5 * (2.0 * PI * x).cos()),
    ];
    let mut worst = 0.0f64;
    for q in &cases {
        for (a, b) in [(0.0, 0.0), (0.3, -0.2)] {
            let (rb, ra) = general_identity_residuals(q, a, b, 200).unwrap();
            worst = worst.max(rb.abs()).max(ra.abs());
        }
    }
    // even potential with a = b: all kappa_n vanish
    let qe = Potential::from_fn(|x| (2.0 * PI * x).cos());
    let recs = general_eigen(&qe, 0.5, 0.5, 40).unwrap();
    let kappa_max = recs.iter().map(|r| r.kappa.abs()).fold(0.0, f64::max);
    let (rb, ra) = general_identity_residuals(&qe, 0.5, 0.5, 200).unwrap();
    worst = worst.max(rb.abs()).max(ra.abs());
    report(
        3,
        worst < 1e-5 && kappa_max < 1e-7,
        &format!("max |residual| = {worst:.2e} < 1e-5, even-q max |kappa| = {kappa_max:.2e} < 1e-7"),
    );
}

#[test]
fn criterion_04_norm_identities() {
    let cases: Vec<(Potential, f64)> = vec![
        (Potential::from_fn(|x| (PI * x).cos()), 0.4),
        (
            Potential::from_fn(|x| 0.5 * (2.0 * PI * x).cos() - 0.3 * (PI * x).sin()),
            -0.6,
        ),
    ];
    let mut worst = 0.0f64;
    for (q, b) in &cases {
        let h = q.step();
        let records = eigenvalues(q, *b, 21).unwrap();
        for r in &records {
            let sol = solve_forward(q, r.lambda).unwrap();
            let xi = solve_backward(q, *b, r.lambda).unwrap();
            let sign = if r.n % 2 == 0 { -1.0 } else { 1.0 }; // (-1)^{n+1}
            let phi_sq: Vec<f64> = sol.phi.iter().map(|v| v * v).collect();
            let xi_sq: Vec<f64> = xi.xi.iter().map(|v| v * v).collect();
            let e1 = (quadrature(&phi_sq, h) - sign * r.nu.exp() * r.wdot).abs();
            let e2 = (quadrature(&xi_sq, h) - sign * (-r.nu).exp() * r.wdot).abs();
            let e3 = (0..sol.phi.len())
                .map(|j| (r.psi[j] * r.psi[j] - sol.phi[j] * xi.xi[j] / r.wdot).abs())
                .fold(0.0, f64::max);
            worst = worst.max(e1).max(e2).max(e3);
        }
    }
    report(
        4,
        worst < 1e-7,
        &format!("two (q, b), n <= 20: max identity deviation = {worst:.2e} < 1e-7"),
    );
}

#[test]
fn criterion_05_gradient_finite_differences() {
    // Strongly nonlinear base point and a large direction: the quadratic
    // remainder of the central difference must clear the f64 noise floor
    // for the order to be observable.
    let q = Potential::from_fn(|x| 1.2 * (2.0 * PI * x).cos() + 0.8 * (PI * x).sin());
    let b = 0.6;
    let dir_p: Vec<f64> = (0..=q.grid_size())
        .map(|j| {
            let x = j as f64 / q.grid_size() as f64;
            6.0 * (3.0 * PI * x).sin() + 2.5 * (PI * x).cos()
        })
        .collect();
    let dir_h = 4.0;
    let h_grid = q.step();
    let modes = 4;
    let records = eigenvalues(&q, b, modes).unwrap();

    let fd_values = |h: f64| -> Vec<[f64; 3]> {
        let qp = q.add_scaled(&dir_p, h).unwrap();
        let qm = q.add_scaled(&dir_p, -h).unwrap();
        let rp = eigenvalues(&qp, b + h * dir_h, modes).unwrap();
        let rm = eigenvalues(&qm, b - h * dir_h, modes).unwrap();
        (0..modes)
            .map(|n| {
                [
                    (rp[n].lambda - rm[n].lambda) / (2.0 * h),
                    (rp[n].mu - rm[n].mu) / (2.0 * h),
                    (rp[n].nu - rm[n].nu) / (2.0 * h),
                ]
            })
            .collect()
    };
    let fd3 = fd_values(1e-3);
    let fd4 = fd_values(1e-4);

    let mut min_order = f64::INFINITY;
    for n in 0..modes {
        let rows = [
            lambda_row(&records[n]),
            mu_row(&records[n]),
            nu_row(&q, b, &records[n]).unwrap(),
        ];
        for (k, row) in rows.iter().enumerate() {
            let predicted = pairing(&row.func, row.boundary, &dir_p, dir_h, h_grid);
            let e3 = (fd3[n][k] - predicted).abs();
            let e4 = (fd4[n][k] - predicted).abs();
            let order = (e3 / e4).log10();
            min_order = min_order.min(order);
        }
    }
    report(
        5,
        min_order >= 1.9,
        &format!("12 rows (lambda/mu/nu, n <= 3): min observed order = {min_order:.2} >= 1.9"),
    );
}

#[test]
fn criterion_06_biorthogonality() {
    let q = Potential::from_fn(|x| 0.4 * (PI * x).cos() + 0.2 * (2.0 * PI * x).sin());
    let b = 0.3;
    let records = eigenvalues(&q, b, 11).unwrap();
    let rows = gradient_rows_from(&q, b, &records).unwrap();
    let duals = dual_basis_from(&q, b, &records).unwrap();
    let h = q.step();
    let mut worst = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        for (j, dual) in duals.iter().enumerate() {
            let g = pairing(&row.func, row.boundary, &dual.func, dual.boundary, h);
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - expected).abs());
        }
    }
    report(
        6,
        worst < 1e-5,
        &format!("Gram vs identity, indices <= 10: max deviation = {worst:.2e} < 1e-5"),
    );
}

#[test]
fn criterion_07_darboux_invariance() {
    let q = Potential::from_fn(|x| 0.5 * (PI * x).cos());
    let b = 0.3;
    let before = eigenvalues(&q, b, 16).unwrap();
    let mut worst_lambda = 0.0f64;
    let mut worst_nu = 0.0f64;
    let mut worst_restore = 0.0f64;
    for n in [0usize, 3] {
        for t in [0.5, -0.5, 2.0] {
            let (q2, b2) = darboux_transform(&q, b, DarbouxStep { n, t }).unwrap();
            let after = eigenvalues(&q2, b2, 16).unwrap();
            for (x, y) in before.iter().zip(&after) {
                worst_lambda = worst_lambda.max((x.lambda - y.lambda).abs());
                let shift = if x.n == n { t } else { 0.0 };
                worst_nu = worst_nu.max((y.nu - x.nu - shift).abs());
            }
            let (q3, b3) = darboux_transform(&q2, b2, DarbouxStep { n, t: -t }).unwrap();
            worst_restore = worst_restore.max(l2_gap(&q3, &q) + (b3 - b).abs());
        }
    }
    report(
        7,
        worst_lambda < 1e-7 && worst_nu < 1e-6 && worst_restore < 1e-6,
        &format!(
            "max |dlambda| = {worst_lambda:.2e} < 1e-7, max nu-shift error = {worst_nu:.2e} < 1e-6, round trip = {worst_restore:.2e} < 1e-6"
        ),
    );
}

#[test]
fn criterion_08_inversion_round_trip() {
    let start = Instant::now();
    // The truncation length follows the decay of the discarded data tail:
    // the sine component only reaches mu_k ~ 0.1/k^2, so its case needs a
    // longer record for the zero-tail model to sit below the tolerance.
    let cases: Vec<(Potential, f64, usize)> = vec![
        (Potential::from_fn(|x| 0.3 * (PI * x).cos()), 0.2, 60),
        (
            Potential::from_fn(|x| 0.4 * (PI * x).cos() + 0.3 * (2.0 * PI * x).sin()),
            -0.35,
            140,
        ),
    ];
    let mut worst = 0.0f64;
    let mut monotone = true;
    for (q_src, b_src, modes) in &cases {
        let target = spectral_map(q_src, *b_src, *modes).unwrap();
        let (q_rec, b_rec, diag) =
            newton_invert(&target, None, &InvertOptions::default()).unwrap();
        let gap = l2_gap(&q_rec, q_src) + (b_rec - b_src).abs();
        worst = worst.max(gap);
        monotone &= diag.residuals.windows(2).all(|w| w[1] < w[0]);
    }
    let elapsed = start.elapsed();
    report(
        8,
        worst < 1e-4 && monotone && elapsed.as_secs_f64() < 300.0,
        &format!(
            "max L2 x R gap = {worst:.2e} < 1e-4, residuals strictly decreasing = {monotone}, {elapsed:.1?} < 5 min"
        ),
    );
}

#[test]
fn criterion_09_scalar_recoveries() {
    // recover_mu0 against the forward oracle
    let q1 = Potential::from_fn(|x| 0.5 * (PI * x).cos());
    let d1 = spectral_map(&q1, 0.0, 30).unwrap();
    let mu0 = recover_mu0(0.0, d1.c, &d1.mu[1..], &d1.dnu).unwrap();
    let e_mu0 = (mu0 - d1.mu[0]).abs();

    // recover_nu_m against the forward oracle
    let q2 = Potential::from_fn(|x| 0.3 * (2.0 * PI * x).cos());
    let d2 = spectral_map(&q2, 0.4, 30).unwrap();
    let m = 2usize;
    let nu_rest: Vec<f64> = d2
        .dnu
        .iter()
        .enumerate()
        .filter(|(n, _)| *n != m)
        .map(|(_, v)| *v)
        .collect();
    let nu_m = recover_nu_m(0.4, &d2, m, &nu_rest).unwrap();
    let e_num = (nu_m - (d2.dnu[m] + unperturbed_norming(m))).abs();

    // recover_tau0_kappa0 against the forward oracle
    let q3 = Potential::from_fn(|x| 0.4 * (PI * x).cos());
    let (a3, b3) = (0.2, -0.1);
    let d3 = general_spectral_map(&q3, a3, b3, 30).unwrap();
    let (tau0, kappa0) = recover_tau0_kappa0(a3, b3, d3.c, &d3.mu[1..], &d3.dnu[1..]).unwrap();
    let e_tk = (tau0 - d3.mu[0]).abs().max((kappa0 - d3.dnu[0]).abs());

    // monotonicity scan of B in mu_0 on the admissible interval
    let upper_b = unperturbed_eigenvalue(1) - unperturbed_eigenvalue(0) + d1.mu[1];
    let mut b_monotone = true;
    let mut prev = f64::INFINITY;
    for i in 0..50 {
        let cand = upper_b - 25.0 + (i as f64 + 0.5) * 0.49;
        let val = b_of_mu0(d1.c, cand, &d1.mu[1..], &d1.dnu).unwrap();
        b_monotone &= val < prev;
        prev = val;
    }

    // monotonicity of F^2 (increasing) and G (decreasing) below tau*
    let upper_t = PI * PI + d3.mu[1];
    let g_root = |which: i32| -> f64 {
        let g = |t: f64| {
            let (_, gm, gp) = f_and_g(d3.c, t, &d3.mu[1..], &d3.dnu[1..]).unwrap();
            if which < 0 {
                a3 + gm
            } else {
                b3 + gp
            }
        };
        let (mut lo, mut hi) = (upper_t - 200.0, upper_t - 1e-6);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let t_star = g_root(-1).min(g_root(1));
    let mut fg_monotone = true;
    let (mut prev_f2, mut prev_g) = (-f64::INFINITY, f64::INFINITY);
    for i in 0..50 {
        let t0 = t_star - 25.0 + (i as f64 + 0.5) * 0.5;
        let (f, gm, gp) = f_and_g(d3.c, t0, &d3.mu[1..], &d3.dnu[1..]).unwrap();
        let g = (a3 + gm) * (b3 + gp);
        fg_monotone &= f * f > prev_f2 && g < prev_g;
        prev_f2 = f * f;
        prev_g = g;
    }

    let worst = e_mu0.max(e_num).max(e_tk);
    report(
        9,
        worst < 1e-5 && b_monotone && fg_monotone,
        &format!(
            "recovery errors: mu0 {e_mu0:.2e}, nu_m {e_num:.2e}, (tau0, kappa0) {e_tk:.2e} < 1e-5; scans monotone = {}",
            b_monotone && fg_monotone
        ),
    );
}

#[test]
fn criterion_10_root_count_certificates() {
    let cases: Vec<(Potential, f64, usize)> = vec![
        (Potential::zero(512), 0.0, 10),
        (Potential::constant(1.0, 512), 0.0, 12),
        (
            Potential::from_fn_on(|x| (2.0 * PI * x).cos(), 512),
            -1.0,
            15,
        ),
    ];
    let mut ok = true;
    let mut detail = String::new();
    for (q, b, n) in &cases {
        let counted = count_roots(q, *b, *n).unwrap();
        // cross-validate against the enumeration: exactly the first N roots
        // lie inside the disc of radius pi^2 N^2
        let records = eigenvalues(q, *b, n + 1).unwrap();
        let radius = (PI * *n as f64).powi(2);
        let inside = records.iter().filter(|r| r.lambda.abs() < radius).count();
        ok &= counted == *n && inside == *n;
        detail.push_str(&format!("N={n}: count={counted}, enumerated inside={inside}; "));
    }
    report(10, ok, detail.trim_end_matches("; "));
}
