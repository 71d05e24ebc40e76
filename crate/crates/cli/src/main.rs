//! slspec: forward solves, identity checks, Darboux flows and inversion for
//! the Sturm-Liouville problem on [0,1] with mixed boundary conditions.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slspec_core::data::{
    read_potential_csv, read_spectral, write_potential_csv, write_spectral,
};
use slspec_core::inverse::{newton_invert, recover_mu0, InvertOptions};
use slspec_core::{general_bc, spectrum, BoundaryCondition, SlError, SpectralData};

#[derive(Parser)]
#[command(name = "slspec", version, about)]
struct Cli {
    /// Worker threads for the eigenvalue searches (defaults to all cores).
    #[arg(long, global = true, env = "SLSPEC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem and write the SpectralData JSON.
    Forward(ForwardArgs),
    /// Evaluate the trace identity residual(s) for a potential.
    Identity(IdentityArgs),
    /// Apply one Darboux step, shifting a single norming constant.
    Darboux(DarbouxArgs),
    /// Reconstruct the potential from SpectralData JSON.
    Invert(InvertArgs),
}

#[derive(Args)]
struct ForwardArgs {
    /// Potential CSV (header `x,q`, uniform nodes on [0,1]).
    #[arg(long)]
    potential: PathBuf,
    /// Boundary constant b in psi'(1) + b psi(1) = 0.
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    /// Left boundary constant a, or "inf" for psi(0) = 0 (the default).
    #[arg(long, default_value = "inf", allow_hyphen_values = true)]
    a: String,
    /// Number of eigenvalues.
    #[arg(long, short = 'n')]
    n: usize,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IdentityArgs {
    #[arg(long)]
    potential: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    /// Left boundary constant a, or "inf" (default): selects which identity
    /// family is checked.
    #[arg(long, default_value = "inf", allow_hyphen_values = true)]
    a: String,
    /// Number of terms computed before the fitted tail.
    #[arg(long, short = 'n')]
    n: usize,
    /// Write the per-term decay table as tidy CSV.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct DarbouxArgs {
    #[arg(long)]
    potential: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    /// Index n of the norming constant to shift.
    #[arg(long)]
    index: usize,
    /// Shift t applied to nu_n.
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    /// Output CSV for the transformed potential.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InvertArgs {
    /// SpectralData JSON (bc.a must be "inf"; inversion covers the mixed family).
    #[arg(long)]
    data: PathBuf,
    /// Output CSV for the recovered potential.
    #[arg(long)]
    out: PathBuf,
    /// Treat b as known. The JSON may then carry mu starting at mu_1
    /// (one entry shorter than dnu); mu_0 is recovered first.
    #[arg(long, allow_negative_numbers = true)]
    b_fixed: Option<f64>,
    #[arg(long, default_value_t = 40)]
    max_iter: usize,
}

/// Exit codes: 2 malformed input, 3 solver failure, 4 no convergence.
fn exit_code_for(err: &SlError) -> u8 {
    match err {
        SlError::InvalidInput(_)
        | SlError::Io(_)
        | SlError::Csv(_)
        | SlError::Json(_)
        | SlError::InterlacingViolation { .. } => 2,
        SlError::NoConvergence { .. } => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    // Die quietly when the downstream pipe closes, like any Unix filter.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn parse_a(text: &str) -> Result<Option<f64>, SlError> {
    if text.eq_ignore_ascii_case("inf") {
        return Ok(None);
    }
    text.parse::<f64>().map(Some).map_err(|_| {
        SlError::InvalidInput(format!("--a must be a number or \"inf\", got {text:?}"))
    })
}

fn run(command: Command) -> Result<(), SlError> {
    match command {
        Command::Forward(args) => forward(args),
        Command::Identity(args) => identity(args),
        Command::Darboux(args) => darboux_cmd(args),
        Command::Invert(args) => invert(args),
    }
}

fn forward(args: ForwardArgs) -> Result<(), SlError> {
    let q = read_potential_csv(&args.potential)?;
    match parse_a(&args.a)? {
        None => {
            let records = spectrum::eigenvalues(&q, args.b, args.n)?;
            println!("{:>4} {:>22} {:>22}", "n", "lambda_n", "nu_n");
            for r in &records {
                println!("{:>4} {:>22.15e} {:>22.15e}", r.n, r.lambda, r.nu);
            }
            let data = spectrum::spectral_map(&q, args.b, args.n)?;
            write_spectral(&args.out, &data)?;
        }
        Some(a) => {
            let records = general_bc::general_eigen(&q, a, args.b, args.n)?;
            println!("{:>4} {:>22} {:>22}", "n", "sigma_n", "kappa_n");
            for r in &records {
                println!("{:>4} {:>22.15e} {:>22.15e}", r.n, r.sigma, r.kappa);
            }
            let data = general_bc::general_spectral_map(&q, a, args.b, args.n)?;
            write_spectral(&args.out, &data)?;
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn identity(args: IdentityArgs) -> Result<(), SlError> {
    let q = read_potential_csv(&args.potential)?;
    match parse_a(&args.a)? {
        None => {
            let records = spectrum::eigenvalues(&q, args.b, args.n)?;
            let terms = spectrum::identity_terms(&records);
            let residual =
                args.b - terms.iter().sum::<f64>() - spectrum::tail_estimate(&terms);
            println!("residual = {residual:.6e}");
            if let Some(path) = &args.plot {
                let mut wtr = plot::writer(path)?;
                wtr.push_record(&["n", "lambda", "nu", "wdot", "term"]);
                for (r, t) in records.iter().zip(&terms) {
                    wtr.push_record(&[
                        r.n.to_string(),
                        format!("{:.17e}", r.lambda),
                        format!("{:.17e}", r.nu),
                        format!("{:.17e}", r.wdot),
                        format!("{:.17e}", t),
                    ]);
                }
                wtr.finish()?;
                println!("wrote {}", path.display());
            }
        }
        Some(a) => {
            let (res_b, res_a) = general_bc::general_identity_residuals(&q, a, args.b, args.n)?;
            println!("residual_b = {res_b:.6e}");
            println!("residual_a = {res_a:.6e}");
            if let Some(path) = &args.plot {
                let records = general_bc::general_eigen(&q, a, args.b, args.n)?;
                let mut wtr = plot::writer(path)?;
                wtr.push_record(&["n", "sigma", "kappa", "wdot", "term_b", "term_a"]);
                for r in &records {
                    wtr.push_record(&[
                        r.n.to_string(),
                        format!("{:.17e}", r.sigma),
                        format!("{:.17e}", r.kappa),
                        format!("{:.17e}", r.wdot),
                        format!("{:.17e}", 2.0 - r.kappa.exp() / r.wdot.abs()),
                        format!("{:.17e}", 2.0 - (-r.kappa).exp() / r.wdot.abs()),
                    ]);
                }
                wtr.finish()?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn darboux_cmd(args: DarbouxArgs) -> Result<(), SlError> {
    let q = read_potential_csv(&args.potential)?;
    let (q2, b2) = slspec_core::darboux::darboux_transform(
        &q,
        args.b,
        slspec_core::darboux::DarbouxStep {
            n: args.index,
            t: args.t,
        },
    )?;
    write_potential_csv(&args.out, &q2)?;
    println!("b = {b2:.17e}");
    println!("wrote {}", args.out.display());
    Ok(())
}

fn invert(args: InvertArgs) -> Result<(), SlError> {
    let mut data = read_spectral(&args.data)?;
    let BoundaryCondition::Mixed { .. } = data.bc else {
        return Err(SlError::InvalidInput(
            "inversion covers bc.a = \"inf\"; general (a, b) data is forward-only".into(),
        ));
    };
    if let Some(b_fixed) = args.b_fixed {
        if data.missing_mu0() {
            let mu0 = recover_mu0(b_fixed, data.c, &data.mu, &data.dnu)?;
            println!("recovered mu_0 = {mu0:.17e}");
            let mut mu = vec![mu0];
            mu.extend_from_slice(&data.mu);
            data = SpectralData { mu, ..data };
            data.validate()?;
        }
    } else if data.missing_mu0() {
        return Err(SlError::InvalidInput(
            "mu is one entry short; pass --b-fixed to recover mu_0".into(),
        ));
    }
    let opts = InvertOptions {
        max_iter: args.max_iter,
        ..InvertOptions::default()
    };
    let (q, b, diag) = newton_invert(&data, None, &opts)?;
    println!("b = {b:.17e}");
    print!("residuals:");
    for r in &diag.residuals {
        print!(" {r:.3e}");
    }
    println!();
    println!(
        "converged = {} after {} iterations",
        diag.converged, diag.iterations
    );
    write_potential_csv(&args.out, &q)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

/// Minimal tidy-CSV writer for the --plot tables.
mod plot {
    use slspec_core::SlError;
    use std::io::Write;
    use std::path::Path;

    pub struct PlotWriter {
        file: std::fs::File,
    }

    pub fn writer(path: &Path) -> Result<PlotWriter, SlError> {
        Ok(PlotWriter {
            file: std::fs::File::create(path)?,
        })
    }

    impl PlotWriter {
        pub fn push_record<S: AsRef<str>>(&mut self, fields: &[S]) {
            let line = fields
                .iter()
                .map(|f| f.as_ref().to_string())
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(self.file, "{line}");
        }

        pub fn finish(&mut self) -> Result<(), SlError> {
            self.file.flush()?;
            Ok(())
        }
    }
}
