//! On-disk formats: the SpectralData JSON document and the potential CSV.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SlError};
use crate::potential::{Potential, MIN_GRID};

/// Boundary data: `b` alone (a = infinity) or the pair `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// psi(0) = 0, psi'(1) + b psi(1) = 0.
    Mixed { b: f64 },
    /// psi'(0) - a psi(0) = 0, psi'(1) + b psi(1) = 0.
    General { a: f64, b: f64 },
}

impl BoundaryCondition {
    pub fn b(&self) -> f64 {
        match self {
            Self::Mixed { b } | Self::General { b, .. } => *b,
        }
    }

    /// Unperturbed eigenvalue for this boundary family.
    pub fn unperturbed(&self, n: usize) -> f64 {
        let pi = std::f64::consts::PI;
        match self {
            Self::Mixed { .. } => {
                let k = pi * (n as f64 + 0.5);
                k * k
            }
            Self::General { .. } => {
                let k = pi * n as f64;
                k * k
            }
        }
    }

    /// Unperturbed norming constant (nu_n^0 = -log k_n^0, or 0 for the
    /// general family where kappa_n^0 = 0).
    pub fn unperturbed_norming(&self, n: usize) -> f64 {
        match self {
            Self::Mixed { .. } => -(std::f64::consts::PI * (n as f64 + 0.5)).ln(),
            Self::General { .. } => 0.0,
        }
    }
}

/// Truncated coordinates of the spectral map: c = Q_0 + 2b (plus 2a for the
/// general family), the eigenvalue remainders and the norming-constant
/// shifts. Entries beyond the stored range are taken as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub c: f64,
    pub mu: Vec<f64>,
    pub dnu: Vec<f64>,
    pub bc: BoundaryCondition,
}

impl SpectralData {
    /// Truncation length N.
    pub fn len(&self) -> usize {
        self.dnu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dnu.is_empty()
    }

    /// True when the mu sequence is one entry short (index 0 deleted, the
    /// fixed-b reconstruction shape).
    pub fn missing_mu0(&self) -> bool {
        self.mu.len() + 1 == self.dnu.len()
    }

    /// The stored eigenvalue lambda_n = lambda_n^0 + c + mu_n.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.bc.unperturbed(n) + self.c + self.mu[n]
    }

    /// Checks finiteness, shape and strict interlacing.
    pub fn validate(&self) -> Result<()> {
        if self.dnu.is_empty() {
            return Err(SlError::InvalidInput("empty spectral data".into()));
        }
        if self.mu.len() != self.dnu.len() && !self.missing_mu0() {
            return Err(SlError::InvalidInput(format!(
                "mu has {} entries but dnu has {}",
                self.mu.len(),
                self.dnu.len()
            )));
        }
        for v in self.mu.iter().chain(&self.dnu).chain([&self.c]) {
            if !v.is_finite() {
                return Err(SlError::InvalidInput("non-finite spectral entry".into()));
            }
        }
        let offset = self.dnu.len() - self.mu.len();
        for i in 0..self.mu.len().saturating_sub(1) {
            let lower = self.bc.unperturbed(i + offset) + self.mu[i];
            let upper = self.bc.unperturbed(i + 1 + offset) + self.mu[i + 1];
            if lower >= upper {
                return Err(SlError::InterlacingViolation {
                    index: i + offset,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SpectralDoc {
    c: f64,
    mu: Vec<f64>,
    dnu: Vec<f64>,
    #[serde(rename = "N")]
    n: usize,
    bc: BcDoc,
}

#[derive(Serialize, Deserialize)]
struct BcDoc {
    a: AField,
    b: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AField {
    Text(String),
    Value(f64),
}

/// JSON serializer writing floats with 17 significant digits, enough for
/// exact binary round trips.
struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes spectral data to the JSON document format.
pub fn spectral_to_json(data: &SpectralData) -> Result<String> {
    data.validate()?;
    let a = match data.bc {
        BoundaryCondition::Mixed { .. } => AField::Text("inf".into()),
        BoundaryCondition::General { a, .. } => AField::Value(a),
    };
    let doc = SpectralDoc {
        c: data.c,
        mu: data.mu.clone(),
        dnu: data.dnu.clone(),
        n: data.len(),
        bc: BcDoc { a, b: data.bc.b() },
    };
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    doc.serialize(&mut ser)?;
    String::from_utf8(out).map_err(|e| SlError::InvalidInput(e.to_string()))
}

/// Parses and validates a SpectralData JSON document.
pub fn spectral_from_json(text: &str) -> Result<SpectralData> {
    let doc: SpectralDoc = serde_json::from_str(text)?;
    let bc = match doc.bc.a {
        AField::Text(ref s) if s == "inf" => BoundaryCondition::Mixed { b: doc.bc.b },
        AField::Text(ref s) => {
            return Err(SlError::InvalidInput(format!(
                "bc.a must be a number or \"inf\", got {s:?}"
            )))
        }
        AField::Value(a) => BoundaryCondition::General { a, b: doc.bc.b },
    };
    if doc.n != doc.dnu.len() {
        return Err(SlError::InvalidInput(format!(
            "declared N = {} but dnu has {} entries",
            doc.n,
            doc.dnu.len()
        )));
    }
    let data = SpectralData {
        c: doc.c,
        mu: doc.mu,
        dnu: doc.dnu,
        bc,
    };
    data.validate()?;
    Ok(data)
}

pub fn write_spectral(path: &Path, data: &SpectralData) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(spectral_to_json(data)?.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn read_spectral(path: &Path) -> Result<SpectralData> {
    let text = std::fs::read_to_string(path)?;
    spectral_from_json(&text)
}

/// Writes a potential in the CSV format: header `x,q`, one row per node.
pub fn write_potential_csv(path: &Path, q: &Potential) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["x", "q"])?;
    let m = q.grid_size();
    for (j, v) in q.samples().iter().enumerate() {
        wtr.write_record([format!("{}", j as f64 / m as f64), format!("{v}")])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a potential CSV; nodes must be equispaced on [0,1] inclusive.
pub fn read_potential_csv(path: &Path) -> Result<Potential> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    {
        let headers = rdr.headers()?;
        if headers.len() != 2
            || !headers[0].eq_ignore_ascii_case("x")
            || !headers[1].eq_ignore_ascii_case("q")
        {
            return Err(SlError::InvalidInput(format!(
                "potential CSV must have header \"x,q\", got {headers:?}"
            )));
        }
    }
    let mut xs = Vec::new();
    let mut qs = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() != 2 {
            return Err(SlError::InvalidInput(format!(
                "potential CSV row must have two fields, got {record:?}"
            )));
        }
        let x: f64 = record[0]
            .parse()
            .map_err(|_| SlError::InvalidInput(format!("bad x value {:?}", &record[0])))?;
        let v: f64 = record[1]
            .parse()
            .map_err(|_| SlError::InvalidInput(format!("bad q value {:?}", &record[1])))?;
        xs.push(x);
        qs.push(v);
    }
    if xs.len() < MIN_GRID + 1 {
        return Err(SlError::InvalidInput(format!(
            "potential CSV needs at least {} rows, got {}",
            MIN_GRID + 1,
            xs.len()
        )));
    }
    let m = xs.len() - 1;
    for (j, &x) in xs.iter().enumerate() {
        let expected = j as f64 / m as f64;
        if (x - expected).abs() > 1e-9 {
            return Err(SlError::InvalidInput(format!(
                "node {j} at x = {x} is not on the uniform grid (expected {expected})"
            )));
        }
    }
    Potential::new(qs)
}
