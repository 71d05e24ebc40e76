//! Forward and inverse spectral solver for the Sturm-Liouville operator
//! -psi'' + q psi on [0,1] with boundary conditions psi(0) = 0,
//! psi'(1) + b psi(1) = 0 (and the general pair psi'(0) - a psi(0) = 0,
//! psi'(1) + b psi(1) = 0).
//!
//! The forward direction enumerates eigenvalues and norming constants by
//! shooting and verifies the trace identities tying the boundary constants
//! to the spectral data. The inverse direction reconstructs (q, b) from the
//! coordinates (Q_0 + 2b; {mu_n}; {nu_n - nu_n^0}) by damped Newton
//! iteration with the explicit biorthogonal dual basis, with exact Darboux
//! flows available for pure norming-constant changes and bisection
//! recoveries for single deleted coordinates.

pub mod darboux;
pub mod data;
pub mod error;
pub mod frechet;
pub mod general_bc;
pub mod hadamard;
pub mod inverse;
pub mod potential;
mod rootfind;
pub mod shooting;
pub mod spectrum;

pub use data::{BoundaryCondition, SpectralData};
pub use error::{Result, SlError};
pub use potential::Potential;
pub use spectrum::EigenRecord;
