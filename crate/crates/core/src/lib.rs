//! Boundary control method toolkit for finite and semi-infinite Jacobi
//! matrices.
//!
//! The crate simulates the discrete-time wave system driven from the
//! boundary of a Jacobi chain, extracts response vectors and connecting
//! operators from it, recovers the Jacobi coefficients from a response (or
//! moment) sequence, diagnoses determinacy of the associated Hamburger
//! moment problem, and builds the reproducing kernels and Hermite–Biehler
//! functions of the de Branges spaces attached to the system.
//!
//! Modules, bottom-up:
//!
//! - [`jacobi`], [`types`], [`scalar`]: coefficients, shared data types and
//!   precision backends,
//! - [`dynamics`]: forward solvers, response vectors and the control operator,
//! - [`spectral`]: orthogonal polynomials, spectral data and quadrature,
//! - [`moments`]: Hankel matrices and the Chebyshev transform,
//! - [`connecting`]: connecting operators built four independent ways,
//! - [`inverse`]: coefficient recovery,
//! - [`determinacy`]: eigenvalue sequences, circle bounds and a verdict,
//! - [`debranges`]: Krein equations, kernels and Hermite–Biehler functions,
//! - [`io`]: file formats shared with the command-line front end.

pub mod connecting;
pub mod debranges;
pub mod determinacy;
pub mod dynamics;
pub mod error;
pub mod inverse;
pub mod io;
pub mod jacobi;
pub mod linalg;
pub mod moments;
pub mod scalar;
pub mod spectral;
pub mod types;

pub use error::{Error, Result};
pub use jacobi::{materialize_matrix, validate_coefficients, CoefficientSpec, Generator, JacobiCoefficients};
pub use num_complex::Complex64;
pub use scalar::{PrecisionMode, Scalar};
pub use types::{BoundaryControl, MomentSequence, ResponseVector, SpectralData, SpectralPoint};
