//! Spaces of polynomials with prescribed ramification, built from solutions
//! of Wronskian equations, and their relation to critical points of master
//! functions.
//!
//! The algebra is generic over [`field::Scalar`]; the aliases below fix the
//! carriers used by the command-line tool.

pub mod field;
pub mod poly;
pub mod linalg;
pub mod text;
pub mod wronskian_eq;
pub mod ramification;
pub mod reproduction;
pub mod schubert;
pub mod bethe;
pub mod multiplicity;
pub mod problem;
pub mod verify;

use field::{Complex64, Dual, ExtElem, Rational};
use poly::Poly;

pub type QPoly = Poly<Rational>;
pub type ExtPoly = Poly<ExtElem>;
pub type CPoly = Poly<Complex64>;
/// Polynomials over `Q[eps]/(eps^2)`.
pub type DualPoly = Poly<Dual<Rational>>;

pub type QBasic = ramification::BasicSituation<Rational>;
pub type ExtBasic = ramification::BasicSituation<ExtElem>;
pub type CMaster = bethe::MasterData<Complex64>;

/// Any failure of the library, for callers that do not need to tell the
/// modules apart.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] field::FieldError),
    #[error(transparent)]
    Parse(#[from] text::ParseError),
    #[error(transparent)]
    Poly(#[from] poly::PolyError),
    #[error(transparent)]
    Wronskian(#[from] wronskian_eq::WronskianError),
    #[error(transparent)]
    Ramification(#[from] ramification::RamError),
    #[error(transparent)]
    Reproduction(#[from] reproduction::ReproError),
    #[error(transparent)]
    Schubert(#[from] schubert::SchubertError),
    #[error(transparent)]
    Bethe(#[from] bethe::BetheError),
    #[error(transparent)]
    Multiplicity(#[from] multiplicity::MultError),
    #[error(transparent)]
    Problem(#[from] problem::ProblemError),
    #[error(transparent)]
    Verify(#[from] verify::VerifyError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
