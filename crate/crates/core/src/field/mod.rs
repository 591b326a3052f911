//! Coefficient arithmetic.
//!
//! Everything above this module is generic over [`Scalar`] (a commutative
//! ring with a partial inverse) or [`Field`] (every nonzero element
//! invertible). The concrete carriers are:
//!
//! * [`Rational`]: arbitrary-precision rationals,
//! * [`ExtElem`]: elements of a simple extension `Q[a]/(p(a))`,
//! * [`Dual`]: dual numbers `u + v*eps` with `eps^2 = 0` over any scalar,
//! * `Complex64` and `f64` for the numeric paths.

mod dual;
mod extension;
mod numeric;
mod rational;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

pub use dual::{dual_lift, Dual};
pub use extension::{make_extension, ExtElem, ExtensionField};
pub use numeric::{complex_roots, Complex64};
pub use rational::{rational_from_f64, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("minimal polynomial is not monic")]
    NotMonic,
    #[error("minimal polynomial must have degree at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("minimal polynomial is reducible: found factor {0}")]
    NotIrreducible(String),
    #[error("operands live in different coefficient fields")]
    MixedFields,
    #[error("named root {0} is not a root of the minimal polynomial")]
    BadNamedRoot(String),
}

/// A commutative ring with unit, exact or floating.
///
/// `try_inv` returns `None` exactly for non-units. Floating carriers report
/// `is_exact() == false`; code that must make zero tests on them goes
/// through [`Scalar::is_negligible`].
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn try_inv(&self) -> Option<Self>;

    fn from_int(n: i64) -> Self;

    fn from_rational(q: &Rational) -> Self;

    fn is_exact() -> bool;

    /// Absolute value (or a norm for composite scalars), as a float.
    fn magnitude(&self) -> f64;

    /// Image under the chosen complex embedding.
    fn to_c64(&self) -> Complex64;

    /// Resolves a symbol such as the extension generator or `eps` while
    /// parsing text. `field` carries the generator and named roots.
    fn resolve_symbol(_name: &str, _field: &FieldSpec) -> Option<Self> {
        None
    }

    /// False when two exact elements come from incompatible extensions.
    fn same_field(&self, _other: &Self) -> bool {
        true
    }

    fn is_negligible(&self, tol: f64) -> bool {
        if Self::is_exact() {
            self.is_zero()
        } else {
            self.magnitude() <= tol
        }
    }

    fn is_unit(&self) -> bool {
        self.try_inv().is_some()
    }
}

/// A [`Scalar`] in which every nonzero element is invertible.
pub trait Field: Scalar {
    fn inv(&self) -> Self {
        self.try_inv().expect("inverse of zero")
    }

    fn div(&self, other: &Self) -> Self {
        self.clone() * other.inv()
    }
}

/// Which exact field problem data lives in.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Rational,
    Extension(std::sync::Arc<ExtensionField>),
}

impl FieldSpec {
    pub fn extension(&self) -> Option<&std::sync::Arc<ExtensionField>> {
        match self {
            FieldSpec::Rational => None,
            FieldSpec::Extension(e) => Some(e),
        }
    }

    /// Complex value of the generator under the chosen embedding (`None`
    /// for the rationals).
    pub fn embedding(&self) -> Option<Complex64> {
        self.extension().map(|e| e.embedding())
    }

    pub fn describe(&self) -> String {
        match self {
            FieldSpec::Rational => "rational".to_string(),
            FieldSpec::Extension(e) => format!("extension:{}", e.minpoly_string()),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}
