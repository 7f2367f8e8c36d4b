//! Radial variational toolkit for coupled critical elliptic systems with
//! Hardy potentials.
//!
//! The library works with radial profiles on a truncated annulus
//! `[r_min, r_max]` in dimension `N >= 3`, discretized on a grid that is
//! uniform in log-radius. On top of that sit:
//!
//! * [`analytic`]: closed-form objects (Hardy constants, explicit entire
//!   solutions of the scalar critical equation, best constants, and the
//!   scalar algebra behind the energy-infimum bounds);
//! * [`grid`]: quadrature, Dirichlet forms, and a tridiagonal Riesz solver
//!   whose quadratic form matches the discrete Dirichlet form exactly;
//! * [`energy`]: the coupled functional, its positive-part variant, and
//!   Riesz-representative gradients;
//! * [`nehari`]: projection onto the natural constraint set, restricted
//!   energies, and a local classifier for semi-trivial states;
//! * [`solvers`]: constrained descent, multi-start ground-state searches,
//!   and a string/climbing method for mountain-pass candidates;
//! * [`diagnostics`]: mass-concentration ledgers, compactness threshold
//!   reports, and multi-bubble test states.
//!
//! Everything numeric is generic over a [`Scalar`] floating-point type;
//! [`Real`] (= `f64`) aliases are exported for the common case.

pub mod analytic;
pub mod diagnostics;
pub mod energy;
mod error;
pub mod grid;
pub mod nehari;
pub mod params;
pub mod solvers;

pub use error::Error;
pub use params::{HProfile, Params};

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Convenience result alias for fallible library operations.
pub type Result<T> = std::result::Result<T, Error>;

/// Floating-point scalar the numerics are generic over.
///
/// Implemented for `f32` and `f64`. The pinned tolerances throughout the
/// test-suite assume `f64` resolution; `f32` is suitable for narrow radial
/// boxes only (wide boxes overflow the `r^N` quadrature weights).
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Embeds an `f64` constant (exact for `f64`, rounded for `f32`).
    fn real(x: f64) -> Self {
        Self::from_f64(x).expect("finite scalar constant")
    }

    /// Widens to `f64` for reporting and serialization.
    fn to_real(self) -> f64 {
        self.to_f64().expect("finite scalar value")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Default scalar used by the concrete aliases and the CLI.
pub type Real = f64;
/// Log-uniform radial grid over `Real`.
pub type Grid = grid::RadialGrid<Real>;
/// Radial profile over `Real`.
pub type Field = grid::RadialField<Real>;
/// Two-component state over `Real`.
pub type Pair = energy::StatePair<Real>;

/// Compensated (Neumaier) summation; the quadrature and inner products run
/// through this so that identities pinned near roundoff stay stable.
pub(crate) fn neumaier_sum<S: Scalar, I: IntoIterator<Item = S>>(terms: I) -> S {
    let mut sum = S::zero();
    let mut comp = S::zero();
    for t in terms {
        let next = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - next) + t;
        } else {
            comp += (t - next) + sum;
        }
        sum = next;
    }
    sum + comp
}

/// `x^p` with an exact fast path for integer exponents (the critical
/// exponents are integers in dimensions 3, 4, and 6).
pub(crate) fn pow_real<S: Scalar>(x: S, p: S) -> S {
    let rounded = p.round();
    if p == rounded && rounded.abs() <= S::real(64.0) {
        let n = rounded.to_i32().expect("small integer exponent");
        x.powi(n)
    } else {
        x.powf(p)
    }
}
