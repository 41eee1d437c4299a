//! Tensor-product Chebyshev interpolation of expensive multivariate functions,
//! with hierarchical reduced-basis compression of the coefficient tensor.
//!
//! The crate is organised around the offline/online split used in fast pricing:
//!
//! * [`interpolant`] builds a polynomial `I_N F` matching an oracle at all
//!   combinations of per-dimension Chebyshev nodes, and evaluates it on whole
//!   product grids at once through axis contractions ("tensorial evaluation").
//! * [`reduced_basis`] rewrites the interpolant in a hierarchy of orthonormal
//!   function bases ordered by explanatory power and truncates each level
//!   against an MSE budget, cutting storage by orders of magnitude while the
//!   evaluation algorithms keep working on the compressed form.
//! * [`models`] supplies the pricing oracles (Monte Carlo NGARCH(1,1), a
//!   Heston generator for synthetic market quotes, a closed-form lognormal
//!   check) and [`calibration`] fits model parameters to quote sets through
//!   any of the pricer backends.
//!
//! [`tensor`] and [`chebyshev`] hold the shared numerical kernels.

// Validation guards are written as `!(x > 0.0)` so NaN inputs fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod chebyshev;
pub mod error;
pub mod interpolant;
pub mod models;
pub mod reduced_basis;
pub mod tensor;

pub use error::{Error, Result};
pub use interpolant::{ChebEval, Domain, GridEval, Interpolant, ProductGrid};
pub use reduced_basis::ReducedPolynomial;
pub use tensor::NdArray;
