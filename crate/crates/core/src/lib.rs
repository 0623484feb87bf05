//! Multi-homogeneous polynomials between finite-dimensional sup-norm spaces.
//!
//! A multipolynomial of multidegree `(n₁,…,n_m)` maps `𝕂^{d₁} × ⋯ × 𝕂^{d_m}`
//! to `𝕂` and is homogeneous of degree `nᵢ` in block `i`. The crate provides
//! the sparse representation ([`poly`]), polarization of single-block
//! polynomials ([`polarize`]), certified sup-norm brackets ([`norms`]),
//! composition with linear maps and other multipolynomials ([`compose`]) and
//! the Bohnenblust–Hille experiments ([`bhlab`]).

pub mod bhlab;
pub mod cli;
pub mod compose;
pub mod error;
pub mod expand;
pub mod index;
pub mod interp;
pub mod norms;
pub mod polarize;
pub mod poly;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use index::{eval_monomial, CoefficientKey, MultiDegree, MultiIndex};
pub use interp::coeffs_from_values;
pub use poly::{finite_type, FiniteTypeSpec, FiniteTypeSummand, MultiPolynomial, ValidationReport};
pub use scalar::{Field, Scalar};
