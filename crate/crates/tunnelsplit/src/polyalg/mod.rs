//! Polynomial algebra: roots, resultants and series of algebraic functions.

mod bivariate;
mod poly;
mod resultant;
mod roots;
mod series;

pub use bivariate::BivariatePoly;
pub use poly::ComplexPoly;
pub use resultant::{discriminant_in_p, resultant_exact, resultant_in_p, resultant_interp};
pub use roots::{aberth, reconstruction_residual, roots, roots_flat, Root};
#[allow(unused_imports)]
pub(crate) use roots::lex;
pub use series::{
    expand_at_infinity, growth_at_infinity, puiseux_at_branch, series_sqrt, taylor_shift, Center,
    SeriesExpansion,
};
