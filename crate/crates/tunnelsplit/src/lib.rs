pub mod contour;
pub mod curve;
pub mod error;
pub mod homology;
pub mod model;
pub mod polyalg;
pub mod qref;
pub mod semicl;

pub use error::{Error, Result};
