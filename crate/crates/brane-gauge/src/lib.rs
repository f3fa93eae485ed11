//! Decide existence of holomorphic gauge fields on complexes of sheaves in
//! two concrete geometries (twisted complexes on projective space, constant
//! complexes on flat tori) and compute Yang-Mills critical points of the
//! induced curvature functional.
//!
//! The crate is organized around two scalar backends: exact Gaussian
//! rationals for every dimension count and existence decision, and `f64`
//! complex numbers for the polynomial solver. See the module docs for the
//! conventions each geometry fixes.

pub mod cech;
pub mod char_classes;
pub mod cli;
pub mod fuzz;
pub mod hom;
pub mod json;
pub mod matrix;
pub mod poly;
pub mod projective;
pub mod report;
pub mod scalar;
pub mod torus;
pub mod yang_mills;

pub use matrix::Matrix;
pub use scalar::{Exact, Float, Scalar};
