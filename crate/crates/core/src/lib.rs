//! Numerical laboratory for multilinear Muckenhoupt weight classes, interpolation
//! certificates for weighted extrapolation, and compactness of bilinear commutators.

pub mod bilinear_operators;
pub mod characterization;
pub mod compactness_lab;
pub mod error;
pub mod experiment;
pub mod grid_quadrature;
pub mod interpolation_solver;
pub mod numeric;
pub mod weight_classes;

pub use error::{Error, Result};
