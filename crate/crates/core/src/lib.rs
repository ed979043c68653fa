//! Two-layer stratified solitary waves with shear in height-function form.

pub mod background;
pub mod banded;
pub mod diagnostics;
pub mod error;
pub mod eulerian;
pub mod expr;
pub mod fd;
pub mod grid;
pub mod height_solver;
pub mod io;
pub mod layered;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod reduced_model;
pub mod roots;
pub mod sturm_liouville;

pub use error::{Error, Result};
