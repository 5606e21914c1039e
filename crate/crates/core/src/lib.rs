#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal_geometry;
pub mod error;
pub mod functionals;
pub mod mcf;
pub mod numerics;
pub mod rh_flow;
pub mod soliton_ode;
pub mod suite;
pub mod cli;
pub mod verify;

pub use error::{GeoError, Result};
