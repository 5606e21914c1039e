//! Numerical building blocks shared by the geometry modules.

pub mod fd;
pub mod quadrature;
pub mod rk45;
pub mod roots;
pub mod spectral;
pub mod spline;
pub mod tridiag;

pub use rk45::Rk45;
pub use spline::{CubicSpline, Jet, PeriodicSpline};
