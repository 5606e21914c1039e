//! Self-similar backgrounds, the modified flow on the torus, and the radial
//! conjugate heat equation.

mod background;
pub mod conjugate_heat;
pub mod torus;

pub use background::{Background, BackgroundSlice, Motion, SelfSimilarBackground, StaticBackground, BASE_RESIDUAL_TOL};
pub use conjugate_heat::{
    conjugate_heat_solve_radial, BoundaryRule, ConjugateHeatProblem, ConjugateHeatState, ConjugateHeatTrajectory,
    DomainMotion, RadialCoefficients, RadialMedium,
};
pub use torus::{flow_rates, modified_flow_step_2d, torus_geometry, FlowRates, TorusFlow, TorusGeometry, TorusState};
