//! Weighted area, the Huisken quantity, the functional `F^α_∞` with its variation,
//! the boundary-weighted right side of its time derivative, and Harnack expressions.

mod area;
mod energy;
mod frame;
mod harnack;
mod thm1;

pub use area::{huisken_phi, phi_prefactor, residual_integral, weighted_area, WeightedAreaSeries};
pub use energy::{
    f_alpha_radial, f_alpha_torus, f_alpha_torus_by_parts, variation_delta_f, variation_rhs, FunctionalBreakdown,
    TorusPerturbation, VariationResult,
};
pub use frame::{frame_terms, FrameTerms};
pub use harnack::{extended_harnack, fixed_label_rate, harnack_z, mean_curvature_rate, HarnackField, HarnackReport, HYPOTHESIS_TOL};
pub use thm1::{thm1_rhs, BoundaryTerms, RadialBoundary, RadialData, Thm1Rhs};
