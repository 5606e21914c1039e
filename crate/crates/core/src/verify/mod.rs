//! Independent cross-checks of the closed-form geometry and the flows.

pub mod checks;
pub mod oracles;
pub mod report;

pub use checks::{
    check_area_element, check_h_evolution, check_metric_evolution, check_monotonicity, check_thm1,
    check_translating_soliton_eqs, observed_order, MonotonicityReport, Thm1Outcome, Thm1Scenario,
};
pub use report::{FdReport, Gate, Resolution};
