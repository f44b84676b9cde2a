//! Sobolev quotient, deficit, distance to the bubble manifold, second
//! variation, Hardy check, local constants and the expansion probes.

mod constants;
mod probes;
mod problem;
mod quotient;
mod test_function;
mod variation;

pub use constants::{cd_upper_bound, local_constant, Branch, LocalConstant};
pub use probes::{
    decomposition, expansion_probe, strictness_probe, Decomposition, ExpansionProbe, ExpansionRow,
    RhoChoice, StrictnessProbe,
};
pub use problem::{ConeProblem, Form};
pub use quotient::{
    best_constant_bubble, critical_integral, deficit_report, distance_to_manifold,
    sobolev_quotient, DeficitReport, Distance,
};
pub use test_function::{AngularMode, Component, TestFunction};
pub use variation::{hardy_check, second_variation, HardyCheck, SecondVariation};
