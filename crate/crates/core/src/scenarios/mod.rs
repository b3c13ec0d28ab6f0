//! Verification scenarios: each theorem as a tolerance-parameterized
//! predicate over catalog objects, assembled into reports.

mod checks;
mod registry;
mod report;

pub use checks::*;
pub use registry::{check_divergence_reference, run_scenario, scenario_info, scenarios, ScenarioInfo, MOBIUS_B};
pub use report::{equivalence, implication, nan_max, Check, Observation, ReportMetadata, Side, VerificationReport, COUPLING};
