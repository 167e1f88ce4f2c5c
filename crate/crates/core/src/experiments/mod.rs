//! Scenario builders: the three-angle Bell experiment, the simplified Bell
//! experiment and the double Bell network with its causal-loop verdict.

mod bell;
mod double_bell;
pub mod quantum;

pub use bell::{
    bell_layout, bell_placements, bell_violation_report, build_simplified_bell, signalling_channel,
    singlet_table, BellPortNames, BellScenario, BellViolationReport, InequalityInstance,
    SimplifiedBell, SimplifiedBellConfig,
};
pub use double_bell::{
    assumption_audit, double_bell_placements, double_bell_verdict, Assumption, AuditEntry,
    AuditStatus, DoubleBellNetwork, DoubleBellVerdict,
};

#[cfg(test)]
mod tests;
