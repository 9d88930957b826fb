//! Example families, executable property checks and verification suites.

mod checks;
mod family;
mod oracle;
pub mod suites;

pub use checks::{
    additivity_defect, consistency_check, continuity_probe, defects_with, iid_additivity_check,
    locking_check, mmi_bound_sweep, product_system, Component, ContinuityProbe, DefectReport,
    LockingReport, MmiBound, Verdict, CONTINUITY_THRESHOLD, DISCONTINUITY_THRESHOLD,
    PROBE_SEQUENCE,
};
pub use family::{generate, FamilySpec, NAMES};
pub use oracle::broja_oracle;
