//! Experiment runner for the `ehcap-core` library.
//!
//! Each experiment reads one [`config::ExperimentConfig`] (a flat key-value
//! file plus command-line overrides), runs the corresponding pipeline from
//! [`experiments`], and serialises an [`output::Table`] as CSV or JSON. All
//! randomness is seeded through the config, so identical configs produce
//! byte-identical output; the emitted header records the version, the seeds,
//! and a hash of the effective config.

pub mod config;
pub mod experiments;
pub mod output;

/// Process exit codes shared by the binary and the integration tests.
pub mod exit {
    /// Everything ran and every row satisfied its invariants.
    pub const OK: i32 = 0;
    /// At least one row violated a numerical invariant or failed to compute.
    pub const INVARIANT: i32 = 2;
    /// At least one row was refused because an enumeration budget was hit.
    pub const BUDGET: i32 = 3;
    /// The configuration (file or flags) could not be used at all.
    pub const BAD_CONFIG: i32 = 4;
}
