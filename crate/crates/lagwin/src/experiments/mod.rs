//! Replication studies. Every replication is seeded from its index, so
//! results do not depend on scheduling or worker count.

pub mod coverage;
pub mod models;
pub mod rate;
pub mod toy;

pub use coverage::{coverage_study, default_deltas, CoverageConfig, CoverageReport, CoverageRow};
pub use models::{ModelSpec, PreparedModel, TruthSource};
pub use rate::{coupled_paths, rate_study, RateConfig, RateReport, RateRow};
pub use toy::{toy_multilimit_study, ToyCluster, ToyReport, ToySeedResult, ToyStudyConfig, ToyTraceRow};
