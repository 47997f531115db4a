//! The partition oracle: parameters, seeded randomness, clustering, the
//! threshold finder, the local query procedures and the global reference run.

pub mod cluster;
pub mod findr;
pub mod global;
pub mod local;
pub mod params;
pub mod partition;
pub mod seed;

pub use cluster::{cluster, ClusterScan};
pub use findr::{KTally, PhaseDecision, PhaseThresholds};
pub use global::{global_partition, global_run, global_run_with, GlobalRun};
pub use local::{PartitionOracle, WorkStats};
pub use params::{derive_params, KCandidates, KSelection, OracleParams, Overrides, ParamError, ParamMode};
pub use partition::{Partition, PartitionExport};
pub use seed::{Purpose, SeedContext};
