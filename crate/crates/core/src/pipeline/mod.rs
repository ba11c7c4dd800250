//! Batch orchestration: configuration, per-village analysis, artifact
//! writing and cross-village summaries.

mod bundle;
mod config;
mod run;
mod summary;
mod village;

pub use bundle::*;
pub use config::{
    FitMode, MissingMode, PermutationSettings, RunConfig, SCHEMA_VERSION, WORKERS_ENV,
};
pub use run::{
    discover_villages, run_pipeline, ErrorsManifest, RunManifest, RunReport, VillageFailure,
    ERRORS_FILE, NETWORKS_DIR, PARTITIONS_DIR, RUN_FILE, VILLAGES_DIR,
};
pub use summary::*;
pub use village::{analyze_village, grouping_bins, Grouping, MISSING_LABEL};
