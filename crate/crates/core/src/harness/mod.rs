//! Experiment configuration, persistence, orchestration and reporting.

pub mod ablation;
pub mod config;
pub mod experiment;
pub mod io;
pub mod report;

pub use ablation::{column_subsets, run_ablation, AblationReport, AblationRow};
pub use config::{
    CleanScope, ClusterMethod, ClusteringConfig, DataSource, ExperimentConfig, PreprocessConfig, TrainingConfig,
};
pub use experiment::{
    cluster_dataset, dtw_matrix, load_cells, load_data, prepare, run_cells, run_experiment, run_prepared, CellKey,
    CellRecord, CleaningEntry, ClusteringOutcome, CELLS_FILE,
};
pub use io::{load_dataset, save_dataset, save_outliers, Sidecar};
pub use report::{
    assemble_report, load_report, rebuild_report, render_summary, write_report, CellResult, ClusterSummary, Comparison,
    Composite, ErrorReport, WeightedTotal,
};
