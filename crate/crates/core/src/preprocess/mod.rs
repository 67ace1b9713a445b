//! Anomaly detection on a loess decomposition remainder, and imputation of
//! missing values.

mod anomaly;
mod impute;
mod loess;

pub use anomaly::{
    clean_flagged, clean_series, detect_outliers, AnomalyReport, DetectorConfig, ThresholdRule,
    IQR_FACTOR,
};
pub use impute::{impute, ImputeMethod};
pub use loess::{decompose, loess_smooth, Decomposition, DEFAULT_SPAN};
