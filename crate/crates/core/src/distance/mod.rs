//! Elastic (DTW) and rigid (Euclidean) distances between series, and
//! pairwise distance matrices.
//!
//! DTW is not a metric: the triangle inequality does not hold in general.

mod dtw;
mod matrix;

pub use dtw::{
    band_limits, dtw, dtw_banded, dtw_banded_with_cost, dtw_with_cost, dtw_with_path, euclidean,
    LocalCost, PointSeq,
};
pub use matrix::{distance_matrix, distance_matrix_with, DistanceMatrix, DistanceMetric};
