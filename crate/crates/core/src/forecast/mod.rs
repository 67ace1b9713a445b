//! Neural forecasters trained from scratch: dense and LSTM layers with
//! hand-written backpropagation, seven architectures, Adam training, direct
//! multi-horizon framing and record-level cross-validation.

mod cv;
mod frame;
mod layers;
mod network;
mod train;

pub use cv::{cross_validate, fold_partition, run_fold, CvResult, FoldResult};
pub use frame::{fit_frame, predict_horizon, Frame};
pub use layers::{Activation, Dense, Lstm, LstmTrace};
pub use network::{
    gradient_check, Architecture, Dims, Example, GradCheck, Network, Reduction, Trace, GRAD_CHECK_FLOOR, INTERPRETATION,
};
pub use train::{train, ModelSpec, TrainedModel, MODEL_FORMAT_VERSION};
