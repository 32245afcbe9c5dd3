//! One-step-ahead traffic forecasting: sliding-window datasets, the
//! regression twin and its mini-batch SGD training.

mod model;
mod train;
mod window;

pub use model::{init_model, quadratic_loss, Arch, TwinModel};
pub use train::{loss_gradient, dataset_mse, local_train, TrainConfig, TrainOutcome};
pub use window::{build_windows, build_windows_for_targets, Sample, WindowSpec, WindowedDataset};
