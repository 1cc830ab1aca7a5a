//! A small sequential CNN engine: im2col convolution, max pooling, dense
//! layers, dropout, Adam and early stopping, all in `f64`.

mod adam;
pub mod gradcheck;
mod init;
pub mod model_io;
mod network;
pub mod ops;
mod spec;
mod tensor;
mod train;

pub use adam::{AdamParams, AdamState};
pub use init::{fans, glorot_bound, glorot_uniform, glorot_uniform_init};
pub use network::{mse_loss, LabelRanges, Network, Tape};
pub use spec::{
    build, build_arch_a, build_arch_b, Architecture, LayerSpec, NetworkSpec, Shape, ARCH_A_FILTERS,
    DENSE_UNITS, DROPOUT, OUTPUT_DIM,
};
pub use tensor::Tensor;
pub use train::{
    evaluate_loss, train, train_step, EarlyStopping, EpochRecord, Presentation, TrainConfig,
    TrainHistory, TrainingData,
};
