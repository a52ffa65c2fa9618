//! From-scratch two-layer GCN: forward pass, hand-derived gradients, Adam,
//! dropout, training loop and a hard-label query oracle.

mod adam;
mod mlp;
mod model;
mod oracle;
mod train;

pub use adam::Adam;
pub use mlp::{train_mlp, Mlp, MlpGradients};
pub use model::{
    argmax, backward, forward, masked_targets, nll_loss, objective, predict, DropoutMask,
    GcnModel, Gradients, PredictionSet,
};
pub use oracle::{query_oracle, Oracle};
pub use train::{train, train_on, train_with_history, TrainConfig, TrainHistory, TrainingData};
