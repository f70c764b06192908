//! Supervised regressors used on each subseries: a single-hidden-layer
//! network trained with resilient propagation, and an epsilon-insensitive
//! support vector regressor with kernels and grid search.

pub mod dataset;
pub mod mlp;
pub mod persist;
pub mod svr;

pub use dataset::{make_lagged_dataset, RegressionDataset};
pub use mlp::{mlp_forward, mlp_loss_and_gradient, mlp_train_rprop, MlpConfig, MlpModel, RpropState};
pub use svr::{
    svr_grid_search, svr_predict, svr_train, GridSearchOutcome, GridSpec, Kernel, KernelGrid,
    SvrConfig, SvrModel,
};
