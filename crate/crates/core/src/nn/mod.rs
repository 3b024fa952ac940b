//! Dense feed-forward networks, reverse-mode gradients, Adam and the
//! training loop.

mod activation;
mod adam;
mod io;
mod loss;
mod net;
mod tensor;
mod train;

pub use activation::{sigmoid, Activation};
pub use adam::AdamState;
pub use io::{LayerSpec, NetDocument, NET_FORMAT_VERSION};
pub use loss::{bce_with_grad, mse, mse_with_grad, neg_log_with_grad, Loss, Mse};
pub use net::{Dense, Gradients, LayerGrad, MlpSpec, NeuralNet, Tape};
pub use tensor::Tensor2;
pub use train::{train, EarlyStopper, EpochLoss, History, Samples, TrainConfig};
