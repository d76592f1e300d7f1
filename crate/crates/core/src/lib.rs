//! GAN training and discriminator-based deepfake detection for payment images.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`]: dense `f64` tensors and GEMM/elementwise kernels.
//! - [`nn`]: dense layers with manual backpropagation, clamped log-likelihood terms, Adam.
//! - [`gan`]: the alternating generator/discriminator training loop and detection.
//! - [`data`] and [`pgm`]: the synthetic card corpus and its on-disk format.
//! - [`metrics`]: confusion matrix, precision/recall/F1, ROC and AUC.

pub mod data;
pub mod error;
pub mod gan;
pub mod metrics;
pub mod nn;
pub mod pgm;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
