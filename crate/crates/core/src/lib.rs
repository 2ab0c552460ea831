//! Gait-based person identification from body-worn IMUs.
//!
//! The pipeline runs in stages. Each stage is a separate module:
//!
//! ```text
//! Recording -> preprocess -> events -> segmentation -> features -> classifiers -> evaluation
//! ```
//!
//! [`synth`] generates recordings with exact ground-truth gait events. The
//! tests use it as the reference for every stage.
//!
//! The crate is `no_std` and needs only `alloc`. The `std` feature turns on
//! runtime CPU feature detection in the matrix kernels.

#![no_std]
#![warn(clippy::all)]

extern crate alloc;

pub mod classifiers;
pub mod error;
pub mod evaluation;
pub mod events;
pub mod features;
pub mod gait_data;
pub mod matrix;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod segmentation;
pub mod synth;

pub use error::{Error, Result};
pub use gait_data::{Dataset, ImuSample, Recording, SensorId};
pub use matrix::Matrix;
