//! Recovery of k continuous frequencies in [-M, M]^d from black-box signal
//! samples, in time polynomial in the dimension.
//!
//! The signal f(t) = Σ a_j·e^{2πi w_j·t} is pushed through a random shear
//! hash that separates tone frequencies into one-dimensional buckets; each
//! bucket is filtered by an importance-sampled convolution and read out along
//! random axis-parallel lines with a one-tone phase estimator. Dense DFT
//! oracles and statistical probes validate every step at desk scale.

pub mod bucketfilter;
pub mod error;
pub mod hashing;
pub mod linesampler;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod seeding;
pub mod toneest;
pub mod util;
pub mod verify;

pub use error::{Error, Result};
